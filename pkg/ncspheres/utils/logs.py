"""
Configuración de logging compartida por el CLI y los scripts por lotes
"""

import logging
import os
import sys

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logging(log_path, log_level='INFO', log_format=LOG_FORMAT, date_format=DATE_FORMAT,
                  stream=None):
    """Configura el sistema de logging (archivo + consola)"""
    handlers = [logging.StreamHandler(stream or sys.stdout)]
    if log_path:
        directory = os.path.dirname(log_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        handlers.insert(0, logging.FileHandler(log_path, encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, str(log_level).upper(), logging.INFO),
        format=log_format,
        datefmt=date_format,
        handlers=handlers,
        force=True,
    )

    return logging.getLogger('ncspheres')
