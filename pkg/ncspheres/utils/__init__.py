"""
Utilidades compartidas: logging e informes de comprobaciones
"""

from .checks import CheckResult, Report, run_checks, worker_count
from .logs import setup_logging

__all__ = ['CheckResult', 'Report', 'run_checks', 'worker_count', 'setup_logging']
