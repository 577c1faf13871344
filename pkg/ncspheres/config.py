"""
Configuración del proyecto (config.yaml en la raíz)
"""

from __future__ import annotations

import copy
from pathlib import Path

import yaml

from .errors import ConfigError
from .ncalg import DEFAULT_STEP_BUDGET

CONFIG_PATH = Path(__file__).parent.parent / 'config.yaml'

DEFAULT_CONFIG = {
    'paths': {
        'logs': 'logs',
        'reports': 'reports',
    },
    'logging': {
        'level': 'INFO',
        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        'date_format': '%Y-%m-%d %H:%M:%S',
        'files': {
            'verify': 'verificar.log',
            'pair': 'emparejamiento.log',
        },
    },
    'limits': {
        'step_budget': DEFAULT_STEP_BUDGET,
        'max_workers': None,
        'oracle_tolerance': 1e-10,
        'numeric_tolerance': 1e-10,
    },
    'defaults': {
        'theta': '1/3',
        'q': '1/2',
        'cutoff': 40,
        'seed': 0,
    },
    'oracle': {
        'hodge_points': 20,
        'su2_angles': [0.3, 0.7],
        'oracle_pairs': 100,
    },
    'cyclic': {
        'random_chains': 200,
        'max_degree': 3,
        'include_ch2': False,
    },
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path=None):
    """
    Carga config.yaml sobre los valores por defecto.

    Si el archivo no existe se devuelve la configuración por defecto; un
    YAML mal formado o una sección que no es un diccionario lanzan
    ConfigError.
    """
    config_path = Path(path) if path else CONFIG_PATH
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError:
        if path:
            raise ConfigError(f"no existe el archivo de configuración {config_path}")
        return copy.deepcopy(DEFAULT_CONFIG)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config.yaml mal formado: {exc}") from exc

    if not isinstance(data, dict):
        raise ConfigError("config.yaml debe contener un diccionario")
    for section, value in data.items():
        if section in DEFAULT_CONFIG and not isinstance(value, dict):
            raise ConfigError(f"la sección '{section}' debe ser un diccionario")
    return _merge(DEFAULT_CONFIG, data)


def suite_settings(config):
    """Parámetros planos que consumen las suites"""
    limits, oracle, cyclic = config['limits'], config['oracle'], config['cyclic']
    try:
        return {
            'oracle_tolerance': float(limits['oracle_tolerance']),
            'numeric_tolerance': float(limits['numeric_tolerance']),
            'hodge_points': int(oracle['hodge_points']),
            'su2_angles': tuple(float(a) for a in oracle['su2_angles']),
            'oracle_pairs': int(oracle['oracle_pairs']),
            'random_chains': int(cyclic['random_chains']),
            'max_degree': int(cyclic['max_degree']),
            'include_ch2': bool(cyclic['include_ch2']),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"parámetro de configuración inválido: {exc}") from exc
