"""
============================================================================
CLI - verificación de las esferas deformadas y emparejamientos de índice
============================================================================

Uso:
    python -m ncspheres verify --suite theta --theta 1/3
    python -m ncspheres verify --suite all --json
    python -m ncspheres pair --q 1/2 --cutoff 40 --json
    python -m ncspheres presentations

Códigos de salida: 0 si ninguna comprobación falla, 1 si alguna falla y 2
ante errores de configuración o de parámetros.
============================================================================
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime

from .config import load_config, suite_settings
from .errors import (BadParameter, ConfigError, NCSpheresError, PresentationError,
                     UnknownLetter)
from .ncalg import DEFAULT_STEP_BUDGET
from .presentations import available_presentations, load_presentation
from .qrep import pairing_summary
from .scalars import parse_rational
from .suites import SUITES, suite_tasks
from .theta_spheres import ThetaConfig
from .utils.checks import CheckResult, Report, run_checks
from .utils.logs import setup_logging

logger = logging.getLogger('ncspheres')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

CONFIG_ERRORS = (ConfigError, BadParameter, UnknownLetter, PresentationError)


# ============================================================================
# PARÁMETROS
# ============================================================================

def parse_q(value):
    """q racional exacto ('1/2') o flotante ('0.9'), siempre en (0, 1)"""
    try:
        q = parse_rational(value)
        qf = float(q.numerator) / float(q.denominator)
    except (TypeError, ValueError, ZeroDivisionError):
        try:
            q = qf = float(value)
        except (TypeError, ValueError) as exc:
            raise BadParameter(f"q no es un número: {value!r}") from exc
    if not 0.0 < qf < 1.0:
        raise BadParameter(f"q debe estar en (0, 1): {value}")
    return q


@dataclass
class SuiteConfig:
    suite: str = 'all'
    theta: object = '1/3'
    q: object = '1/2'
    cutoff: int = 40
    output: str = 'text'
    seed: int = 0
    step_budget: int = DEFAULT_STEP_BUDGET
    max_workers: int | None = None
    settings: dict = field(default_factory=dict)

    def validate(self):
        if self.suite not in SUITES + ('all',):
            raise BadParameter(f"suite desconocida: {self.suite}")
        if self.output not in ('text', 'json'):
            raise BadParameter(f"salida desconocida: {self.output}")
        self.theta = ThetaConfig.from_value(self.theta, self.step_budget).theta
        self.q = parse_q(self.q)
        if int(self.cutoff) != self.cutoff or self.cutoff < 4:
            raise BadParameter(f"el corte debe ser un entero ≥ 4: {self.cutoff}")
        if self.step_budget <= 0:
            raise BadParameter(f"step_budget debe ser positivo: {self.step_budget}")
        return self

    def selected_suites(self):
        return list(SUITES) if self.suite == 'all' else [self.suite]

    def params(self):
        return {'suite': self.suite, 'theta': str(self.theta), 'q': str(self.q),
                'cutoff': self.cutoff, 'seed': self.seed, 'step_budget': self.step_budget}


# ============================================================================
# EJECUCIÓN
# ============================================================================

def run(cfg: SuiteConfig, progress=True):
    """Ejecuta las suites seleccionadas; devuelve (código de salida, Report)"""
    report = Report(params=cfg.params())
    try:
        cfg.validate()
        report.params = cfg.params()
        for suite in cfg.selected_suites():
            start = time.perf_counter()
            tasks = suite_tasks(suite, cfg, cfg.settings)
            report.extend(run_checks(tasks, suite, cfg.max_workers, progress))
            logger.info(f"✅ Suite '{suite}' en {time.perf_counter() - start:.1f} s")
    except CONFIG_ERRORS as exc:
        logger.error(f"❌ Error de configuración: {exc}")
        return EXIT_CONFIG, report
    except NCSpheresError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        return EXIT_FAILED, report
    return report.exit_code(), report


def run_pair(cfg: SuiteConfig, progress=True):
    cfg.suite = 'pair'
    code, report = run(cfg, progress)
    if code == EXIT_CONFIG:
        return code, report
    try:
        report.extra.update(pairing_summary(cfg.q, cfg.cutoff))
    except NCSpheresError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        return EXIT_FAILED, report
    return code, report


def run_presentations(cfg: SuiteConfig):
    """Sistemas incluidos y su comprobación de solapamientos"""
    report = Report(params={'step_budget': cfg.step_budget})
    try:
        for name in available_presentations():
            system = load_presentation(name, step_budget=cfg.step_budget)
            start = time.perf_counter()
            overlaps = system.check_overlaps()
            result = CheckResult.from_bool(
                f"presentations.{name}", 'presentations',
                f"{system.name}: {len(system.generators)} generadores, {len(system.rules)} "
                f"reglas, {len(system.ideal_rules)} de ideal",
                overlaps.resolved, detail=f"{overlaps.checked} solapamientos",
                residual=overlaps.ambiguities)
            result.seconds = time.perf_counter() - start
            report.add(result)
    except CONFIG_ERRORS as exc:
        logger.error(f"❌ Error de configuración: {exc}")
        return EXIT_CONFIG, report
    return report.exit_code(), report


def emit(report: Report, output):
    if output == 'json':
        print(report.dumps())
    else:
        print(report.to_text())
        for key, value in report.extra.items():
            print(f"{key}: {value}")


# ============================================================================
# MAIN
# ============================================================================

def build_parser():
    parser = argparse.ArgumentParser(
        prog='ncspheres',
        description='Verificación simbólica de esferas θ y q, instantones y emparejamientos')
    parser.add_argument('--config', type=str, default=None, help='ruta de config.yaml')
    parser.add_argument('--log-level', type=str, default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    sub = parser.add_subparsers(dest='command', required=True)

    verify = sub.add_parser('verify', help='ejecuta suites de comprobaciones')
    verify.add_argument('--suite', type=str, default='all', choices=list(SUITES) + ['all'])
    verify.add_argument('--theta', type=str, default=None)
    verify.add_argument('--q', type=str, default=None)
    verify.add_argument('--cutoff', type=int, default=None)
    verify.add_argument('--seed', type=int, default=None)
    verify.add_argument('--step-budget', type=int, default=None)
    verify.add_argument('--json', action='store_true')

    pair = sub.add_parser('pair', help='emparejamiento de índice en S⁴_q')
    pair.add_argument('--q', type=str, default=None)
    pair.add_argument('--cutoff', type=int, default=None)
    pair.add_argument('--json', action='store_true')

    presentations = sub.add_parser('presentations', help='lista los sistemas incluidos')
    presentations.add_argument('--step-budget', type=int, default=None)
    presentations.add_argument('--json', action='store_true')
    return parser


def _config_from_args(args, config):
    defaults, limits = config['defaults'], config['limits']

    def pick(name, fallback):
        value = getattr(args, name, None)
        return fallback if value is None else value

    return SuiteConfig(
        suite=pick('suite', 'all'),
        theta=pick('theta', str(defaults['theta'])),
        q=pick('q', str(defaults['q'])),
        cutoff=pick('cutoff', int(defaults['cutoff'])),
        output='json' if args.json else 'text',
        seed=pick('seed', int(defaults['seed'])),
        step_budget=pick('step_budget', int(limits['step_budget'])),
        max_workers=limits.get('max_workers'),
        settings=suite_settings(config),
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        cfg = _config_from_args(args, config)
    except ConfigError as exc:
        logging.basicConfig(level=logging.ERROR)
        logger.error(f"❌ {exc}")
        return EXIT_CONFIG

    log_cfg = config['logging']
    log_file = log_cfg['files'].get(args.command, f"{args.command}.log")
    setup_logging(os.path.join(config['paths']['logs'], log_file),
                  args.log_level or log_cfg['level'], log_cfg['format'], log_cfg['date_format'],
                  stream=sys.stderr if cfg.output == 'json' else None)

    logger.info("=" * 70)
    logger.info(f"🚀 NCSPHERES - {args.command}")
    logger.info("=" * 70)
    logger.info(f"Fecha: {datetime.now()}")

    progress = cfg.output == 'text'
    if args.command == 'verify':
        code, report = run(cfg, progress)
    elif args.command == 'pair':
        code, report = run_pair(cfg, progress)
    else:
        code, report = run_presentations(cfg)

    emit(report, cfg.output)
    status = {EXIT_OK: '🎉 TODAS LAS COMPROBACIONES PASAN', EXIT_FAILED: '❌ HAY FALLOS',
              EXIT_CONFIG: '❌ CONFIGURACIÓN INVÁLIDA'}[code]
    logger.info("=" * 70)
    logger.info(status)
    logger.info("=" * 70)
    return code


if __name__ == '__main__':
    sys.exit(main())
