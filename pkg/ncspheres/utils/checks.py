"""
============================================================================
INFORMES DE COMPROBACIONES - CheckResult, Report y ejecución en paralelo
============================================================================

Cada comprobación produce un CheckResult con estado:

    ok         la identidad mostrada se cumple
    corrected  la forma mostrada falla pero la variante documentada se cumple
    failed     ninguna variante se cumple

El informe se exporta a JSON (schema_version = 1) y a una tabla de texto
construida con pandas.
============================================================================
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field

import pandas as pd
import psutil
from tqdm import tqdm

from ..errors import (DerivationMismatch, InvariantFailed, NotAProjection, OracleMismatch,
                      ShapeMismatch, StepBudgetExceeded)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

OK = 'ok'
CORRECTED = 'corrected'
FAILED = 'failed'

STATUS_EMOJI = {OK: '✅', CORRECTED: '🔧', FAILED: '❌'}

# Errores que convierten una comprobación en 'failed' en lugar de abortar la suite
CHECK_FAILURES = (InvariantFailed, OracleMismatch, DerivationMismatch, StepBudgetExceeded,
                  NotAProjection, ShapeMismatch)


def serialize(value):
    """Convierte residuos (NCPoly, NCMatrix, Chain, números...) a JSON"""
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    if hasattr(value, 'to_json'):
        return value.to_json()
    if isinstance(value, dict):
        return {str(k): serialize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [serialize(v) for v in value]
    if hasattr(value, 'item'):
        return serialize(value.item())
    return str(value)


def is_zero_residual(value):
    """Un residuo es nulo si todas sus partes lo son"""
    if value is None:
        return True
    if isinstance(value, (list, tuple)):
        return all(is_zero_residual(v) for v in value)
    if isinstance(value, dict):
        return all(is_zero_residual(v) for v in value.values())
    if hasattr(value, 'is_zero'):
        return value.is_zero()
    return not value


@dataclass
class CheckResult:
    check_id: str
    suite: str
    anchor: str
    status: str
    residual: object = None
    detail: str = ''
    seconds: float = 0.0

    @classmethod
    def from_residuals(cls, check_id, suite, anchor, shown, corrected=None, detail=''):
        """
        Estado a partir del residuo de la forma mostrada y, opcionalmente,
        del de la variante corregida.
        """
        if is_zero_residual(shown):
            return cls(check_id, suite, anchor, OK, None, detail)
        if corrected is not None and is_zero_residual(corrected):
            residual = {'shown': serialize(shown), 'corrected': None}
            return cls(check_id, suite, anchor, CORRECTED, residual, detail)
        residual = {'shown': serialize(shown)}
        if corrected is not None:
            residual['corrected'] = serialize(corrected)
        return cls(check_id, suite, anchor, FAILED, residual, detail)

    @classmethod
    def from_variants(cls, check_id, suite, anchor, shown, variants, detail=''):
        """Como from_residuals, con varias lecturas corregidas {nombre: residuo}"""
        if is_zero_residual(shown):
            return cls(check_id, suite, anchor, OK, None, detail)
        holding = [name for name, res in variants.items() if is_zero_residual(res)]
        if holding:
            note = f"se cumple la variante: {', '.join(holding)}"
            return cls(check_id, suite, anchor, CORRECTED,
                       {'shown': serialize(shown), 'holds': holding},
                       f"{detail}; {note}" if detail else note)
        residual = {'shown': serialize(shown)}
        residual.update({name: serialize(res) for name, res in variants.items()})
        return cls(check_id, suite, anchor, FAILED, residual, detail)

    @classmethod
    def from_bool(cls, check_id, suite, anchor, holds, detail='', residual=None):
        status = OK if holds else FAILED
        return cls(check_id, suite, anchor, status, None if holds else serialize(residual), detail)

    @property
    def failed(self):
        return self.status == FAILED

    def to_json(self):
        data = asdict(self)
        data['residual'] = serialize(self.residual)
        data['seconds'] = round(self.seconds, 4)
        return data


@dataclass
class Report:
    params: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, result: CheckResult):
        self.results.append(result)

    def extend(self, results):
        self.results.extend(results)

    def sorted_results(self):
        return sorted(self.results, key=lambda r: r.check_id)

    def counts(self):
        out = {OK: 0, CORRECTED: 0, FAILED: 0}
        for r in self.results:
            out[r.status] = out.get(r.status, 0) + 1
        return out

    @property
    def has_failures(self):
        return any(r.failed for r in self.results)

    def exit_code(self):
        return 1 if self.has_failures else 0

    def to_dataframe(self):
        rows = [{
            'check_id': r.check_id,
            'suite': r.suite,
            'status': r.status,
            'anchor': r.anchor,
            'seconds': round(r.seconds, 3),
            'detail': r.detail,
        } for r in self.sorted_results()]
        return pd.DataFrame(rows, columns=['check_id', 'suite', 'status', 'anchor',
                                           'seconds', 'detail'])

    def to_json(self):
        return {
            'schema_version': SCHEMA_VERSION,
            'params': serialize(self.params),
            'summary': self.counts(),
            'checks': [r.to_json() for r in self.sorted_results()],
            **{k: serialize(v) for k, v in self.extra.items()},
        }

    def dumps(self):
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2)

    def to_text(self):
        df = self.to_dataframe()
        if df.empty:
            return "(sin comprobaciones)"
        df['status'] = df['status'].map(lambda s: f"{STATUS_EMOJI.get(s, '')} {s}")
        counts = self.counts()
        summary = (f"\nok: {counts[OK]}  corrected: {counts[CORRECTED]}  "
                   f"failed: {counts[FAILED]}")
        return df.to_string(index=False) + summary


# ============================================================================
# EJECUCIÓN
# ============================================================================

def worker_count(limit=None):
    """Hilos disponibles: núcleos físicos, acotados por NCG_WORKERS y por config"""
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    env = os.environ.get('NCG_WORKERS')
    if env:
        try:
            cores = min(cores, max(1, int(env)))
        except ValueError:
            logger.warning(f"⚠️  NCG_WORKERS inválido: {env!r}")
    if limit:
        cores = min(cores, int(limit))
    return max(1, cores)


def _timed(check_id, suite, fn):
    start = time.perf_counter()
    try:
        result = fn()
    except CHECK_FAILURES as exc:
        residual = getattr(exc, 'residual', None) or getattr(exc, 'differences', None)
        result = CheckResult(check_id, suite, '', FAILED, serialize(residual), str(exc))
    elapsed = time.perf_counter() - start
    results = result if isinstance(result, list) else [result]
    for r in results:
        r.seconds = elapsed / len(results)
    return results


def run_checks(tasks, suite, max_workers=None, progress=True):
    """
    Ejecuta [(check_id, callable)] en un pool de hilos.

    Cada callable devuelve un CheckResult o una lista de ellos.
    """
    workers = worker_count(max_workers)
    results = []
    logger.info(f"🚀 Suite '{suite}': {len(tasks)} tareas con {workers} hilos")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_timed, check_id, suite, fn): check_id for check_id, fn in tasks}
        iterator = as_completed(futures)
        if progress:
            iterator = tqdm(iterator, total=len(futures), desc=f"Suite {suite}", unit="check")
        for future in iterator:
            for r in future.result():
                if r.status == FAILED:
                    logger.error(f"❌ {r.check_id}: {r.detail or 'residuo no nulo'}")
                elif r.status == CORRECTED:
                    logger.info(f"🔧 {r.check_id}: forma mostrada corregida")
                else:
                    logger.debug(f"✅ {r.check_id}")
                results.append(r)
    return sorted(results, key=lambda r: r.check_id)
