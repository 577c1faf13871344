"""
Registro de suites: cada suite es una lista de tareas (check_id, callable)
que run_checks ejecuta en paralelo.
"""

from __future__ import annotations

import logging
import random

from .cyclic import (Chain, chern_character, closure_check, connes_B, hochschild_b,
                     random_chain)
from .presentations import load_expression, load_presentation
from .q_sympl import build_projection_q, build_q_spheres, qsympl_tasks
from .qrep import pairing_tasks
from .theta_spheres import ThetaConfig, build_instanton, theta_tasks
from .twisted_symmetry import so5_tasks, so51_tasks, variation_tasks
from .utils.checks import CheckResult

logger = logging.getLogger(__name__)

SUITES = ('theta', 'so5', 'so51', 'variations', 'qsympl', 'cyclic', 'pair')
CYCLIC_ALGEBRAS = ('s4_theta', 's7_theta', 's7_q', 'su2_q')


# ============================================================================
# SUITE CÍCLICA
# ============================================================================

def complex_identities(system, n_chains=200, max_degree=3, seed=0):
    """b² = 0, B² = 0 y bB + Bb = 0 sobre cadenas aleatorias de grado ≤ max_degree"""
    rng = random.Random(seed)
    b2, B2, anti_avg, anti_plain = [], [], [], []
    for k in range(n_chains):
        degree = 1 + k % max_degree
        c = random_chain(system, rng, degree)
        if c.is_zero():
            continue
        b2.append(hochschild_b(hochschild_b(c)) if degree >= 2 else Chain.zero(system))
        B2.append(connes_B(connes_B(c, True), True))
        B2.append(connes_B(connes_B(c, False), False))
        anti_avg.append(hochschild_b(connes_B(c, True)) + connes_B(hochschild_b(c), True))
        anti_plain.append(hochschild_b(connes_B(c, False)) + connes_B(hochschild_b(c), False))

    name = system.name
    return [
        CheckResult.from_residuals(f"cyclic.b2.{name}", 'cyclic', "b² = 0", b2,
                                   detail=f"{n_chains} cadenas"),
        CheckResult.from_residuals(f"cyclic.B2.{name}", 'cyclic',
                                   "B² = 0 (con y sin el factor 1/(n+1))", B2),
        CheckResult.from_residuals(f"cyclic.bB.{name}", 'cyclic', "bB + Bb = 0 con B = B₀N",
                                   anti_avg, corrected=anti_plain,
                                   detail="variante: N como suma cíclica sin promediar"),
    ]


def _closure_result(check_id, anchor, p, include_ch2):
    report = closure_check(p, include_ch2)
    shown = [res['averaged'] for res in report.residuals.values()]
    plain = [res['plain_sum'] for res in report.residuals.values()]
    return CheckResult.from_variants(
        check_id, 'cyclic', anchor, shown, {'plain_sum': plain},
        detail=f"convenciones que cierran: {report.closing_conventions or 'ninguna'}")


def cyclic_tasks(cfg: ThetaConfig, random_chains=200, max_degree=3, include_ch2=False,
                 seed=0, step_budget=None):
    budget = step_budget or cfg.step_budget

    def theta_chern():
        data = build_instanton(cfg)
        residual = chern_character(data.p, 0) - Chain.from_polys([data.s4.const(2)])
        return [
            CheckResult.from_residuals("cyclic.ch0.p_theta", 'cyclic', "ch₀(p_θ) = tr p = 2",
                                       residual),
            _closure_result("cyclic.closure.p_theta", "(b + B) ch_*(p_θ) = 0", data.p,
                            include_ch2),
        ]

    def q_chern():
        qs = build_q_spheres(budget)
        _, p = build_projection_q(budget)
        ch0 = chern_character(p, 0).to_poly()
        expected = qs.embed(load_expression(qs.letters, 'ch0'))
        return [
            CheckResult.from_residuals("cyclic.ch0.p_q", 'cyclic',
                                       "ch₀(p_q) = 2 − q⁻⁴(1−q²)(1−q⁴)t", ch0 - expected),
            CheckResult.from_residuals("cyclic.ch0.p_q_selfadjoint", 'cyclic',
                                       "ch₀(p_q)* = ch₀(p_q)", ch0.star() - ch0),
            _closure_result("cyclic.closure.p_q", "(b + B) ch_*(p_q) = 0", p, include_ch2),
        ]

    tasks = [("cyclic.theta", theta_chern), ("cyclic.q", q_chern)]
    for name in CYCLIC_ALGEBRAS:
        tasks.append((f"cyclic.complex.{name}",
                      lambda name=name: complex_identities(
                          load_presentation(name, step_budget=budget),
                          random_chains, max_degree, seed)))
    return tasks


# ============================================================================
# REGISTRO
# ============================================================================

def suite_tasks(suite, cfg, settings):
    """
    Tareas de una suite. settings lleva los parámetros de config.yaml ya
    combinados con los argumentos del CLI (q, cutoff, seed, oracle, cyclic).
    """
    theta_cfg = ThetaConfig.from_value(cfg.theta, cfg.step_budget)
    if suite == 'theta':
        return theta_tasks(theta_cfg, settings['hodge_points'], settings['su2_angles'],
                           cfg.seed, settings['oracle_tolerance'])
    if suite == 'so5':
        return so5_tasks(theta_cfg)
    if suite == 'so51':
        return so51_tasks(theta_cfg)
    if suite == 'variations':
        return variation_tasks(theta_cfg)
    if suite == 'qsympl':
        return qsympl_tasks(cfg.seed, cfg.step_budget, settings['oracle_pairs'])
    if suite == 'cyclic':
        return cyclic_tasks(theta_cfg, settings['random_chains'], settings['max_degree'],
                            settings['include_ch2'], cfg.seed, cfg.step_budget)
    if suite == 'pair':
        return pairing_tasks(cfg.q, cfg.cutoff, settings['numeric_tolerance'])
    raise KeyError(suite)
