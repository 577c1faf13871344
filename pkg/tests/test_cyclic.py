import random

import pytest

from ncspheres.cyclic import (Chain, UniversalCalculus, closure_check, connes_B, hochschild_b,
                              random_chain)
from ncspheres.errors import DegreeZero
from ncspheres.presentations import load_presentation, parse_poly
from ncspheres.q_sympl import build_projection_q
from ncspheres.suites import complex_identities, cyclic_tasks
from ncspheres.theta_spheres import ThetaConfig, build_instanton
from ncspheres.utils.checks import FAILED, run_checks


def test_b_on_degree_one(su2):
    a, g = su2.gen('alpha'), su2.gen('gamma')
    expected = Chain.from_polys([a * g - g * a])
    assert (hochschild_b(Chain.from_polys([a, g])) - expected).is_zero()


def test_b_on_degree_zero(su2):
    with pytest.raises(DegreeZero):
        hochschild_b(Chain.from_polys([su2.gen('alpha')]))


def test_B_on_degree_zero(su2):
    a = su2.gen('alpha')
    assert (connes_B(Chain.from_polys([a])) - Chain.from_polys([su2.one(), a])).is_zero()


@pytest.mark.parametrize('averaged', [True, False])
def test_complex_identities(su2, averaged):
    rng = random.Random(7)
    for degree in (1, 2, 3):
        c = random_chain(su2, rng, degree)
        assert connes_B(connes_B(c, averaged), averaged).is_zero()
        if degree >= 2:
            assert hochschild_b(hochschild_b(c)).is_zero()


def test_universal_differential(su2):
    calc = UniversalCalculus(su2)
    a = calc.embed(parse_poly(su2, "alpha"))
    assert a.d().d().is_zero()
    assert calc.one().d().is_zero()


# ============================================================================
# CARACTERES DE CHERN
# ============================================================================

def _failed(results):
    return [(r.check_id, r.detail) for r in results if r.status == FAILED]


def test_chern_closure_theta(theta_cfg):
    report = closure_check(build_instanton(theta_cfg).p)
    assert report.closes
    assert set(report.residuals) == {1}


def test_chern_closure_q():
    _, p = build_projection_q()
    assert closure_check(p).closes


def test_complex_identities_on_s7_q():
    results = complex_identities(load_presentation('s7_q'), n_chains=30)
    assert _failed(results) == []


def test_cyclic_suite_has_no_failures():
    results = run_checks(cyclic_tasks(ThetaConfig.from_value('1/3'), random_chains=50),
                         'cyclic', progress=False)
    assert results
    assert _failed(results) == []
