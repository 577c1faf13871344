import pytest

from ncspheres.errors import UnknownGenerator
from ncspheres.theta_spheres import ThetaConfig
from ncspheres.twisted_symmetry import (act7_reduction_check, bracket_check, conformal_variation,
                                        expected_bracket, make_generator,
                                        omega_invariance_check, relation_compatibility,
                                        so5_generators, so5_tasks, so51_generators, so51_tasks,
                                        twisted_context, variation_checks, variation_tasks)
from ncspheres.utils.checks import FAILED, OK, run_checks


def _failed(results):
    results = results if isinstance(results, list) else [results]
    return [(r.check_id, r.detail) for r in results if r.status == FAILED]


# ============================================================================
# GENERADORES
# ============================================================================

def test_generator_counts():
    assert len(so5_generators()) == 10
    assert len(so51_generators()) == 15


def test_conformal_generators():
    conformal = [g for g in so51_generators() if g.is_conformal]
    assert {g.kind for g in conformal} == {'H0', 'G'}
    assert len(conformal) == 5


def test_opposite_root():
    e = make_generator('E', (1, 1))
    assert e.name == 'E(+1,+1)'
    assert e.opposite().root == (-1, -1)
    assert e.is_positive and not e.opposite().is_positive


@pytest.mark.parametrize('kind, root', [('E', (2, 0)), ('G', (1, 1)), ('X', (1, 0))])
def test_unknown_generators(kind, root):
    with pytest.raises(UnknownGenerator):
        make_generator(kind, root)


# ============================================================================
# RAÍCES NEGATIVAS
# ============================================================================

@pytest.mark.parametrize('root', [(-1, 0), (0, -1), (-1, -1), (-1, 1)])
def test_negative_e_reduces_from_s7(theta_cfg, root):
    result = act7_reduction_check(make_generator('E', root), theta_cfg)
    assert result.status == OK, result.detail


def test_negative_e_spinor_lift_is_minus_adjoint():
    ctx = twisted_context(ThetaConfig.from_value('1/3'))
    e = make_generator('E', (1, 0))
    s4 = ctx.s4
    lifted = ctx.constant_spinor_matrix(e.opposite(), s4)
    positive = ctx.constant_spinor_matrix(e, s4)
    assert (lifted + positive.dagger()).is_zero()


@pytest.mark.parametrize('root', [(1, 0), (0, 1), (1, 1), (1, -1)])
def test_e_bracket_with_opposite_on_both_spheres(theta_cfg, root):
    e = make_generator('E', root)
    results = bracket_check(e.opposite(), e, theta_cfg)
    assert {r.check_id.rsplit('.', 1)[1] for r in results} == {'S4_theta', 'S7_theta'}
    assert _failed(results) == []


@pytest.mark.parametrize('root', [(-1, 0), (0, -1), (1, 0), (0, 1)])
def test_g_preserves_sphere_relations(theta_cfg, root):
    assert _failed(relation_compatibility(make_generator('G', root), theta_cfg)) == []


@pytest.mark.parametrize('root', [(-1, 0), (0, -1)])
def test_negative_g_reduces_from_s7(theta_cfg, root):
    result = act7_reduction_check(make_generator('G', root), theta_cfg)
    assert result.status == OK, result.detail


def test_g_bracket_keeps_displayed_sign_as_variant():
    expected = expected_bracket(make_generator('G', (-1, 0)), make_generator('G', (1, 0)))
    assert not expected.fitted
    assert expected.variant == [(-c, h) for c, h in expected.terms]


# ============================================================================
# INVARIANCIA Y SUITES
# ============================================================================

def test_omega_is_invariant(theta_cfg):
    assert _failed(omega_invariance_check(theta_cfg)) == []


def test_so5_suite_has_no_failures():
    cfg = ThetaConfig.from_value('1/3')
    results = run_checks(so5_tasks(cfg), 'so5', progress=False)
    assert results
    assert _failed(results) == []


def test_so51_suite_has_no_failures():
    cfg = ThetaConfig.from_value('1/3')
    results = run_checks(so51_tasks(cfg), 'so51', progress=False)
    assert results
    assert _failed(results) == []


# ============================================================================
# VARIACIONES CONFORMES
# ============================================================================

def test_variation_tasks_split_by_index():
    tasks = variation_tasks(ThetaConfig.from_value('1/3'))
    ids = [check_id for check_id, _ in tasks]
    assert len(ids) == 10
    assert len(set(ids)) == 10
    assert 'variations.checks[4]' in ids and 'variations.self_dual[0]' in ids


def test_dilation_variation_is_projected():
    cfg = ThetaConfig.from_value('0')
    var = conformal_variation(cfg, 0)
    assert var.generator.kind == 'H0'
    assert var.delta_F4.shape == (4, 4)
    results = {r.check_id: r for r in variation_checks(cfg, indices=(0,))}
    for name in ('delta_alpha_projected[0]', 'crucial[0]', 'row_phases[0]'):
        assert results[f"variations.{name}"].status != FAILED
