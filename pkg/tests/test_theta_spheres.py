import pytest
from sympy.polys.domains import QQ

from ncspheres.cyclic import Chain, chern_character
from ncspheres.errors import BadParameter
from ncspheres.ncmatrix import (NCMatrix, bianchi_check, connection_curvature, dagger,
                                gauge_covariance_check, gauge_transform, grassmann_curvature,
                                hermitian_compatibility, is_projection)
from ncspheres.theta_spheres import (ThetaConfig, build_instanton, build_theta_spheres,
                                     dirac_matrices, hodge_checks, instanton_checks,
                                     projection_matrix, su2_exact_matrix, theta_tasks,
                                     verify_clifford)
from ncspheres.utils.checks import FAILED, run_checks


def _failed(results):
    return [(r.check_id, r.detail) for r in results if r.status == FAILED]


def test_theta_must_be_rational():
    with pytest.raises(BadParameter):
        ThetaConfig.from_value('0.25')
    with pytest.raises(BadParameter):
        ThetaConfig.from_value('abc')


def test_classical_flag():
    assert ThetaConfig.from_value('0').classical
    assert not ThetaConfig.from_value('1/3').classical


def test_projection_is_idempotent(theta_cfg):
    s4, _ = build_theta_spheres(theta_cfg)
    p = projection_matrix(s4, theta_cfg)
    assert is_projection(p)


def test_projection_entries(theta_cfg):
    s4, _ = build_theta_spheres(theta_cfg)
    p = projection_matrix(s4, theta_cfg)
    assert p[0, 2] == s4.gen('z1') * QQ(1, 2)
    assert p[0, 1].is_zero()
    assert p[0, 0] == (s4.one() + s4.gen('z0')) * QQ(1, 2)


def test_rank_is_two(theta_cfg):
    s4, _ = build_theta_spheres(theta_cfg)
    p = projection_matrix(s4, theta_cfg)
    assert (chern_character(p, 0) - Chain.from_polys([s4.const(2)])).is_zero()


def test_gamma0_is_diagonal(theta_cfg):
    s4, _ = build_theta_spheres(theta_cfg)
    gammas = dirac_matrices(theta_cfg, s4)
    g0 = gammas['gamma0']
    assert dagger(g0) == g0
    assert g0 @ g0 == NCMatrix.identity(s4, 4)


# ============================================================================
# CONEXIÓN DE GRASSMANN
# ============================================================================

def test_bianchi_identity(theta_cfg):
    s4, _ = build_theta_spheres(theta_cfg)
    p = projection_matrix(s4, theta_cfg)
    result = bianchi_check(p)
    assert result
    assert len(result.residuals) == 4


def test_grassmann_connection_curvature(theta_cfg):
    s4, _ = build_theta_spheres(theta_cfg)
    p = projection_matrix(s4, theta_cfg)
    zero = NCMatrix.zeros(s4, 4)
    assert connection_curvature(p, zero) == grassmann_curvature(p)


def test_omega_is_hermitian_connection(theta_cfg):
    data = build_instanton(theta_cfg)
    assert hermitian_compatibility(data.omega)
    assert not hermitian_compatibility(NCMatrix.identity(data.s7, 2))


def test_constant_gauge_transform(theta_cfg):
    data = build_instanton(theta_cfg)
    u = su2_exact_matrix(data.s7)
    trivial = NCMatrix.identity(data.s7, 2)
    transformed = gauge_transform(trivial, u, data.omega)
    assert transformed == dagger(u) @ data.omega @ u
    assert gauge_covariance_check(trivial, u, data.omega).is_zero()


# ============================================================================
# SUITE THETA
# ============================================================================

def test_clifford_checks(theta_cfg):
    assert _failed(verify_clifford(theta_cfg)) == []


def test_instanton_checks(theta_cfg):
    results = instanton_checks(theta_cfg)
    ids = {r.check_id for r in results}
    assert {'theta.instanton.bianchi', 'theta.instanton.gauge_covariance'} <= ids
    assert _failed(results) == []


def test_hodge_checks(theta_cfg):
    assert _failed(hodge_checks(theta_cfg)) == []


def test_theta_suite_has_no_failures():
    cfg = ThetaConfig.from_value('1/3')
    results = run_checks(theta_tasks(cfg), 'theta', progress=False)
    assert results
    assert _failed(results) == []
