import pytest
import sympy

from ncspheres.errors import DerivationMismatch, NotAProjection
from ncspheres.ncalg import homomorphism
from ncspheres.ncmatrix import NCMatrix, dagger, grassmann_curvature, is_projection
from ncspheres.presentations import load_presentation, load_relations, parse_poly
from ncspheres.q_sympl import (FAMILIES, FRACTIONS, MODE, PSI_TEXT, Q_SYMBOL, T_PRIME_TEXT,
                               antipode_entry, build_projection_q, coaction_checks,
                               derive_sphere_relations, expr_to_scalar, hopf_quotient_checks,
                               in_span, overlap_checks, prime, projection_checks, qsympl_tasks,
                               r_matrix_checks, scalar_to_field, t_prime, tensor_equations,
                               universal_bianchi_check, verify_s4q_relations)
from ncspheres.scalars import Scalar
from ncspheres.utils.checks import FAILED, OK, _timed, run_checks

q = Scalar.unit(1, MODE)
qi = Scalar.unit(-1, MODE)


# ============================================================================
# MATRIZ R
# ============================================================================

def test_r_matrix_entries(R):
    assert R.entry(3, 3, 3, 3) == q
    assert R.entry(0, 1, 0, 1) == Scalar.one(MODE)
    assert R.entry(3, 0, 3, 0) == qi
    assert R.entry(0, 3, 0, 3) == qi
    assert R.entry(3, 0, 0, 3) == (q - qi) * (Scalar.one(MODE) + Scalar.unit(-4, MODE))


def test_r_matrix_upper_support(R):
    assert R.upper_support(3, 3) == [(3, 3)]
    assert R.upper_support(0, 0) == [(0, 0)]
    assert R.upper_support(3, 0) == [(3, 0)]


def test_metric_squares_to_minus_one(R):
    for i in range(4):
        j = prime(i)
        assert R.C[i][j] * R.C[j][i] == Scalar.const(-1, MODE)


def test_r_matrix_checks_pass(R):
    assert all(r.status == OK for r in r_matrix_checks(R))


# ============================================================================
# CONVERSIONES CON SYMPY
# ============================================================================

def test_expr_to_scalar_laurent():
    assert expr_to_scalar(Q_SYMBOL ** -2 + 3) == Scalar({-2: 1, 0: 3}, MODE)


def test_expr_to_scalar_rejects_non_monomial_denominator():
    with pytest.raises(DerivationMismatch):
        expr_to_scalar(1 / (1 + Q_SYMBOL))


def test_scalar_to_field_roundtrip_value():
    s = Scalar({-1: 2, 3: 1}, MODE)
    expected = 2 / Q_SYMBOL + Q_SYMBOL ** 3
    assert sympy.simplify(FRACTIONS.to_sympy(scalar_to_field(s)) - expected) == 0


# ============================================================================
# S⁷_q
# ============================================================================

def test_s7_commutation_from_text(qs):
    assert parse_poly(qs.s7, "x2 x1") == parse_poly(qs.s7, "q^-1 x1 x2")


def test_s7_sphere_relation(qs):
    assert parse_poly(qs.s7, "xb1 x1 + xb2 x2 + xb3 x3 + xb4 x4") == qs.s7.one()


def test_comxx_equations_contain_x2_x1(R, qs):
    candidate = {(qs.x(1), qs.x(0)): Scalar.one(MODE), (qs.x(0), qs.x(1)): -qi}
    assert in_span(tensor_equations(R, qs, 'comxx'), candidate)


def _psi(qs):
    return NCMatrix(qs.s7, [[parse_poly(qs.s7, text) for text in row] for row in PSI_TEXT])


def test_psi_is_isometry(qs):
    psi = _psi(qs)
    assert dagger(psi) @ psi == NCMatrix.identity(qs.s7, 2)


def test_projection_corner_entry(qs):
    p = _psi(qs) @ dagger(_psi(qs))
    assert p[0, 0] == qs.embed(parse_poly(qs.letters, "q^-2 t"))


def test_q_inversion_maps_first_sphere_relation_to_second(qs):
    letters = qs.letters
    relations = load_relations(letters)
    images = {
        letters.index('a'): parse_poly(letters, "q^2 ab"),
        letters.index('ab'): parse_poly(letters, "q^2 a"),
        letters.index('b'): parse_poly(letters, "q^-2 bb"),
        letters.index('bb'): parse_poly(letters, "q^-2 b"),
        letters.index('t'): parse_poly(letters, "q^-2 t"),
    }
    inverted = {w: c.substitute_inverse_unit() for w, c in relations['sr4.1'].items()}
    image = homomorphism(inverted, images, letters, source=letters)
    assert image == letters.poly(relations['sr4.2'])


# ============================================================================
# COCIENTE B_q
# ============================================================================

def test_t_prime_shape(b_q):
    Tp = t_prime(b_q)
    assert Tp[0, 0] == b_q.one()
    assert Tp[3, 3] == b_q.one()
    assert Tp[0, 3] == b_q.zero()
    assert len(T_PRIME_TEXT) == 4


def test_antipode_of_t_prime_is_inverse(b_q):
    Tp = t_prime(b_q)
    rows = []
    for i in range(4):
        row = []
        for j in range(4):
            coef, (r, c) = antipode_entry(i, j)
            row.append(Tp[r, c] * coef)
        rows.append(row)
    S = NCMatrix(b_q, rows)
    assert S @ Tp == NCMatrix.identity(b_q, 4)


def test_antipode_corner():
    coef, index = antipode_entry(0, 0)
    assert coef == Scalar.one(MODE)
    assert index == (3, 3)


# ============================================================================
# CONFLUENCIA Y PROYECCIÓN DE S⁷_q
# ============================================================================

def _failed(results):
    return [(r.check_id, r.detail) for r in results if r.status == FAILED]


def test_s7_q_overlaps_resolve():
    report = load_presentation('s7_q').check_overlaps()
    assert report.checked > 0
    assert report.resolved, report.ambiguities[:3]


def test_s7_q_ideal_leads_with_xb1_x1(qs):
    lead = (qs.v(0), qs.x(0))
    assert list(qs.s7.ideal_rules) == [lead]


@pytest.mark.parametrize('name', ['x1', 'x2', 'x3', 'x4', 'xb1', 'xb4'])
def test_sphere_element_is_central(qs, name):
    sphere = parse_poly(qs.quadratic, "xb1 x1 + xb2 x2 + xb3 x3 + xb4 x4")
    g = qs.quadratic.gen(name)
    assert sphere * g == g * sphere


def test_projection_q_is_projection():
    Psi, p = build_projection_q()
    assert Psi.shape == (4, 2)
    assert is_projection(p)


def test_projection_checks(qs):
    results = projection_checks(qs)
    assert 'qsympl.projection.pairing_linearity' in {r.check_id for r in results}
    assert _failed(results) == []


def test_not_a_projection_fails_one_task_only(R, qs):
    bad = NCMatrix.identity(qs.s7, 2) * 2
    with pytest.raises(NotAProjection):
        grassmann_curvature(bad)
    [result] = _timed("qsympl.bad", 'qsympl', lambda: grassmann_curvature(bad))
    assert result.status == FAILED
    results = run_checks([("qsympl.bad", lambda: grassmann_curvature(bad)),
                          ("qsympl.R", lambda: r_matrix_checks(R))],
                         'qsympl', max_workers=1, progress=False)
    assert [r.check_id for r in results if r.status == FAILED] == ["qsympl.bad"]
    assert len(results) > 1


# ============================================================================
# SUITE QSYMPL
# ============================================================================

def test_overlap_checks(qs):
    assert _failed(overlap_checks(qs)) == []


def test_derived_rules_match_presentation(R, qs):
    rules = derive_sphere_relations(R, qs)
    assert set(rules) == set(FAMILIES)
    assert all(rules[family] for family in FAMILIES)


def test_s4_q_relations_hold(qs):
    assert _failed(verify_s4q_relations(qs)) == []


def test_hopf_quotient(R, qs):
    assert _failed(hopf_quotient_checks(qs, R)) == []


def test_coaction(qs):
    assert _failed(coaction_checks(qs)) == []


def test_universal_bianchi_covers_every_column():
    [result] = universal_bianchi_check()
    assert result.status == OK
    assert result.detail == "4 columnas"


def test_qsympl_suite_has_no_failures():
    results = run_checks(qsympl_tasks(), 'qsympl', progress=False)
    assert results
    assert _failed(results) == []
