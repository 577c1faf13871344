import numpy as np
import pytest
from sympy.polys.domains import QQ

from ncspheres.errors import BadParameter, UnknownLetter
from ncspheres.presentations import parse_poly
from ncspheres.qrep import (adjointness_check, build_sigma, closed_form_trace, index_pairing,
                            norm_check, pairing_summary, partial_trace_t, rank_pairing,
                            recursion_check, represent, trace_t)
from ncspheres.utils.checks import OK


def test_t_on_vacuum(sigma_half):
    assert sigma_half['t'].diagonal()[0] == pytest.approx(1 / 16)


def test_a_kills_vacuum(sigma_half):
    assert sigma_half['a'].matrix[:, 0].nnz == 0


def test_abar_raises_vacuum(sigma_half):
    N = sigma_half.cutoff
    value = sigma_half['ab'].matrix[N, 0]
    assert value == pytest.approx(np.sqrt(0.75) * 0.5)


def test_closed_form_limit_is_exact():
    assert closed_form_trace(QQ(1, 2)).limit == QQ(4, 45)


def test_truncated_trace_matches_closed_form(sigma_half):
    report = closed_form_trace(QQ(1, 2), sigma_half.cutoff)
    expected = float(report.truncated.numerator) / float(report.truncated.denominator)
    assert trace_t(sigma_half) == pytest.approx(expected, rel=1e-12)
    assert partial_trace_t(QQ(1, 2), sigma_half.cutoff) == pytest.approx(expected, rel=1e-12)


def test_index_pairing_is_minus_one(sigma_half):
    assert abs(index_pairing(sigma_half) + 1.0) < 1e-10


def test_rank_pairing():
    assert rank_pairing() == 2


@pytest.mark.parametrize('q', ['1/3', 0.9])
def test_index_pairing_other_q(q):
    rep = build_sigma(q, 60 if q == '1/3' else 400)
    assert abs(index_pairing(rep) + 1.0) < 1e-8


def test_sigma_structure(sigma_half):
    results = adjointness_check(sigma_half) + norm_check(sigma_half)
    assert all(r.status == OK for r in results)
    assert all(r.status == OK for r in recursion_check(QQ(1, 2), 20))


@pytest.mark.parametrize('q, N', [(1, 40), ('3/2', 40), ('1/2', 3), ('1/2', 4.5)])
def test_bad_parameters(q, N):
    with pytest.raises(BadParameter):
        build_sigma(q, N)


def test_represent_rejects_foreign_letters(qs, sigma_half):
    with pytest.raises(UnknownLetter):
        represent(sigma_half, parse_poly(qs.s7, "x1 xb1"))


def test_pairing_summary():
    summary = pairing_summary(QQ(1, 2), 40)
    assert summary['rank'] == 2
    assert summary['pairing'] == pytest.approx(-1.0, abs=1e-10)
    assert summary['trace_limit'] == pytest.approx(4 / 45)
