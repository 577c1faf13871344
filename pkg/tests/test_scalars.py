import pytest
from sympy.polys.domains import QQ

from ncspheres.errors import NonUnimodular, UnitModeMismatch, ZeroUnit
from ncspheres.scalars import (FIELD_I, FIELD_SQRT2, FieldElem, Scalar, UnitMode,
                               parse_rational)


def test_field_units():
    assert FIELD_I * FIELD_I == FieldElem(-1)
    assert FIELD_SQRT2 * FIELD_SQRT2 == FieldElem(2)
    x = FieldElem(1, 1, 1, 0)
    assert x * x.inverse() == FieldElem(1)


def test_field_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        FieldElem().inverse()


def test_laurent_products():
    u = Scalar.unit(1)
    assert u * u.inverse() == Scalar.one()
    assert Scalar.unit(2) * Scalar.unit(-2) == 1
    assert (u + 1) * (u - 1) == Scalar.unit(2) - 1


def test_only_monomials_are_invertible():
    with pytest.raises(ZeroDivisionError):
        (Scalar.unit(1) + 1).inverse()


def test_star_depends_on_mode():
    assert Scalar.unit(1, UnitMode.PHASE).star() == Scalar.unit(-1, UnitMode.PHASE)
    assert Scalar.unit(1, UnitMode.REAL).star() == Scalar.unit(1, UnitMode.REAL)
    i = Scalar.const(FIELD_I, UnitMode.REAL)
    assert i.star() == -i


def test_substitute_inverse_unit():
    q = Scalar.unit(1, UnitMode.REAL)
    assert (q * 3 + Scalar.unit(-2, UnitMode.REAL)).substitute_inverse_unit() == \
        Scalar.unit(-1, UnitMode.REAL) * 3 + Scalar.unit(2, UnitMode.REAL)


def test_modes_do_not_mix():
    with pytest.raises(UnitModeMismatch):
        Scalar.unit(1, UnitMode.PHASE) + Scalar.unit(1, UnitMode.REAL)


def test_eval():
    assert Scalar.unit(2, UnitMode.REAL).eval(0.5) == pytest.approx(0.25)
    with pytest.raises(ZeroUnit):
        Scalar.unit(1).eval(0)
    with pytest.raises(NonUnimodular):
        Scalar.unit(1, UnitMode.PHASE).eval(2.0)


def test_parse_rational():
    assert parse_rational('3/6') == QQ(1, 2)
    assert parse_rational(-2) == QQ(-2)
    with pytest.raises(ValueError):
        parse_rational('0.5')
