"""
============================================================================
ESCALARES EXACTOS - ℚ(i,√2) ⊗ polinomios de Laurent en una unidad formal
============================================================================

Los coeficientes de todas las álgebras del paquete viven aquí:

- FieldElem: a + b·i + c·√2 + d·i√2 con a, b, c, d racionales exactos
- Scalar: Σ_k c_k u^k con c_k ∈ ℚ(i,√2)
- UnitMode: PHASE (u* = u⁻¹, para μ = e^{iπθ}) o REAL (u* = u, para q)

En la familia θ la unidad es μ y λ = μ²; en la familia q la unidad es q.
============================================================================
"""

from __future__ import annotations

import cmath
import math
from enum import Enum
from fractions import Fraction

from sympy.polys.domains import QQ

from .errors import NonUnimodular, UnitModeMismatch, ZeroUnit

SQRT2_FLOAT = math.sqrt(2.0)
UNIMODULAR_TOL = 1e-12


def parse_rational(value):
    """Convierte int, Fraction, QQ o una cadena 'p/q' en un racional de QQ"""
    if isinstance(value, str):
        text = value.strip()
        if '/' in text:
            num, den = text.split('/', 1)
            return QQ(int(num), int(den))
        return QQ(int(text))
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, QQ.dtype):
        return value
    raise TypeError(f"no es un racional exacto: {value!r}")


class UnitMode(Enum):
    PHASE = 'phase'
    REAL = 'real'


class FieldElem:
    """Elemento de ℚ(i,√2) sobre la base {1, i, √2, i√2}"""

    __slots__ = ('_c',)

    def __init__(self, a=0, b=0, c=0, d=0):
        self._c = (parse_rational(a), parse_rational(b),
                   parse_rational(c), parse_rational(d))

    @classmethod
    def _raw(cls, coeffs):
        obj = cls.__new__(cls)
        obj._c = coeffs
        return obj

    @property
    def coeffs(self):
        return self._c

    def is_zero(self):
        return not any(self._c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = FieldElem(other)
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def __add__(self, other):
        if isinstance(other, int):
            other = FieldElem(other)
        a, b, c, d = self._c
        e, f, g, h = other._c
        return FieldElem._raw((a + e, b + f, c + g, d + h))

    __radd__ = __add__

    def __neg__(self):
        a, b, c, d = self._c
        return FieldElem._raw((-a, -b, -c, -d))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            other = FieldElem(other)
        elif isinstance(other, QQ.dtype):
            a, b, c, d = self._c
            return FieldElem._raw((a * other, b * other, c * other, d * other))
        a, b, c, d = self._c
        e, f, g, h = other._c
        # i² = -1, (√2)² = 2
        return FieldElem._raw((
            a * e - b * f + 2 * c * g - 2 * d * h,
            a * f + b * e + 2 * c * h + 2 * d * g,
            a * g + c * e - b * h - d * f,
            a * h + d * e + b * g + c * f,
        ))

    __rmul__ = __mul__

    def conjugate(self):
        a, b, c, d = self._c
        return FieldElem._raw((a, -b, c, -d))

    def sqrt2_conjugate(self):
        a, b, c, d = self._c
        return FieldElem._raw((a, b, -c, -d))

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverso de cero en ℚ(i,√2)")
        # x·x̄ ∈ ℚ(√2); luego se racionaliza el √2
        y = self * self.conjugate()
        z = y * y.sqrt2_conjugate()
        norm = z._c[0]
        return (self.conjugate() * y.sqrt2_conjugate()) * (1 / norm)

    def to_complex(self):
        a, b, c, d = (float(x) for x in self._c)
        return complex(a + c * SQRT2_FLOAT, b + d * SQRT2_FLOAT)

    def to_json(self):
        return [str(x) for x in self._c]

    def __repr__(self):
        return f"FieldElem{tuple(str(x) for x in self._c)}"

    def __str__(self):
        parts = []
        for coef, label in zip(self._c, ('', 'i', '√2', 'i√2')):
            if coef:
                if label and coef == 1:
                    parts.append(label)
                elif label and coef == -1:
                    parts.append('-' + label)
                else:
                    parts.append(f"{coef}{label}")
        return '+'.join(parts).replace('+-', '-') if parts else '0'


FIELD_ZERO = FieldElem()
FIELD_ONE = FieldElem(1)
FIELD_I = FieldElem(0, 1)
FIELD_SQRT2 = FieldElem(0, 0, 1)


class Scalar:
    """
    Polinomio de Laurent Σ c_k u^k con coeficientes en ℚ(i,√2).

    Inmutable, forma canónica sin coeficientes nulos; la igualdad es
    estructural.
    """

    __slots__ = ('_terms', 'mode', '_hash')

    def __init__(self, terms=None, mode=UnitMode.PHASE):
        clean = {}
        for exp, coef in (terms or {}).items():
            if not isinstance(coef, FieldElem):
                coef = FieldElem(coef)
            if not coef.is_zero():
                clean[int(exp)] = coef
        self._terms = tuple(sorted(clean.items()))
        self.mode = mode
        self._hash = None

    # ---- constructores ---------------------------------------------------

    @classmethod
    def zero(cls, mode=UnitMode.PHASE):
        return cls({}, mode)

    @classmethod
    def one(cls, mode=UnitMode.PHASE):
        return cls({0: FIELD_ONE}, mode)

    @classmethod
    def const(cls, value, mode=UnitMode.PHASE):
        if isinstance(value, FieldElem):
            return cls({0: value}, mode)
        return cls({0: FieldElem(value)}, mode)

    @classmethod
    def unit(cls, k=1, mode=UnitMode.PHASE):
        return cls({k: FIELD_ONE}, mode)

    @classmethod
    def parse(cls, text, mode=UnitMode.PHASE):
        """Literal racional 'p/q' (el resto de literales los lee presentations)"""
        return cls.const(parse_rational(text), mode)

    # ---- acceso ----------------------------------------------------------

    @property
    def terms(self):
        return dict(self._terms)

    def is_zero(self):
        return not self._terms

    def is_monomial(self):
        return len(self._terms) == 1

    def constant_term(self):
        for exp, coef in self._terms:
            if exp == 0:
                return coef
        return FIELD_ZERO

    def exponents(self):
        return [exp for exp, _ in self._terms]

    # ---- aritmética ------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.mode is not self.mode:
                raise UnitModeMismatch(f"{self.mode.value} frente a {other.mode.value}")
            return other
        if isinstance(other, (int, FieldElem)) or isinstance(other, QQ.dtype):
            return Scalar.const(other, self.mode)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc = dict(self._terms)
        for exp, coef in other._terms:
            acc[exp] = acc[exp] + coef if exp in acc else coef
        return Scalar(acc, self.mode)

    __radd__ = __add__

    def __neg__(self):
        return Scalar({exp: -coef for exp, coef in self._terms}, self.mode)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                exp = e1 + e2
                prod = c1 * c2
                acc[exp] = acc[exp] + prod if exp in acc else prod
        return Scalar(acc, self.mode)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = Scalar.one(self.mode)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self):
        """Inverso de un monomio c·u^k (los demás no son invertibles aquí)"""
        if not self.is_monomial():
            raise ZeroDivisionError(f"{self} no es invertible como polinomio de Laurent")
        exp, coef = self._terms[0]
        return Scalar({-exp: coef.inverse()}, self.mode)

    def star(self):
        if self.mode is UnitMode.PHASE:
            return Scalar({-exp: coef.conjugate() for exp, coef in self._terms}, self.mode)
        return Scalar({exp: coef.conjugate() for exp, coef in self._terms}, self.mode)

    def substitute_inverse_unit(self):
        """u ↦ u⁻¹ (simetría q ↦ q⁻¹)"""
        return Scalar({-exp: coef for exp, coef in self._terms}, self.mode)

    def eval(self, u0):
        u0 = complex(u0)
        if u0 == 0:
            raise ZeroUnit("la unidad formal no puede evaluarse en 0")
        if self.mode is UnitMode.PHASE and abs(abs(u0) - 1.0) > UNIMODULAR_TOL:
            raise NonUnimodular(f"|u0| = {abs(u0)} en modo de fase")
        return sum((coef.to_complex() * u0 ** exp for exp, coef in self._terms), 0j)

    # ---- comparación y salida --------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.mode is other.mode and self._terms == other._terms
        if isinstance(other, (int, FieldElem)):
            return self._terms == Scalar.const(other, self.mode)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.mode, self._terms))
        return self._hash

    def to_json(self):
        return [[exp, coef.to_json()] for exp, coef in self._terms]

    def __repr__(self):
        return f"Scalar({self}, {self.mode.value})"

    def __str__(self):
        if not self._terms:
            return '0'
        symbol = 'u' if self.mode is UnitMode.PHASE else 'q'
        out = []
        for exp, coef in self._terms:
            if exp == 0:
                out.append(f"({coef})")
            else:
                out.append(f"({coef}){symbol}^{exp}")
        return ' + '.join(out)


# ============================================================================
# OPERACIONES
# ============================================================================

def scalar_mul(a: Scalar, b: Scalar) -> Scalar:
    return a * b


def scalar_star(a: Scalar) -> Scalar:
    return a.star()


def scalar_eval(a: Scalar, u0) -> complex:
    return a.eval(u0)


def phase_unit_value(theta) -> complex:
    """Valor numérico de μ = e^{iπθ}"""
    return cmath.exp(1j * math.pi * float(parse_rational(theta)))
