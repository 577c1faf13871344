"""
============================================================================
MATRICES SOBRE ÁLGEBRAS NO CONMUTATIVAS - conexión de Grassmann
============================================================================

NCMatrix es genérica sobre las entradas: sirve para NCPoly (cálculo de
las esferas θ) y para formas universales (cálculo sobre S⁷_q). Las
entradas solo necesitan suma, producto, d(), star() e is_zero().

Conexión de Grassmann ∇₀ = p∘d sobre el módulo p·Aᴺ, curvatura
F₀ = p·dp·dp, identidad de Bianchi, estructura hermítica y
transformaciones gauge.
============================================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import NotAProjection, ShapeMismatch

logger = logging.getLogger(__name__)


class NCMatrix:

    __slots__ = ('algebra', 'rows')

    def __init__(self, algebra, rows):
        self.algebra = algebra
        self.rows = [list(r) for r in rows]
        width = {len(r) for r in self.rows}
        if len(width) > 1:
            raise ShapeMismatch("filas de distinta longitud")

    # ---- constructores ---------------------------------------------------

    @classmethod
    def identity(cls, algebra, n):
        return cls(algebra, [[algebra.one() if i == j else algebra.zero()
                              for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, algebra, n, m=None):
        m = n if m is None else m
        return cls(algebra, [[algebra.zero() for _ in range(m)] for _ in range(n)])

    @classmethod
    def from_scalars(cls, algebra, table):
        """Matriz constante a partir de una tabla de escalares (None = 0)"""
        return cls(algebra, [[algebra.zero() if x is None else algebra.const(x) for x in row]
                             for row in table])

    @classmethod
    def column(cls, algebra, entries):
        return cls(algebra, [[e] for e in entries])

    # ---- acceso ----------------------------------------------------------

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def col(self, j):
        return NCMatrix(self.algebra, [[r[j]] for r in self.rows])

    def entries(self):
        for i, row in enumerate(self.rows):
            for j, x in enumerate(row):
                yield i, j, x

    # ---- aritmética ------------------------------------------------------

    def _check_same_shape(self, other):
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} frente a {other.shape}")

    def __add__(self, other):
        self._check_same_shape(other)
        return NCMatrix(self.algebra, [[a + b for a, b in zip(r1, r2)]
                                       for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._check_same_shape(other)
        return NCMatrix(self.algebra, [[a - b for a, b in zip(r1, r2)]
                                       for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return NCMatrix(self.algebra, [[-a for a in r] for r in self.rows])

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __mul__(self, other):
        """A·x entrada a entrada (x escalar o elemento del álgebra)"""
        if isinstance(other, NCMatrix):
            return mat_mul(self, other)
        return NCMatrix(self.algebra, [[a * other for a in r] for r in self.rows])

    def __rmul__(self, other):
        return NCMatrix(self.algebra, [[other * a for a in r] for r in self.rows])

    def map(self, fn):
        return NCMatrix(self.algebra, [[fn(a) for a in r] for r in self.rows])

    def transpose(self):
        n, m = self.shape
        return NCMatrix(self.algebra, [[self.rows[i][j] for i in range(n)] for j in range(m)])

    def dagger(self):
        return dagger(self)

    def d(self):
        return mat_d(self)

    def trace(self):
        return trace(self)

    def is_zero(self):
        return all(x.is_zero() for _, _, x in self.entries())

    def __eq__(self, other):
        if not isinstance(other, NCMatrix) or self.shape != other.shape:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def nonzero_entries(self):
        return [(i, j, x) for i, j, x in self.entries() if not x.is_zero()]

    def to_json(self):
        return [[x.to_json() for x in r] for r in self.rows]

    def __repr__(self):
        return f"NCMatrix{self.shape}"


# ============================================================================
# OPERACIONES
# ============================================================================

def mat_mul(A: NCMatrix, B: NCMatrix) -> NCMatrix:
    n, k = A.shape
    k2, m = B.shape
    if k != k2:
        raise ShapeMismatch(f"no se pueden multiplicar {A.shape} y {B.shape}")
    algebra = A.algebra
    rows = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = algebra.zero()
            for t in range(k):
                a, b = A.rows[i][t], B.rows[t][j]
                if a.is_zero() or b.is_zero():
                    continue
                acc = acc + a * b
            row.append(acc)
        rows.append(row)
    return NCMatrix(algebra, rows)


def dagger(A: NCMatrix) -> NCMatrix:
    return A.transpose().map(lambda x: x.star())


def mat_d(A: NCMatrix) -> NCMatrix:
    return A.map(lambda x: x.d())


def trace(A: NCMatrix):
    n, m = A.shape
    if n != m:
        raise ShapeMismatch("traza de una matriz no cuadrada")
    acc = A.algebra.zero()
    for i in range(n):
        acc = acc + A.rows[i][i]
    return acc


def is_projection(p: NCMatrix) -> bool:
    return (p @ p - p).is_zero() and (dagger(p) - p).is_zero()


def grassmann_curvature(p: NCMatrix) -> NCMatrix:
    """F₀ = p·dp·dp, con p·F₀ = F₀·p = F₀"""
    if not is_projection(p):
        raise NotAProjection("p² = p = p† no se cumple")
    dp = mat_d(p)
    F0 = p @ dp @ dp
    if not ((p @ F0 - F0).is_zero() and (F0 @ p - F0).is_zero()):
        raise NotAProjection("la curvatura no está comprimida por p")
    return F0


@dataclass
class BianchiResult:
    holds: bool
    residuals: list

    def __bool__(self):
        return self.holds


def bianchi_check(p: NCMatrix, F0: NCMatrix | None = None) -> BianchiResult:
    """[∇₀, F₀] = 0 sobre las columnas ξ_j = p·e_j"""
    if F0 is None:
        F0 = grassmann_curvature(p)
    n = p.shape[0]
    residuals = []
    for j in range(n):
        xi = p.col(j)
        residual = p @ mat_d(F0 @ xi) - F0 @ p @ mat_d(xi)
        residuals.append(residual)
    holds = all(r.is_zero() for r in residuals)
    if not holds:
        logger.warning("⚠️  Bianchi: residuo no nulo")
    return BianchiResult(holds, residuals)


# ============================================================================
# ESTRUCTURA HERMÍTICA Y CONEXIONES GENERALES
# ============================================================================

class HermitianPairing:
    """⟨η, ξ⟩ = Σ_j star(η_j)·ξ_j sobre vectores columna"""

    def __init__(self, algebra):
        self.algebra = algebra

    def pair(self, eta: NCMatrix, xi: NCMatrix):
        if eta.shape != xi.shape or eta.shape[1] != 1:
            raise ShapeMismatch("el producto hermítico actúa sobre columnas del mismo tamaño")
        acc = self.algebra.zero()
        for (e,), (x,) in zip(eta.rows, xi.rows):
            acc = acc + e.star() * x
        return acc

    def right_linearity_defect(self, eta: NCMatrix, xi: NCMatrix, a):
        """⟨η·a, ξ⟩ − a*·⟨η, ξ⟩ (debe anularse)"""
        return self.pair(eta * a, xi) - a.star() * self.pair(eta, xi)


def connection_curvature(p: NCMatrix, alpha: NCMatrix) -> NCMatrix:
    """F = p·dp·dp + p·dα + α² para ∇ = p∘d + α"""
    dp = mat_d(p)
    return p @ dp @ dp + p @ mat_d(alpha) + alpha @ alpha


def hermitian_compatibility(alpha: NCMatrix) -> bool:
    """La conexión p∘d + α es compatible con ⟨,⟩ si α† = −α"""
    return (dagger(alpha) + alpha).is_zero()


def gauge_transform(p: NCMatrix, u: NCMatrix, alpha: NCMatrix) -> NCMatrix:
    """α ↦ α^u = u†·p·du + u†·α·u, para u unitaria con up = pu"""
    ud = dagger(u)
    return ud @ p @ mat_d(u) + ud @ alpha @ u


def gauge_covariance_check(p: NCMatrix, u: NCMatrix, alpha: NCMatrix) -> NCMatrix:
    """Residuo F(α^u) − u†F(α)u con F la curvatura de p∘d + α"""
    transformed = gauge_transform(p, u, alpha)
    return connection_curvature(p, transformed) - dagger(u) @ connection_curvature(p, alpha) @ u
