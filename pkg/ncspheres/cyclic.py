"""
============================================================================
COMPLEJO DE HOCHSCHILD Y CÍCLICO - operadores b, B y carácter de Chern
============================================================================

Cadenas a₀⊗a₁⊗…⊗aₙ sobre un álgebra presentada por un RewriteSystem.
Cada ranura se expande en la base de palabras normales, de modo que una
cadena es una combinación lineal de tuplas de palabras.

Las cadenas de este módulo viven en el complejo normalizado: las ranuras
≥ 1 se toman módulo escalares (se descartan las tuplas con la palabra
vacía en una ranura ≥ 1). B = B₀N es nilpotente allí.

UniversalForm realiza el cálculo diferencial universal Ω_u ⊂ A^{⊗(n+1)}
sin normalizar, y es la que usa la conexión de Grassmann del lado q.
============================================================================
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from itertools import product

from sympy.polys.domains import QQ

from .errors import DegreeZero
from .ncalg import NCPoly, add_into
from .scalars import Scalar

logger = logging.getLogger(__name__)


def _merge(system, w1, w2):
    """Forma normal del producto de dos palabras normales"""
    return system.normal_form_raw({w1 + w2: Scalar.one(system.unit_mode)})


def _expand_slots(system, polys):
    """Expansión multilineal de a₀⊗…⊗aₙ en tuplas de palabras"""
    out = {}
    tuples = [list(p.terms.items()) for p in polys]
    for combo in product(*tuples):
        coef = Scalar.one(system.unit_mode)
        for _, c in combo:
            coef = coef * c
        add_into(out, tuple(w for w, _ in combo), coef)
    return out


# ============================================================================
# CADENAS
# ============================================================================

class Chain:

    __slots__ = ('system', 'terms')

    def __init__(self, system, terms):
        self.system = system
        self.terms = {}
        for slots, coef in terms.items():
            if any(not w for w in slots[1:]):
                continue
            add_into(self.terms, tuple(slots), coef)

    @classmethod
    def from_polys(cls, polys, coef=None):
        system = polys[0].system
        terms = _expand_slots(system, polys)
        if coef is not None:
            terms = {k: v * coef for k, v in terms.items()}
        return cls(system, terms)

    @classmethod
    def zero(cls, system):
        return cls(system, {})

    @property
    def degrees(self):
        return {len(slots) - 1 for slots in self.terms}

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for slots, coef in other.terms.items():
            add_into(out, slots, coef)
        return Chain(self.system, out)

    def __neg__(self):
        return Chain(self.system, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scale):
        if not isinstance(scale, Scalar):
            scale = self.system.scalar(scale)
        out = {}
        for slots, coef in self.terms.items():
            add_into(out, slots, coef * scale)
        return Chain(self.system, out)

    __rmul__ = __mul__

    def to_poly(self):
        """Cadena de grado 0 como elemento del álgebra"""
        if self.terms and self.degrees != {0}:
            raise ValueError("solo las cadenas de grado 0 son elementos del álgebra")
        return NCPoly(self.system, {slots[0]: c for slots, c in self.terms.items()},
                      normalized=True)

    def to_json(self):
        fmt = self.system.format_word
        return [[[fmt(w) for w in slots], c.to_json()] for slots, c in sorted(
            self.terms.items(), key=lambda t: (len(t[0]), t[0]))]

    def __repr__(self):
        return f"Chain({len(self.terms)} términos, grados {sorted(self.degrees)})"


def random_chain(system, rng: random.Random, degree, n_terms=3, max_len=2):
    """Cadena aleatoria con palabras normales en cada ranura"""
    total = Chain.zero(system)
    for _ in range(n_terms):
        slots = [system.random_poly(rng, max_terms=2, max_len=max_len, functions_only=True)
                 for _ in range(degree + 1)]
        if any(s.is_zero() for s in slots):
            continue
        total = total + Chain.from_polys(slots)
    return total


# ============================================================================
# OPERADORES
# ============================================================================

def hochschild_b(c: Chain) -> Chain:
    system = c.system
    out = {}
    for slots, coef in c.terms.items():
        n = len(slots) - 1
        if n < 1:
            raise DegreeZero("b no está definido en grado 0")
        for j in range(n):
            sign = coef if j % 2 == 0 else -coef
            for w, c2 in _merge(system, slots[j], slots[j + 1]).items():
                add_into(out, slots[:j] + (w,) + slots[j + 2:], sign * c2)
        sign = coef if n % 2 == 0 else -coef
        for w, c2 in _merge(system, slots[n], slots[0]).items():
            add_into(out, (w,) + slots[1:n], sign * c2)
    return Chain(system, out)


def cyclic_average(c: Chain, averaged=True) -> Chain:
    """N(a₀⊗…⊗aₙ) = (1/(n+1)) Σ_j (−1)^{nj} a_j⊗…⊗a_{j−1}"""
    out = {}
    for slots, coef in c.terms.items():
        n = len(slots) - 1
        scale = coef * QQ(1, n + 1) if averaged else coef
        for j in range(n + 1):
            sign = -scale if (n * j) % 2 else scale
            add_into(out, slots[j:] + slots[:j], sign)
    return Chain(c.system, out)


def connes_B(c: Chain, averaged=True) -> Chain:
    """B = B₀N; B₀ antepone la unidad"""
    averaged_chain = cyclic_average(c, averaged)
    return Chain(c.system, {((),) + slots: coef for slots, coef in averaged_chain.terms.items()})


def chern_character(p, k: int) -> Chain:
    """ch₀(p) = tr(p); ch_k(p) = (−1)^k (2k)!/k! Σ (p − ½)_{i₀i₁}⊗p_{i₁i₂}⊗…⊗p_{i₂ₖi₀}"""
    system = p.algebra
    n = p.shape[0]
    if k == 0:
        tr = system.zero()
        for i in range(n):
            tr = tr + p[i, i]
        return Chain.from_polys([tr])
    if k > 2:
        raise ValueError("ch_k solo se calcula para k ≤ 2")
    half = system.const(QQ(1, 2))
    first = [[p[i, j] - half if i == j else p[i, j] for j in range(n)] for i in range(n)]
    coef = system.scalar((-1) ** k * math.factorial(2 * k) // math.factorial(k))
    total = {}
    for idx in product(range(n), repeat=2 * k + 1):
        slots = [first[idx[0]][idx[1]]]
        for a in range(1, 2 * k + 1):
            slots.append(p[idx[a], idx[(a + 1) % (2 * k + 1)]])
        if any(s.is_zero() for s in slots):
            continue
        for tup, c in _expand_slots(system, slots).items():
            add_into(total, tup, c * coef)
    return Chain(system, total)


@dataclass
class ClosureReport:
    residuals: dict = field(default_factory=dict)

    @property
    def closing_conventions(self):
        """Convenciones de N bajo las que todos los órdenes calculados cierran"""
        names = ('averaged', 'plain_sum')
        return [name for name in names
                if all(res[name].is_zero() for res in self.residuals.values())]

    @property
    def closes(self):
        return bool(self.closing_conventions)


def closure_check(p, include_ch2=False) -> ClosureReport:
    """(b + B)ch_* = 0 orden a orden: b ch_k + B ch_{k−1}"""
    report = ClosureReport()
    chs = [chern_character(p, 0), chern_character(p, 1)]
    if include_ch2:
        chs.append(chern_character(p, 2))
    for k in range(1, len(chs)):
        b_part = hochschild_b(chs[k])
        report.residuals[k] = {
            'averaged': b_part + connes_B(chs[k - 1], averaged=True),
            'plain_sum': b_part + connes_B(chs[k - 1], averaged=False),
        }
    logger.info(f"🔁 Cierre (b+B)ch: convenciones válidas {report.closing_conventions}")
    return report


# ============================================================================
# CÁLCULO DIFERENCIAL UNIVERSAL
# ============================================================================

class UniversalForm:
    """Elemento de Ω_u(A) ⊂ ⊕ A^{⊗(n+1)}: da = 1⊗a − a⊗1"""

    __slots__ = ('system', 'terms')

    def __init__(self, system, terms):
        self.system = system
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}

    def __add__(self, other):
        out = dict(self.terms)
        for slots, coef in other.terms.items():
            add_into(out, slots, coef)
        return UniversalForm(self.system, out)

    def __neg__(self):
        return UniversalForm(self.system, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, UniversalForm):
            out = {}
            for s1, c1 in self.terms.items():
                for s2, c2 in other.terms.items():
                    for w, c in _merge(self.system, s1[-1], s2[0]).items():
                        add_into(out, s1[:-1] + (w,) + s2[1:], c1 * c2 * c)
            return UniversalForm(self.system, out)
        scale = other if isinstance(other, Scalar) else self.system.scalar(other)
        return UniversalForm(self.system, {k: v * scale for k, v in self.terms.items()})

    def __rmul__(self, other):
        return self * other

    def d(self):
        out = {}
        for slots, coef in self.terms.items():
            for i in range(len(slots) + 1):
                add_into(out, slots[:i] + ((),) + slots[i:], coef if i % 2 == 0 else -coef)
        return UniversalForm(self.system, out)

    def star(self):
        system = self.system
        one = Scalar.one(system.unit_mode)
        out = {}
        for slots, coef in self.terms.items():
            n = len(slots) - 1
            sign = -1 if (n * (n + 1) // 2) % 2 else 1
            starred = [system.normal_form_raw(system.star_raw({w: one})) for w in reversed(slots)]
            base = {(): coef.star() * sign}
            for slot in starred:
                base = {k + (w,): c * c2 for k, c in base.items() for w, c2 in slot.items()}
            for k, c in base.items():
                add_into(out, k, c)
        return UniversalForm(system, out)

    def is_zero(self):
        return not self.terms

    def to_json(self):
        fmt = self.system.format_word
        return [[[fmt(w) for w in slots], c.to_json()] for slots, c in self.terms.items()]


class UniversalCalculus:
    """Fábrica de formas universales sobre un álgebra (interfaz de NCMatrix)"""

    def __init__(self, system):
        self.system = system

    def zero(self):
        return UniversalForm(self.system, {})

    def one(self):
        return UniversalForm(self.system, {((),): Scalar.one(self.system.unit_mode)})

    def const(self, value):
        return self.one() * self.system.scalar(value)

    def embed(self, poly: NCPoly) -> UniversalForm:
        return UniversalForm(self.system, {(w,): c for w, c in poly.terms.items()})
