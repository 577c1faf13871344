"""
============================================================================
ÁLGEBRA LIBRE CON REESCRITURA - formas normales, solapamientos y cálculo
============================================================================

Álgebra *-libre graduada sobre generadores ordenados, con reglas de
reescritura hacia una forma normal (lema del diamante), reglas de ideal
para las relaciones esféricas y la diferencial exterior.

Orden de palabras: grado-lexicográfico inducido por los índices de los
generadores. Los generadores de grado 0 preceden a los de grado 1, de
modo que en forma normal las funciones quedan a la izquierda.
============================================================================
"""

from __future__ import annotations

import logging
import random
import threading
from dataclasses import dataclass, field
from typing import Dict, Tuple

from sympy.polys.domains import QQ

from .errors import (InvalidRule, MissingFormGenerator, NonIntegralPhase,
                     StepBudgetExceeded, UnknownGenerator)
from .scalars import FieldElem, Scalar, UnitMode, parse_rational

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
RawPoly = Dict[Word, Scalar]

DEFAULT_STEP_BUDGET = 10 ** 6


# ============================================================================
# TIPOS BÁSICOS
# ============================================================================

@dataclass(frozen=True)
class Generator:
    name: str
    index: int
    degree: int
    weight: tuple
    star_partner: int
    d_partner: int | None = None
    cartan: tuple | None = None

    @property
    def is_self_adjoint(self):
        return self.star_partner == self.index


@dataclass(frozen=True)
class RewriteRule:
    lhs: Word
    rhs: tuple  # pares (palabra, Scalar)


def word_key(word):
    return (len(word), word)


def add_into(acc, word, coef):
    """acc[word] += coef, eliminando ceros"""
    if word in acc:
        total = acc[word] + coef
        if total.is_zero():
            del acc[word]
        else:
            acc[word] = total
    elif not coef.is_zero():
        acc[word] = coef


def raw_add(a, b, scale=None):
    out = dict(a)
    for word, coef in b.items():
        add_into(out, word, coef if scale is None else coef * scale)
    return out


def raw_mul(a, b):
    out = {}
    for w1, c1 in a.items():
        for w2, c2 in b.items():
            add_into(out, w1 + w2, c1 * c2)
    return out


def raw_scale(a, scale):
    out = {}
    for word, coef in a.items():
        add_into(out, word, coef * scale)
    return out


# ============================================================================
# FASE DE DEFORMACIÓN
# ============================================================================

def deformation_phase(r, r_prime, theta_matrix, mode=UnitMode.PHASE, classical=False):
    """
    Fase e^{2πi r·Θ·r′} = μ^k como potencia de la unidad formal μ.

    Θ se expresa en unidades de θ; k = 2·r·Θ·r′ debe ser entero.
    """
    value = QQ(0)
    for a in range(2):
        for b in range(2):
            value += parse_rational(r[a]) * parse_rational(theta_matrix[a][b]) \
                * parse_rational(r_prime[b])
    k = 2 * value
    if k.denominator != 1:
        raise NonIntegralPhase(f"r·Θ·r′ = {value}θ no es múltiplo semientero de θ")
    if classical:
        return Scalar.one(mode)
    return Scalar.unit(int(k.numerator), mode)


def graded_phase_rules(generators, theta_matrix, mode=UnitMode.PHASE, classical=False):
    """
    Reglas de cuasi-conmutación y·x → (−1)^{dd′} λ(r_y, r_x) x·y para x < y,
    y x·x → 0 para generadores impares.
    """
    rules = {}
    for y in generators:
        for x in generators:
            if x.index > y.index:
                continue
            if x.index == y.index:
                if x.degree % 2 == 1:
                    rules[(x.index, x.index)] = {}
                continue
            phase = deformation_phase(y.weight, x.weight, theta_matrix, mode, classical)
            if x.degree % 2 == 1 and y.degree % 2 == 1:
                phase = -phase
            rules[(y.index, x.index)] = {(x.index, y.index): phase}
    return rules


# ============================================================================
# SISTEMA DE REESCRITURA
# ============================================================================

@dataclass
class OverlapReport:
    system: str
    checked: int = 0
    ambiguities: list = field(default_factory=list)

    @property
    def resolved(self):
        return not self.ambiguities


class RewriteSystem:
    """
    Presentación de un álgebra: generadores, reglas y reglas de ideal.

    Las reglas no cambian tras la construcción. Las formas normales de
    palabras se memorizan en dos tablas internas (_cache, _successors) que
    solo se escriben con _lock tomado: varias tareas de run_checks
    comparten el mismo sistema.
    """

    def __init__(self, name, generators, rules=None, ideal_rules=None,
                 unit_mode=UnitMode.PHASE, sphere_relation=None,
                 step_budget=DEFAULT_STEP_BUDGET):
        self.name = name
        self.generators = list(generators)
        self.unit_mode = unit_mode
        self.step_budget = step_budget
        self._by_name = {g.name: g for g in self.generators}
        for pos, gen in enumerate(self.generators):
            if gen.index != pos:
                raise InvalidRule(f"{name}: el índice de {gen.name} no coincide con su posición")

        self.rules = {}
        for lhs, rhs in (rules or {}).items():
            self._add_rule(tuple(lhs), rhs, ideal=False)
        self.ideal_rules = {}
        for lhs, rhs in (ideal_rules or {}).items():
            self._add_rule(tuple(lhs), rhs, ideal=True)
        self._lhs_lengths = sorted({len(lhs) for lhs in self._all_rules()})

        self._cache = {}
        self._successors = {}
        self._lock = threading.RLock()

        self.sphere_relation = dict(sphere_relation) if sphere_relation else None
        self._dR = None
        self.has_forms = any(g.degree > 0 for g in self.generators)
        if self.sphere_relation is not None and self.has_forms:
            self._dR = self.reduce(self.differential_raw(self.sphere_relation))

    # ---- construcción ----------------------------------------------------

    def _add_rule(self, lhs, rhs, ideal):
        for word, coef in rhs.items():
            if word_key(word) >= word_key(lhs):
                raise InvalidRule(f"{self.name}: {self.format_word(word)} no es menor que "
                                  f"{self.format_word(lhs)}")
            if coef.mode is not self.unit_mode:
                raise InvalidRule(f"{self.name}: modo de unidad incorrecto en la regla")
            if self.word_weight(word) != self.word_weight(lhs) or \
                    self.word_degree(word) != self.word_degree(lhs):
                raise InvalidRule(f"{self.name}: la regla {self.format_word(lhs)} "
                                  "no conserva peso ni grado")
        target = self.ideal_rules if ideal else self.rules
        target[lhs] = {w: c for w, c in rhs.items() if not c.is_zero()}

    def _all_rules(self):
        merged = dict(self.rules)
        merged.update(self.ideal_rules)
        return merged

    # ---- generadores -----------------------------------------------------

    def generator(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownGenerator(f"{self.name}: generador desconocido '{name}'") from None

    def has_generator(self, name):
        return name in self._by_name

    def index(self, name):
        return self.generator(name).index

    def word(self, *names):
        return tuple(self.index(n) for n in names)

    def word_degree(self, word):
        return sum(self.generators[i].degree for i in word)

    def word_weight(self, word):
        total = [QQ(0)] * len(self.generators[0].weight) if self.generators else []
        for i in word:
            for k, w in enumerate(self.generators[i].weight):
                total[k] += parse_rational(w)
        return tuple(total)

    def word_cartan(self, word):
        total = [QQ(0), QQ(0)]
        for i in word:
            cartan = self.generators[i].cartan or self.generators[i].weight
            total[0] += parse_rational(cartan[0])
            total[1] += parse_rational(cartan[1])
        return tuple(total)

    def format_word(self, word):
        if not word:
            return '1'
        return ' '.join(self.generators[i].name for i in word)

    # ---- escalares -------------------------------------------------------

    def scalar(self, value=1):
        if isinstance(value, Scalar):
            return value
        return Scalar.const(value, self.unit_mode)

    def unit(self, k=1):
        return Scalar.unit(k, self.unit_mode)

    # ---- reescritura -----------------------------------------------------

    def _first_redex(self, word):
        for pos in range(len(word)):
            for length in self._lhs_lengths:
                end = pos + length
                if end > len(word):
                    break
                sub = word[pos:end]
                rhs = self.rules.get(sub)
                if rhs is None:
                    rhs = self.ideal_rules.get(sub)
                if rhs is not None:
                    return pos, end, rhs
        return None

    def _rewrite_once(self, word):
        if word in self._successors:
            return self._successors[word]
        redex = self._first_redex(word)
        if redex is None:
            result = None
        else:
            pos, end, rhs = redex
            prefix, suffix = word[:pos], word[end:]
            result = [(prefix + w + suffix, c) for w, c in rhs.items()]
        self._successors[word] = result
        return result

    def word_normal_form(self, word):
        """Forma normal de una palabra por reescritura (sin proyección tangencial)"""
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        with self._lock:
            return self._normalize(word)

    def _normalize(self, word):
        cache = self._cache
        if word in cache:
            return cache[word]
        steps = 0
        stack = [word]
        one = Scalar.one(self.unit_mode)
        while stack:
            current = stack[-1]
            if current in cache:
                stack.pop()
                continue
            successors = self._rewrite_once(current)
            if successors is None:
                cache[current] = {current: one}
                stack.pop()
                continue
            pending = [w for w, _ in successors if w not in cache]
            if pending:
                steps += len(pending)
                if steps > self.step_budget or len(stack) > self.step_budget:
                    raise StepBudgetExceeded(
                        f"{self.name}: más de {self.step_budget} reescrituras "
                        f"al normalizar {self.format_word(word)}")
                stack.extend(pending)
                continue
            acc = {}
            for succ, coef in successors:
                for w, c in cache[succ].items():
                    add_into(acc, w, c * coef)
            cache[current] = acc
            stack.pop()
        return cache[word]

    def reduce(self, terms):
        """Reducción por reglas e ideal, término a término"""
        acc = {}
        for word, coef in terms.items():
            for w, c in self.word_normal_form(word).items():
                add_into(acc, w, c * coef)
        return acc

    def normal_form_raw(self, terms):
        nf = self.reduce(terms)
        if self._dR is None or not any(self.word_degree(w) for w in nf):
            return nf
        return self.tangential_projection_raw(nf)

    def tangential_projection_raw(self, terms):
        """P(X) = X − ½ dR·ι(X): representante canónico módulo (R − 1, dR)"""
        nf = self.reduce(terms)
        if self._dR is None:
            return nf
        iota = self.reduce(self.contraction_raw(nf))
        if not iota:
            return nf
        half = Scalar.const(QQ(1, 2), self.unit_mode)
        correction = raw_mul(self._dR, iota)
        return self.reduce(raw_add(nf, correction, scale=-half))

    # ---- derivaciones graduadas ------------------------------------------

    def differential_raw(self, terms):
        out = {}
        for word, coef in terms.items():
            degree = 0
            for pos, i in enumerate(word):
                gen = self.generators[i]
                if gen.degree == 0:
                    if gen.d_partner is None:
                        raise MissingFormGenerator(
                            f"{self.name}: {gen.name} no tiene diferencial")
                    sign = -coef if degree % 2 else coef
                    add_into(out, word[:pos] + (gen.d_partner,) + word[pos + 1:], sign)
                degree += gen.degree
        return out

    def contraction_raw(self, terms):
        """ι: derivación graduada de grado −1 con ι(dg) = g, ι(g) = 0"""
        out = {}
        for word, coef in terms.items():
            degree = 0
            for pos, i in enumerate(word):
                gen = self.generators[i]
                if gen.degree == 1 and gen.d_partner is not None:
                    sign = -coef if degree % 2 else coef
                    add_into(out, word[:pos] + (gen.d_partner,) + word[pos + 1:], sign)
                degree += gen.degree
        return out

    def star_raw(self, terms):
        out = {}
        for word, coef in terms.items():
            odd = sum(1 for i in word if self.generators[i].degree % 2)
            new_word = tuple(self.generators[i].star_partner for i in reversed(word))
            c = coef.star()
            if (odd * (odd - 1) // 2) % 2:
                c = -c
            add_into(out, new_word, c)
        return out

    # ---- solapamientos ---------------------------------------------------

    def check_overlaps(self):
        all_rules = self._all_rules()
        report = OverlapReport(self.name)
        lhs_list = sorted(all_rules, key=word_key)
        for l1 in lhs_list:
            for l2 in lhs_list:
                candidates = []
                for k in range(1, min(len(l1), len(l2))):
                    if l1[-k:] == l2[:k]:
                        candidates.append((l1 + l2[k:], 0, len(l1) - k))
                if l1 != l2 and len(l2) < len(l1):
                    for pos in range(len(l1) - len(l2) + 1):
                        if l1[pos:pos + len(l2)] == l2:
                            candidates.append((l1, 0, pos))
                for word, pos1, pos2 in candidates:
                    report.checked += 1
                    first = self._apply_at(word, pos1, l1, all_rules[l1])
                    second = self._apply_at(word, pos2, l2, all_rules[l2])
                    red1, red2 = self.reduce(first), self.reduce(second)
                    if red1 != red2:
                        report.ambiguities.append(
                            (self.format_word(word), self.format_raw(red1), self.format_raw(red2)))
        if report.resolved:
            logger.debug(f"✅ {self.name}: {report.checked} solapamientos resueltos")
        else:
            logger.warning(f"⚠️  {self.name}: {len(report.ambiguities)} ambigüedades sin resolver")
        return report

    @staticmethod
    def _apply_at(word, pos, lhs, rhs):
        prefix, suffix = word[:pos], word[pos + len(lhs):]
        return {prefix + w + suffix: c for w, c in rhs.items()}

    # ---- utilidades ------------------------------------------------------

    def format_raw(self, terms):
        if not terms:
            return '0'
        parts = []
        for word in sorted(terms, key=word_key):
            parts.append(f"[{terms[word]}] {self.format_word(word)}")
        return ' + '.join(parts)

    def poly(self, terms):
        return NCPoly(self, terms)

    def zero(self):
        return NCPoly(self, {}, normalized=True)

    def one(self):
        return NCPoly(self, {(): Scalar.one(self.unit_mode)}, normalized=True)

    def const(self, value):
        return NCPoly(self, {(): self.scalar(value)})

    def gen(self, name):
        return NCPoly(self, {(self.index(name),): Scalar.one(self.unit_mode)})

    def random_poly(self, rng: random.Random, max_terms=4, max_len=3, functions_only=False,
                    exponents=(-2, 2)):
        """Polinomio aleatorio para las pruebas de propiedades"""
        pool = [g.index for g in self.generators if not functions_only or g.degree == 0]
        terms = {}
        for _ in range(rng.randint(1, max_terms)):
            word = tuple(rng.choice(pool) for _ in range(rng.randint(0, max_len)))
            coef = Scalar({rng.randint(*exponents): FieldElem(rng.randint(-3, 3),
                                                               rng.randint(-2, 2))},
                          self.unit_mode)
            add_into(terms, word, coef)
        return NCPoly(self, terms)

    def __repr__(self):
        return f"RewriteSystem({self.name}, {len(self.generators)} generadores, " \
               f"{len(self.rules)} reglas, {len(self.ideal_rules)} de ideal)"


# ============================================================================
# POLINOMIOS NO CONMUTATIVOS
# ============================================================================

class NCPoly:
    """Elemento del álgebra: combinación de palabras normales"""

    __slots__ = ('system', 'terms')

    def __init__(self, system, terms, normalized=False):
        self.system = system
        self.terms = dict(terms) if normalized else system.normal_form_raw(terms)

    def _coerce(self, other):
        if isinstance(other, NCPoly):
            return other
        if isinstance(other, (int, Scalar, FieldElem)):
            return self.system.const(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return NCPoly(self.system, raw_add(self.terms, other.terms), normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly(self.system, {w: -c for w, c in self.terms.items()}, normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Scalar, FieldElem)) or isinstance(other, QQ.dtype):
            scale = self.system.scalar(other) if not isinstance(other, Scalar) else other
            return NCPoly(self.system, raw_scale(self.terms, scale), normalized=True)
        if not isinstance(other, NCPoly):
            return NotImplemented
        return NCPoly(self.system, raw_mul(self.terms, other.terms))

    def __rmul__(self, other):
        if isinstance(other, (int, Scalar, FieldElem)) or isinstance(other, QQ.dtype):
            return self * other
        return NotImplemented

    def __pow__(self, n):
        result = self.system.one()
        for _ in range(n):
            result = result * self
        return result

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def star(self):
        return NCPoly(self.system, self.system.star_raw(self.terms))

    def d(self):
        return NCPoly(self.system, self.system.differential_raw(self.terms))

    def iota(self):
        return NCPoly(self.system, self.system.contraction_raw(self.terms))

    def degrees(self):
        return {self.system.word_degree(w) for w in self.terms}

    def weights(self):
        return {self.system.word_weight(w) for w in self.terms}

    def coefficient(self, word):
        return self.terms.get(word, Scalar.zero(self.system.unit_mode))

    def constant(self):
        return self.coefficient(())

    def map_scalars(self, fn):
        out = {}
        for w, c in self.terms.items():
            add_into(out, w, fn(c))
        return NCPoly(self.system, out, normalized=True)

    def to_json(self):
        return [[self.system.format_word(w), c.to_json()] for w, c in
                sorted(self.terms.items(), key=lambda t: word_key(t[0]))]

    def __repr__(self):
        return f"NCPoly({self})"

    def __str__(self):
        return self.system.format_raw(self.terms)


# ============================================================================
# OPERACIONES
# ============================================================================

def normal_form(sys: RewriteSystem, p) -> NCPoly:
    terms = p.terms if isinstance(p, NCPoly) else p
    return NCPoly(sys, sys.normal_form_raw(terms), normalized=True)


def check_overlaps(sys: RewriteSystem) -> OverlapReport:
    return sys.check_overlaps()


def star(sys: RewriteSystem, p: NCPoly) -> NCPoly:
    return NCPoly(sys, sys.star_raw(p.terms))


def differential(sys: RewriteSystem, p: NCPoly) -> NCPoly:
    return NCPoly(sys, sys.differential_raw(p.terms))


def contraction(sys: RewriteSystem, p: NCPoly) -> NCPoly:
    return NCPoly(sys, sys.contraction_raw(p.terms))


def tangential_projection(sys: RewriteSystem, p: NCPoly) -> NCPoly:
    return NCPoly(sys, sys.tangential_projection_raw(p.terms), normalized=True)


def homomorphism(p, images, target: RewriteSystem, source: RewriteSystem | None = None) -> NCPoly:
    """
    Extiende {índice de generador → NCPoly en target} a un morfismo de álgebras.

    p es un NCPoly o un polinomio crudo {palabra: Scalar} de source (útil
    para transportar relaciones sin normalizarlas antes). Las formas sin
    imagen explícita se mandan a d(imagen de su función).
    """
    if isinstance(p, NCPoly):
        source, terms = p.system, p.terms
    else:
        terms = p
    cache = {}

    def image_of(i):
        if i not in cache:
            if i in images:
                cache[i] = images[i]
            else:
                gen = source.generators[i]
                if gen.degree == 1 and gen.d_partner in images:
                    cache[i] = images[gen.d_partner].d()
                else:
                    raise UnknownGenerator(f"sin imagen para {gen.name}")
        return cache[i]

    result = target.zero()
    for word, coef in terms.items():
        term = target.const(coef)
        for i in word:
            term = term * image_of(i)
        result = result + term
    return result


# ============================================================================
# PRODUCTO TENSORIAL
# ============================================================================

@dataclass
class TensorProduct:
    """
    Producto tensorial de álgebras presentadas.

    Los factores conmutan entre sí y cada factor se reescribe con sus propias
    reglas. Los generadores del factor k llevan el sufijo '_<tag>' si tag no
    es vacío.
    """
    system: RewriteSystem
    factors: list
    offsets: list

    def embed(self, k, p) -> NCPoly:
        """Lleva un elemento del factor k a 1⊗…⊗p⊗…⊗1"""
        terms = p.terms if isinstance(p, NCPoly) else p
        shift = self.offsets[k]
        return NCPoly(self.system, {tuple(i + shift for i in w): c for w, c in terms.items()})

    def factor_images(self, k):
        """{índice en el factor k: generador correspondiente del producto}"""
        shift = self.offsets[k]
        return {g.index: self.system.poly({(g.index + shift,): Scalar.one(self.system.unit_mode)})
                for g in self.factors[k].generators}


def tensor_product(factors, tags=None, name=None, step_budget=DEFAULT_STEP_BUDGET) -> TensorProduct:
    tags = list(tags) if tags is not None else [''] * len(factors)
    modes = {f.unit_mode for f in factors}
    if len(modes) != 1:
        raise InvalidRule("los factores del producto tensorial mezclan modos de unidad")
    mode = modes.pop()

    generators, rules, ideal, offsets = [], {}, {}, []
    for system, tag in zip(factors, tags):
        shift = len(generators)
        offsets.append(shift)
        for g in system.generators:
            generators.append(Generator(
                name=f"{g.name}_{tag}" if tag else g.name,
                index=g.index + shift,
                degree=g.degree,
                weight=g.weight,
                star_partner=g.star_partner + shift,
                d_partner=None if g.d_partner is None else g.d_partner + shift,
                cartan=g.cartan,
            ))

        def moved(terms, shift=shift):
            return {tuple(i + shift for i in w): c for w, c in terms.items()}

        for lhs, rhs in system.rules.items():
            rules[tuple(i + shift for i in lhs)] = moved(rhs)
        for lhs, rhs in system.ideal_rules.items():
            ideal[tuple(i + shift for i in lhs)] = moved(rhs)

    one = Scalar.one(mode)
    bounds = offsets + [len(generators)]
    for k in range(len(factors)):
        for l in range(k + 1, len(factors)):
            for x in range(bounds[k], bounds[k + 1]):
                for y in range(bounds[l], bounds[l + 1]):
                    rules[(y, x)] = {(x, y): one}

    label = name or ' ⊗ '.join(f.name for f in factors)
    system = RewriteSystem(label, generators, rules, ideal, unit_mode=mode,
                           step_budget=step_budget)
    return TensorProduct(system, list(factors), offsets)
