"""
============================================================================
ESFERAS SIMPLÉCTICAS S⁷_q → S⁴_q - matriz R de C₂, RTT, proyección y coacción
============================================================================

Índices 0..3 (i′ = 3 − i), ρ = (2, 1, −1, −2), ε = (1, 1, −1, −1).

Convención de la matriz R: el término c·e_a^b ⊗ e_c^d contribuye a
R_{ac}^{bd}. Con x_i = T_i^4 y x̄^i ∝ T_{i′}^1, las ecuaciones

    R_{ij}^{kp} x_k x_p = q x_j x_i
    v^l v^k R_{lk}^{ji} = q v^i v^j             (v = x̄)
    v^j R_{ij}^{kp} x_k = q x_i v^p

se resuelven como sistemas lineales sobre ℚ(q) (sympy) y se comparan regla
a regla con la presentación data/s7_q.yaml.

A(Sp_q(2)) completo no se materializa: RTT se usa para derivar las
relaciones y se comprueba por instancias, y el cociente de Hopf B_q se
trabaja con la matriz T′.
============================================================================
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache

import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .cyclic import Chain, UniversalCalculus, chern_character
from .errors import DerivationMismatch, IdentityFailed
from .ncalg import (DEFAULT_STEP_BUDGET, NCPoly, RewriteSystem, add_into, homomorphism,
                    raw_mul, tensor_product, word_key)
from .ncmatrix import HermitianPairing, NCMatrix, dagger, grassmann_curvature
from .presentations import (load_expression, load_presentation, load_relations, parse_poly,
                            parse_raw)
from .qrep import build_sigma, represent
from .scalars import Scalar, UnitMode
from .utils.checks import CheckResult

logger = logging.getLogger(__name__)

SUITE = 'qsympl'

N = 4
RHO = (2, 1, -1, -2)
EPS = (1, 1, -1, -1)
MODE = UnitMode.REAL

ORACLE_Q = QQ(1, 2)
ORACLE_CUTOFF = 25
ORACLE_PAIRS = 100
ORACLE_TOL = 1e-10
RTT_INSTANCES = 50

Q_SYMBOL = sympy.Symbol('q')
FRACTIONS = QQ.frac_field(Q_SYMBOL)


def _q(k=1):
    return Scalar.unit(k, MODE)


def _c(value):
    return Scalar.const(value, MODE)


def prime(i):
    return N - 1 - i


# ============================================================================
# MATRIZ R
# ============================================================================

@dataclass(frozen=True)
class RMatrixData:
    """R_{ij}^{kl} = entries[4i + j][4k + l]; C_i^j = q^{ρ_j} ε_i δ_{ij′}"""
    entries: tuple
    rho: tuple = RHO
    eps: tuple = EPS
    C: tuple = ()
    N: int = N

    def entry(self, i, j, k, l) -> Scalar:
        return self.entries[i * N + j][k * N + l]

    def nonzero(self):
        for row in range(N * N):
            for col in range(N * N):
                value = self.entries[row][col]
                if not value.is_zero():
                    yield divmod(row, N) + divmod(col, N) + (value,)

    def upper_support(self, k, l):
        """Pares (i, j) con R_{ij}^{kl} ≠ 0"""
        return [(i, j) for i, j, a, b, _ in self.nonzero() if (a, b) == (k, l)]

    def to_json(self):
        return [[i, j, k, l, value.to_json()] for i, j, k, l, value in self.nonzero()]


@lru_cache(maxsize=None)
def build_R() -> RMatrixData:
    """
    R = q Σ e_i^i⊗e_i^i + Σ_{j≠i,i′} e_i^i⊗e_j^j + q⁻¹ Σ e_{i′}^{i′}⊗e_i^i
        + (q−q⁻¹) Σ_{i>j} e_i^j⊗e_j^i
        − (q−q⁻¹) Σ_{i>j} q^{ρ_i−ρ_j} ε_i ε_j e_i^j⊗e_{i′}^{j′}
    """
    grid = [[_c(0)] * (N * N) for _ in range(N * N)]

    def add(a, b, c, d, value):
        grid[a * N + c][b * N + d] = grid[a * N + c][b * N + d] + value

    diff = _q(1) - _q(-1)
    for i in range(N):
        ip = prime(i)
        add(i, i, i, i, _q(1))
        for j in range(N):
            if j not in (i, ip):
                add(i, i, j, j, _c(1))
        add(ip, ip, i, i, _q(-1))
        for j in range(i):
            add(i, j, j, i, diff)
            add(i, j, ip, prime(j), -diff * _q(RHO[i] - RHO[j]) * (EPS[i] * EPS[j]))

    C = tuple(tuple(_q(RHO[j]) * EPS[i] if j == prime(i) else _c(0) for j in range(N))
              for i in range(N))
    return RMatrixData(tuple(tuple(row) for row in grid), RHO, EPS, C)


def antipode_entry(i, j):
    """S(T)_i^j = coef · T_{j′}^{i′}; devuelve (coef, (j′, i′))"""
    coef = _q(RHO[prime(i)] + RHO[j]) * (-EPS[i] * EPS[prime(j)])
    return coef, (prime(j), prime(i))


def r_matrix_checks(R: RMatrixData):
    q = _q(1)
    checks = [
        ("qsympl.R.NN", "R_{NN}^{NN} = q", R.entry(3, 3, 3, 3) - q),
        ("qsympl.R.ii_jj", "R_{ij}^{ij} = 1 para j ≠ i, i′", R.entry(0, 1, 0, 1) - 1),
        ("qsympl.R.iprime_i", "R_{i′i}^{i′i} = q⁻¹", R.entry(3, 0, 3, 0) - _q(-1)),
    ]
    results = [CheckResult.from_residuals(cid, SUITE, anchor, residual)
               for cid, anchor, residual in checks]
    for cols, label in (((3, 3), 'NN'), ((0, 0), '11'), ((3, 0), 'N1')):
        support = R.upper_support(*cols)
        results.append(CheckResult.from_bool(
            f"qsympl.R.support[{label}]", SUITE,
            f"R_{{mp}}^{{{label}}} solo no nulo en (m, p) = {cols}", support == [cols],
            residual=[list(s) for s in support]))
    # C_i^{i′} C_{i′}^i = −q^{ρ_i+ρ_{i′}} = −1
    products = [R.C[i][prime(i)] * R.C[prime(i)][i] + 1 for i in range(N)]
    results.append(CheckResult.from_residuals(
        "qsympl.R.C_square", SUITE, "C² = −1 (C_i^{i′} C_{i′}^i = −1)", products))
    return results


# ============================================================================
# ℚ(q) CON SYMPY
# ============================================================================

def scalar_to_field(s: Scalar):
    expr = sympy.Integer(0)
    for exp, coef in s.terms.items():
        a, b, c, d = coef.coeffs
        if b or c or d:
            raise DerivationMismatch(f"coeficiente no racional en una relación en q: {s}")
        expr += sympy.Rational(int(a.numerator), int(a.denominator)) * Q_SYMBOL ** exp
    return FRACTIONS.from_sympy(expr)


def expr_to_scalar(expr) -> Scalar:
    """Racional en q con denominador monomial → polinomio de Laurent"""
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    pden = sympy.Poly(den, Q_SYMBOL)
    if len(pden.terms()) != 1:
        raise DerivationMismatch(f"coeficiente no laurentiano: {expr}")
    (dexp,), dcoef = pden.terms()[0]
    dq = QQ(int(dcoef.p), int(dcoef.q))
    terms = {}
    for (exp,), coef in sympy.Poly(num, Q_SYMBOL).terms():
        terms[exp - dexp] = QQ(int(coef.p), int(coef.q)) / dq
    return Scalar(terms, MODE)


def linear_system(equations):
    """Filas sobre ℚ(q); columnas ordenadas de la palabra mayor a la menor"""
    words = sorted({w for eq in equations for w in eq}, key=word_key, reverse=True)
    position = {w: k for k, w in enumerate(words)}
    rows = []
    for eq in equations:
        row = [FRACTIONS.zero] * len(words)
        for w, coef in eq.items():
            row[position[w]] = scalar_to_field(coef)
        rows.append(row)
    return DomainMatrix(rows, (len(rows), len(words)), FRACTIONS), words


def solve_rules(equations):
    """Forma escalonada reducida: cada pivote da la regla palabra mayor → resto"""
    matrix, words = linear_system(equations)
    rref, pivots = matrix.rref()
    dense = rref.to_Matrix()
    rules = {}
    for r, pc in enumerate(pivots):
        rhs = {}
        for col in range(len(words)):
            if col == pc or dense[r, col] == 0:
                continue
            add_into(rhs, words[col], -expr_to_scalar(dense[r, col]))
        rules[words[pc]] = rhs
    return rules


def in_span(equations, candidate):
    """¿candidate ∈ span(equations) sobre ℚ(q)?"""
    base, _ = linear_system(equations + [candidate])
    without, _ = linear_system(equations + [{w: _c(0) for w in candidate}])
    return base.rank() == without.rank()


# ============================================================================
# SISTEMAS
# ============================================================================

S4_EMBED_TEXT = {
    't': "q^-2 xb2 x2 + q^-2 xb1 x1",
    'a': "q^-4 x1 xb3 - q^-2 x2 xb4",
    'b': "-q^-3 x1 x4 - q^-2 x2 x3",
}

PSI_TEXT = [
    ["q^-3 x1", "q^-2 x2"],
    ["-q^-1 xb2", "q^-1 xb1"],
    ["q^-1 x3", "-x4"],
    ["-xb4", "-xb3"],
]

P_TEXT = [
    ["q^-2 t", "0", "a", "b"],
    ["0", "t", "q^-2 bb", "-q^2 ab"],
    ["ab", "q^-2 b", "1 - q^-4 t", "0"],
    ["bb", "-q^2 a", "0", "1 - q^2 t"],
]


@dataclass
class QSphereSystem:
    s7: RewriteSystem
    quadratic: RewriteSystem
    letters: RewriteSystem
    su2: RewriteSystem
    b_q: RewriteSystem
    s4_embed: dict = field(default_factory=dict)

    def x(self, k):
        return self.s7.index(f"x{k + 1}")

    def v(self, k):
        return self.s7.index(f"xb{k + 1}")

    def letter_images(self):
        return {self.letters.index(name): img for name, img in self.s4_embed.items()}

    def embed(self, p) -> NCPoly:
        """Elemento de A(S⁴_q) escrito en las letras → A(S⁷_q)"""
        return homomorphism(p, self.letter_images(), self.s7, source=self.letters)

    def relation(self, lhs):
        """lhs − rhs de una regla de S⁷_q, sin normalizar"""
        rhs = self.s7.rules.get(lhs, self.s7.ideal_rules.get(lhs))
        raw = {w: -c for w, c in rhs.items()}
        add_into(raw, lhs, _c(1))
        return raw


@lru_cache(maxsize=None)
def build_q_spheres(step_budget=DEFAULT_STEP_BUDGET) -> QSphereSystem:
    s7 = load_presentation('s7_q', step_budget=step_budget)
    quadratic = RewriteSystem(f"{s7.name}_cuadratica", s7.generators, s7.rules,
                              unit_mode=s7.unit_mode, step_budget=step_budget)
    qs = QSphereSystem(
        s7=s7,
        quadratic=quadratic,
        letters=load_presentation('s4_q_letters', step_budget=step_budget),
        su2=load_presentation('su2_q', step_budget=step_budget),
        b_q=load_presentation('b_q', step_budget=step_budget),
    )
    embed = {name: parse_poly(s7, text) for name, text in S4_EMBED_TEXT.items()}
    embed['ab'] = embed['a'].star()
    embed['bb'] = embed['b'].star()
    qs.s4_embed = embed
    logger.info(f"🔧 Esferas q: {s7!r}, {len(s7.rules)} reglas cuadráticas")
    return qs


def overlap_checks(qs: QSphereSystem):
    results = []
    for system in (qs.s7, qs.quadratic, qs.su2, qs.b_q):
        report = system.check_overlaps()
        results.append(CheckResult.from_bool(
            f"qsympl.overlaps.{system.name}", SUITE,
            f"solapamientos de {system.name} resueltos ({report.checked})",
            report.resolved, residual=report.ambiguities))
    return results


# ============================================================================
# DERIVACIÓN DE LAS RELACIONES DESDE RTT
# ============================================================================

FAMILIES = {
    'comxx': "R_{ij}^{kp} x_k x_p = q x_j x_i",
    'commvv': "v^l v^k R_{lk}^{ji} = q v^i v^j",
    'commxv': "v^j R_{ij}^{kp} x_k = q x_i v^p",
}


def tensor_equations(R: RMatrixData, qs: QSphereSystem, family):
    x, v = qs.x, qs.v
    q = _q(1)
    equations = []
    for i in range(N):
        for j in range(N):
            eq = {}
            for a in range(N):
                for b in range(N):
                    if family == 'comxx':
                        add_into(eq, (x(a), x(b)), R.entry(i, j, a, b))
                    elif family == 'commvv':
                        # i, j hacen de índices superiores (j, i)
                        add_into(eq, (v(a), v(b)), R.entry(a, b, j, i))
                    else:
                        # (i, j) = (i, p); a = j sumado, b = k sumado
                        add_into(eq, (v(a), x(b)), R.entry(i, a, b, j))
            if family == 'comxx':
                add_into(eq, (x(j), x(i)), -q)
            elif family == 'commvv':
                add_into(eq, (v(i), v(j)), -q)
            else:
                add_into(eq, (x(i), v(j)), -q)
            if eq:
                equations.append(eq)
    return equations


def _family_of(qs: QSphereSystem, word):
    if len(word) != 2:
        return None
    kinds = tuple('v' if qs.s7.generators[i].name.startswith('xb') else 'x' for i in word)
    return {('x', 'x'): 'comxx', ('v', 'v'): 'commvv', ('x', 'v'): 'commxv'}.get(kinds)


def compare_family(R: RMatrixData, qs: QSphereSystem, family):
    """Diferencias entre las reglas derivadas y las de la presentación"""
    derived = solve_rules(tensor_equations(R, qs, family))
    explicit = {lhs: rhs for lhs, rhs in qs.s7.rules.items() if _family_of(qs, lhs) == family}
    fmt = qs.s7.format_word
    differences = []
    for lhs in sorted(set(derived) ^ set(explicit), key=word_key):
        side = 'derivada' if lhs in derived else 'presentación'
        differences.append(f"{fmt(lhs)}: solo en {side}")
    for lhs in sorted(set(derived) & set(explicit), key=word_key):
        got = qs.quadratic.reduce(derived[lhs])
        want = qs.quadratic.reduce(explicit[lhs])
        if got != want:
            differences.append(f"{fmt(lhs)} -> {qs.s7.format_raw(got)} "
                               f"(presentación: {qs.s7.format_raw(want)})")
    return derived, differences


def derive_sphere_relations(R: RMatrixData, qs: QSphereSystem | None = None):
    """Reglas {familia: {lhs: rhs}} derivadas de RTT; DerivationMismatch si difieren"""
    qs = qs or build_q_spheres()
    rules, differences = {}, []
    for family in FAMILIES:
        derived, diff = compare_family(R, qs, family)
        rules[family] = derived
        differences.extend(f"[{family}] {d}" for d in diff)
    if differences:
        raise DerivationMismatch("las relaciones derivadas de RTT no coinciden", differences)
    return rules


def derivation_checks(R: RMatrixData, qs: QSphereSystem):
    results = []
    for family, anchor in FAMILIES.items():
        derived, differences = compare_family(R, qs, family)
        results.append(CheckResult.from_bool(
            f"qsympl.derive.{family}", SUITE, anchor, not differences,
            detail=f"{len(derived)} reglas derivadas", residual=differences))
    return results


# ============================================================================
# INSTANCIAS DE RTT EN LA SUBFAMILIA x / x̄
# ============================================================================

def column_entry(qs: QSphereSystem, i, c):
    """T_i^c para c ∈ {1, N} (índices 0 y 3) en A(S⁷_q)"""
    if c == N - 1:
        return {(qs.x(i),): _c(1)}
    if c == 0:
        # x̄^{i′} = q^{2+ρ_{i′}} ε_i T_i^1
        return {(qs.v(prime(i)),): _q(-(2 + RHO[prime(i)])) * EPS[i]}
    raise KeyError(c)


def rtt_component(R: RMatrixData, qs: QSphereSystem, i, j, r, s):
    """(R T₁T₂ − T₂T₁R)_{ij}^{rs} en A(S⁷_q)"""
    raw = {}
    for k in range(N):
        for l in range(N):
            left = R.entry(i, j, k, l)
            if not left.is_zero():
                term = raw_mul(column_entry(qs, k, r), column_entry(qs, l, s))
                for w, c in term.items():
                    add_into(raw, w, c * left)
            right = R.entry(k, l, r, s)
            if not right.is_zero():
                term = raw_mul(column_entry(qs, j, l), column_entry(qs, i, k))
                for w, c in term.items():
                    add_into(raw, w, -c * right)
    return qs.s7.poly(raw)


def rtt_instances(n=RTT_INSTANCES, seed=0, R=None, qs=None):
    """Instancias aleatorias de RTT con columnas (r, s) ∈ {(N,N), (1,1), (N,1)}"""
    R = R or build_R()
    qs = qs or build_q_spheres()
    rng = random.Random(seed)
    columns = [(N - 1, N - 1), (0, 0), (N - 1, 0)]
    results = []
    for k in range(n):
        i, j = rng.randrange(N), rng.randrange(N)
        r, s = rng.choice(columns)
        residual = rtt_component(R, qs, i, j, r, s)
        results.append(CheckResult.from_residuals(
            f"qsympl.rtt[{k:02d}]", SUITE,
            f"(R T₁T₂ − T₂T₁R)_{{{i + 1}{j + 1}}}^{{{r + 1}{s + 1}}} = 0 en S⁷_q", residual))
    return results


# ============================================================================
# PROYECCIÓN Y RELACIONES DE S⁴_q
# ============================================================================

@lru_cache(maxsize=None)
def build_projection_q(step_budget=DEFAULT_STEP_BUDGET):
    """Ψ_q y p_q = Ψ_qΨ_q*; IdentityFailed si Ψ*Ψ ≠ 1 o p_q difiere de su forma en t, a, b"""
    qs = build_q_spheres(step_budget)
    s7 = qs.s7
    Psi = NCMatrix(s7, [[parse_poly(s7, text) for text in row] for row in PSI_TEXT])
    gram = dagger(Psi) @ Psi
    if not (gram - NCMatrix.identity(s7, 2)).is_zero():
        raise IdentityFailed("Ψ*Ψ ≠ 1", gram)
    p = Psi @ dagger(Psi)
    expected = NCMatrix(s7, [[qs.embed(parse_poly(qs.letters, text)) for text in row]
                             for row in P_TEXT])
    diff = p - expected
    if not diff.is_zero():
        raise IdentityFailed("p_q no coincide entrada a entrada con su forma en t, a, b",
                             [(i, j, str(x)) for i, j, x in diff.nonzero_entries()])
    return Psi, p


def projection_checks(qs: QSphereSystem, step_budget=DEFAULT_STEP_BUDGET):
    try:
        Psi, p = build_projection_q(step_budget)
    except IdentityFailed as exc:
        return [CheckResult.from_bool("qsympl.projection", SUITE, "p = ΨΨ*, Ψ*Ψ = 1", False,
                                      detail=str(exc), residual=exc.residual)]
    s7 = qs.s7
    results = [CheckResult.from_bool("qsympl.projection", SUITE,
                                     "p = ΨΨ* con la forma en t, a, b; Ψ*Ψ = 1", True)]
    results.append(CheckResult.from_residuals(
        "qsympl.projection.idempotent", SUITE, "p² = p", p @ p - p))
    results.append(CheckResult.from_residuals(
        "qsympl.projection.selfadjoint", SUITE, "p* = p", dagger(p) - p))
    pairing = HermitianPairing(s7)
    phi = [Psi.col(0), Psi.col(1)]
    values = {
        '11': pairing.pair(phi[0], phi[0]) - 1,
        '22': pairing.pair(phi[1], phi[1]) - 1,
        '12': pairing.pair(phi[0], phi[1]),
    }
    for key, residual in values.items():
        results.append(CheckResult.from_residuals(
            f"qsympl.projection.phi[{key}]", SUITE, f"⟨φ_{key[0]}, φ_{key[1]}⟩ = δ", residual))
    x1 = s7.gen('x1')
    results.append(CheckResult.from_residuals(
        "qsympl.projection.pairing_linearity", SUITE, "⟨φ₁·x₁, φ₂⟩ = x̄₁·⟨φ₁, φ₂⟩",
        pairing.right_linearity_defect(phi[0], phi[1], x1)))
    ch0 = qs.embed(load_expression(qs.letters, 'ch0'))
    residual = chern_character(p, 0) - Chain.from_polys([ch0])
    results.append(CheckResult.from_residuals(
        "qsympl.projection.ch0", SUITE, "ch₀(p_q) = 2 − q⁻⁴(1−q²)(1−q⁴)t", residual))
    return results


def _relations_with_conjugates(letters):
    out = {}
    for name, raw in load_relations(letters).items():
        out[name] = raw
        conj = letters.star_raw(raw)
        if conj != raw:
            out[f"{name}*"] = conj
    return out


def verify_s4q_relations(qs: QSphereSystem):
    results = []
    for name, raw in sorted(_relations_with_conjugates(qs.letters).items()):
        results.append(CheckResult.from_residuals(
            f"qsympl.s4.rel[{name}]", SUITE, f"relación {name} de S⁴_q en S⁷_q", qs.embed(raw)))
    t = qs.s4_embed['t']
    results.append(CheckResult.from_residuals("qsympl.s4.t_real", SUITE, "t̄ = t", t.star() - t))
    return results


def q_inversion_symmetry(qs: QSphereSystem):
    """q ↦ q⁻¹, a ↦ q²ā, b ↦ q⁻²b̄, t ↦ q⁻²t conserva las relaciones"""
    e = qs.s4_embed
    images = {
        'a': e['ab'] * _q(2), 'ab': e['a'] * _q(2),
        'b': e['bb'] * _q(-2), 'bb': e['b'] * _q(-2),
        't': e['t'] * _q(-2),
    }
    images = {qs.letters.index(k): v for k, v in images.items()}
    results = []
    for name, raw in sorted(_relations_with_conjugates(qs.letters).items()):
        inverted = {w: c.substitute_inverse_unit() for w, c in raw.items()}
        residual = homomorphism(inverted, images, qs.s7, source=qs.letters)
        results.append(CheckResult.from_residuals(
            f"qsympl.s4.inversion[{name}]", SUITE,
            f"{name} con q ↦ q⁻¹, a ↦ q²ā, b ↦ q⁻²b̄, t ↦ q⁻²t", residual))
    return results


# ============================================================================
# COCIENTE DE HOPF B_q
# ============================================================================

I_Q = [(0, 0, 1), (3, 3, 1), (0, 1, 0), (0, 2, 0), (0, 3, 0), (1, 0, 0),
       (1, 3, 0), (2, 0, 0), (2, 3, 0), (3, 0, 0), (3, 1, 0), (3, 2, 0)]

T_PRIME_TEXT = [
    ["1", "0", "0", "0"],
    ["0", "alpha", "-q^2 gammab", "0"],
    ["0", "gamma", "alphab", "0"],
    ["0", "0", "0", "1"],
]


def t_prime(b_q: RewriteSystem) -> NCMatrix:
    return NCMatrix(b_q, [[parse_poly(b_q, text) for text in row] for row in T_PRIME_TEXT])


def _raw_entries(b_q):
    """Entradas de T′ como polinomios crudos (sin reducir)"""
    names = {g.name: g.index for g in b_q.generators}
    return [[parse_raw(text, names, b_q.unit_mode) for text in row] for row in T_PRIME_TEXT]


def _label(i, j, const):
    return f"T{i + 1}{j + 1}" + (" - 1" if const else "")


def hopf_quotient_checks(qs: QSphereSystem, R: RMatrixData):
    b_q = qs.b_q
    Tp = t_prime(b_q)
    pair = tensor_product([b_q, b_q], tags=['', '2'], name='B_q ⊗ B_q')
    results = []

    for i, j, const in I_Q:
        label = _label(i, j, const)
        counit = (1 if i == j else 0) - const
        results.append(CheckResult.from_bool(
            f"qsympl.hopf.counit[{label}]", SUITE, f"ε({label}) = 0", counit == 0,
            residual=counit))
        results.append(CheckResult.from_residuals(
            f"qsympl.hopf.quotient[{label}]", SUITE, f"π({label}) = 0 en B_q", Tp[i, j] - const))
        # (π⊗π)Δ(T_i^j) = Σ_k T′_i^k ⊗ T′_k^j
        delta = pair.system.zero()
        for k in range(N):
            delta = delta + pair.embed(0, Tp[i, k]) * pair.embed(1, Tp[k, j])
        results.append(CheckResult.from_residuals(
            f"qsympl.hopf.coproduct[{label}]", SUITE,
            f"Δ({label}) ∈ I_q⊗A + A⊗I_q", delta - const))
        coef, (a, b) = antipode_entry(i, j)
        results.append(CheckResult.from_residuals(
            f"qsympl.hopf.antipode[{label}]", SUITE, f"S({label}) ∈ I_q",
            Tp[a, b] * coef - const))

    # S(T′)T′ = T′S(T′) = 1
    S = NCMatrix(b_q, [[Tp[antipode_entry(i, j)[1]] * antipode_entry(i, j)[0]
                        for j in range(N)] for i in range(N)])
    identity = NCMatrix.identity(b_q, N)
    results.append(CheckResult.from_residuals(
        "qsympl.hopf.unitarity", SUITE, "S(T′)T′ = T′S(T′) = 1 en B_q",
        [S @ Tp - identity, Tp @ S - identity]))

    # RTT para T′
    raw = _raw_entries(b_q)
    components, residuals = [], []
    for i in range(N):
        for j in range(N):
            for m in range(N):
                for n in range(N):
                    comp = {}
                    for k in range(N):
                        for l in range(N):
                            left = R.entry(i, j, k, l)
                            if not left.is_zero():
                                for w, c in raw_mul(raw[k][m], raw[l][n]).items():
                                    add_into(comp, w, c * left)
                            right = R.entry(k, l, m, n)
                            if not right.is_zero():
                                for w, c in raw_mul(raw[j][l], raw[i][k]).items():
                                    add_into(comp, w, -c * right)
                    if comp:
                        components.append(comp)
                        residual = b_q.poly(comp)
                        if not residual.is_zero():
                            residuals.append((i, j, m, n, residual))
    results.append(CheckResult.from_bool(
        "qsympl.hopf.rtt", SUITE, "R T′₁T′₂ = T′₂T′₁R en B_q", not residuals,
        detail=f"{len(components)} componentes no triviales", residual=residuals))

    # relaciones de conmutación de B_q en el span de RTT
    for lhs, rhs in sorted(b_q.rules.items(), key=lambda kv: word_key(kv[0])):
        if () in rhs:
            continue
        relation = {w: -c for w, c in rhs.items()}
        add_into(relation, lhs, _c(1))
        name = b_q.format_word(lhs)
        results.append(CheckResult.from_bool(
            f"qsympl.hopf.bq_from_rtt[{name}]", SUITE,
            f"{name} = {b_q.format_raw(rhs)} se sigue de RTT", in_span(components, relation)))
    return results


# ============================================================================
# COACCIÓN DE SU_q(2)
# ============================================================================

COACTION_TEXT = {
    'x1': "x1 alpha + q x2 gamma",
    'x2': "-x1 gammab + x2 alphab",
    'x3': "x3 alpha - q x4 gamma",
    'x4': "x3 gammab + x4 alphab",
}

COPRODUCT_TEXT = {
    'alpha': "alpha alpha_2 - q gammab gamma_2",
    'gamma': "gamma alpha_2 + alphab gamma_2",
    'gammab': "alpha gammab_2 + gammab alphab_2",
    'alphab': "alphab alphab_2 - q gamma gammab_2",
}

U_TEXT = [["alpha", "-q gammab"], ["gamma", "alphab"]]


@dataclass
class CoactionMap:
    """δ_R: A(S⁷_q) → A(S⁷_q) ⊗ A(SU_q(2)) en los generadores"""
    images: dict
    tensor: object
    source: RewriteSystem
    target: RewriteSystem

    def __call__(self, p) -> NCPoly:
        return homomorphism(p, self.images, self.tensor.system, source=self.source)


@lru_cache(maxsize=None)
def build_coaction(step_budget=DEFAULT_STEP_BUDGET) -> CoactionMap:
    qs = build_q_spheres(step_budget)
    tp = tensor_product([qs.s7, qs.su2], step_budget=step_budget)
    images = {}
    for name, text in COACTION_TEXT.items():
        image = parse_poly(tp.system, text)
        images[qs.s7.index(name)] = image
        images[qs.s7.index('xb' + name[1:])] = image.star()
    return CoactionMap(images, tp, qs.s7, qs.su2)


def coaction_checks(qs: QSphereSystem, step_budget=DEFAULT_STEP_BUDGET):
    delta = build_coaction(step_budget)
    tp = delta.tensor
    results = []

    # (a) morfismo de álgebras
    failing = []
    rules = list(qs.s7.rules) + list(qs.s7.ideal_rules)
    for lhs in rules:
        residual = delta(qs.relation(lhs))
        if not residual.is_zero():
            failing.append((qs.s7.format_word(lhs), residual))
    results.append(CheckResult.from_bool(
        "qsympl.coaction.homomorphism", SUITE, "δ_R conserva las relaciones de S⁷_q",
        not failing, detail=f"{len(rules)} relaciones", residual=failing))

    # compatibilidad con la involución
    star_residuals = [delta.images[qs.v(k)] - delta.images[qs.x(k)].star() for k in range(N)]
    results.append(CheckResult.from_residuals(
        "qsympl.coaction.star", SUITE, "δ_R(x̄ⁱ) = (δ_R(x_i))*", star_residuals))

    # (b) coinvariancia
    for name, image in sorted(qs.s4_embed.items()):
        results.append(CheckResult.from_residuals(
            f"qsympl.coaction.coinvariant[{name}]", SUITE, f"δ_R({name}) = {name}⊗1",
            delta(image) - tp.embed(0, image)))
    _, p = build_projection_q(step_budget)
    p_residuals = [delta(x) - tp.embed(0, x) for _, _, x in p.entries()]
    results.append(CheckResult.from_residuals(
        "qsympl.coaction.coinvariant[p]", SUITE, "las entradas de p_q son coinvariantes",
        p_residuals))

    # (c) counidad
    counit_images = {tp.offsets[0] + g.index: qs.s7.gen(g.name) for g in qs.s7.generators}
    for name, value in (('alpha', 1), ('alphab', 1), ('gamma', 0), ('gammab', 0)):
        counit_images[tp.offsets[1] + qs.su2.index(name)] = qs.s7.const(value)
    counit = [homomorphism(delta.images[g.index], counit_images, qs.s7, source=tp.system)
              - qs.s7.gen(g.name) for g in qs.s7.generators]
    results.append(CheckResult.from_residuals(
        "qsympl.coaction.counit", SUITE, "(id⊗ε)δ_R = id", counit))

    # (d) coinvariancia bajo Sp_q(1): columnas 1 y N de T′ son canónicas
    Tp = t_prime(qs.b_q)
    columns = []
    for c in (0, N - 1):
        columns.extend(Tp[k, c] - (1 if k == c else 0) for k in range(N))
    results.append(CheckResult.from_residuals(
        "qsympl.coaction.sp1", SUITE, "Δ_R(x_i) = x_i⊗1 y Δ_R(x̄ⁱ) = x̄ⁱ⊗1 bajo T ↦ T⊗̇T′",
        columns))
    return results


def coaction_coassociativity(qs: QSphereSystem, step_budget=DEFAULT_STEP_BUDGET):
    """(δ⊗id)δ = (id⊗Δ)δ en los generadores"""
    delta = build_coaction(step_budget)
    pair = delta.tensor
    triple = tensor_product([qs.s7, qs.su2, qs.su2], tags=['', '', '2'],
                            step_budget=step_budget)
    T3 = triple.system
    su2_offset = pair.offsets[1]

    delta_id = {}
    for g in qs.s7.generators:
        image = delta.images[g.index]
        delta_id[g.index] = T3.poly(image.terms)
    for g in qs.su2.generators:
        delta_id[su2_offset + g.index] = T3.gen(f"{g.name}_2")

    id_coproduct = {g.index: T3.gen(g.name) for g in qs.s7.generators}
    for g in qs.su2.generators:
        id_coproduct[su2_offset + g.index] = parse_poly(T3, COPRODUCT_TEXT[g.name])

    residuals = []
    for g in qs.s7.generators:
        image = delta.images[g.index]
        left = homomorphism(image, delta_id, T3, source=pair.system)
        right = homomorphism(image, id_coproduct, T3, source=pair.system)
        residuals.append(left - right)
    return [CheckResult.from_residuals(
        "qsympl.coaction.coassociative", SUITE, "(δ_R⊗id)δ_R = (id⊗Δ)δ_R", residuals)]


def unitarity_check(qs: QSphereSystem, step_budget=DEFAULT_STEP_BUDGET):
    """U*U = UU* = 1 en SU_q(2) y δ_R(Ψ)*δ_R(Ψ) = 1"""
    su2 = qs.su2
    U = NCMatrix(su2, [[parse_poly(su2, text) for text in row] for row in U_TEXT])
    identity = NCMatrix.identity(su2, 2)
    results = [CheckResult.from_residuals(
        "qsympl.unitarity.su2", SUITE, "U*U = UU* = 1 para U = [[α, −qγ̄], [γ, ᾱ]]",
        [dagger(U) @ U - identity, U @ dagger(U) - identity])]

    delta = build_coaction(step_budget)
    tp = delta.tensor
    Psi, _ = build_projection_q(step_budget)
    dPsi = NCMatrix(tp.system, [[delta(x) for x in row] for row in Psi.rows])
    product = NCMatrix(tp.system, [[sum((tp.embed(0, Psi[r, k]) * tp.embed(1, U[k, j])
                                         for k in range(2)), tp.system.zero())
                                    for j in range(2)] for r in range(N)])
    results.append(CheckResult.from_residuals(
        "qsympl.unitarity.matrix_form", SUITE, "δ_R(Ψ) = Ψ ⊗̇ U", dPsi - product))
    results.append(CheckResult.from_residuals(
        "qsympl.unitarity.inner_product", SUITE, "δ_R(Ψ)*δ_R(Ψ) = 1",
        dagger(dPsi) @ dPsi - NCMatrix.identity(tp.system, 2)))
    return results


# ============================================================================
# ORÁCULO NUMÉRICO Y BIANCHI UNIVERSAL
# ============================================================================

def numeric_oracle_agreement(qs: QSphereSystem, n_pairs=ORACLE_PAIRS, q=ORACLE_Q,
                             cutoff=ORACLE_CUTOFF, seed=0, tolerance=ORACLE_TOL):
    """
    Igualdad simbólica (normalizando en S⁷_q) frente a igualdad de σ en el
    bloque interior, sobre pares (x, y) de grado ≤ 4. La mitad de los pares
    difieren en un múltiplo de una relación.
    """
    letters = qs.letters
    relations = list(_relations_with_conjugates(letters).values())
    rep = build_sigma(q, cutoff)
    rng = random.Random(seed)
    one = _c(1)

    def random_word(max_len):
        return tuple(rng.randrange(len(letters.generators)) for _ in range(rng.randint(0, max_len)))

    disagreements, equal_pairs = [], 0
    for k in range(n_pairs):
        x = letters.random_poly(rng, max_terms=3, max_len=2, exponents=(-1, 1))
        if k % 2 == 0:
            relation = rng.choice(relations)
            delta = raw_mul(raw_mul({random_word(1): one}, relation), {random_word(1): one})
        else:
            delta = {random_word(4): Scalar({rng.randint(-1, 1): rng.randint(1, 3)}, MODE)}
        y = raw_mul(x.terms, {(): one})
        for w, c in delta.items():
            add_into(y, w, c)
        symbolic = (qs.embed(x.terms) - qs.embed(y)).is_zero()
        numeric = (represent(rep, x) - represent(rep, y, letters)).interior_norm() < tolerance
        equal_pairs += symbolic
        if symbolic != numeric:
            disagreements.append({'pair': k, 'symbolic': symbolic, 'numeric': numeric,
                                  'delta': letters.format_raw(delta)})
    return [CheckResult.from_bool(
        "qsympl.oracle", SUITE, "igualdad simbólica ⇔ igualdad de σ (bloque interior)",
        not disagreements, detail=f"{equal_pairs} de {n_pairs} pares iguales",
        residual=disagreements)]


def universal_bianchi_check(step_budget=DEFAULT_STEP_BUDGET, columns=None):
    """F = p dp dp en el cálculo universal de S⁷_q: pF = Fp = F y Bianchi sobre ξ_j = p e_j"""
    _, p = build_projection_q(step_budget)
    if columns is None:
        columns = range(p.shape[0])
    calc = UniversalCalculus(p.algebra)
    pu = NCMatrix(calc, [[calc.embed(x) for x in row] for row in p.rows])
    F = grassmann_curvature(pu)
    residuals = []
    for j in columns:
        xi = pu.col(j)
        residuals.append(pu @ (F @ xi).d() - F @ pu @ xi.d())
    return [CheckResult.from_residuals(
        "qsympl.bianchi", SUITE, "[∇₀, F₀] = 0 con F₀ = p dp dp (formas universales)",
        residuals, detail=f"{len(residuals)} columnas")]


# ============================================================================
# TAREAS DE LA SUITE
# ============================================================================

def qsympl_tasks(seed=0, step_budget=DEFAULT_STEP_BUDGET, oracle_pairs=ORACLE_PAIRS):
    def qs():
        return build_q_spheres(step_budget)

    return [
        ("qsympl.R", lambda: r_matrix_checks(build_R())),
        ("qsympl.overlaps", lambda: overlap_checks(qs())),
        ("qsympl.derive", lambda: derivation_checks(build_R(), qs())),
        ("qsympl.rtt", lambda: rtt_instances(RTT_INSTANCES, seed, build_R(), qs())),
        ("qsympl.projection", lambda: projection_checks(qs(), step_budget)),
        ("qsympl.s4", lambda: verify_s4q_relations(qs())),
        ("qsympl.s4.inversion", lambda: q_inversion_symmetry(qs())),
        ("qsympl.hopf", lambda: hopf_quotient_checks(qs(), build_R())),
        ("qsympl.coaction", lambda: coaction_checks(qs(), step_budget)),
        ("qsympl.coaction.coassociative", lambda: coaction_coassociativity(qs(), step_budget)),
        ("qsympl.unitarity", lambda: unitarity_check(qs(), step_budget)),
        ("qsympl.oracle", lambda: numeric_oracle_agreement(qs(), oracle_pairs, seed=seed)),
        ("qsympl.bianchi", lambda: universal_bianchi_check(step_budget)),
    ]
