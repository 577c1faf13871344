"""
============================================================================
REPRESENTACIONES DE A(S⁴_q) - σ sobre ℓ²(ℕ²) truncado y β trivial
============================================================================

Base |m,n⟩ con 0 ≤ m, n < N (índice m·N + n). La representación σ:

    t |m,n⟩ = q^{2m+4n+4} |m,n⟩
    ā |m,n⟩ = (1−q^{2m+2})^{½} q^{m+2n+1} |m+1,n⟩
    a |m,n⟩ = (1−q^{2m})^{½} q^{m+2n} |m−1,n⟩
    b |m,n⟩ = (1−q^{4n+4})^{½} q^{2(m+n+2)} |m,n+1⟩
    b̄ |m,n⟩ = (1−q^{4n})^{½} q^{2(m+n+1)} |m,n−1⟩

β es la representación unidimensional t, a, b ↦ 0. El emparejamiento de
índice es τ¹(ch₀(p_q)) con τ¹(x) = Tr(σ(x) − β(x)).

Las matrices truncadas solo son fiables lejos del corte: un producto de L
letras es exacto sobre las columnas |m,n⟩ con m, n < N − L.
============================================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sympy.polys.domains import QQ

from .errors import BadParameter, UnknownLetter
from .ncalg import NCPoly
from .presentations import load_expression, load_presentation, load_relations
from .scalars import parse_rational
from .utils.checks import CheckResult

logger = logging.getLogger(__name__)

SUITE = 'pair'

LETTERS = ('t', 'a', 'ab', 'b', 'bb')
ADJOINT_PAIRS = (('a', 'ab'), ('b', 'bb'))

RELATION_TOL = 1e-10
NORM_TOL = 1e-12
RECURSION_TOL = 1e-13
TAIL_CUTOFFS = (10, 20, 40)


# ============================================================================
# OPERADORES TRUNCADOS
# ============================================================================

@dataclass
class TruncatedOperator:
    """Matriz CSR N²×N²; margin = letras acumuladas (columnas no fiables junto al corte)"""
    matrix: sp.csr_matrix
    cutoff: int
    margin: int = 1

    def __add__(self, other):
        return TruncatedOperator((self.matrix + other.matrix).tocsr(), self.cutoff,
                                 max(self.margin, other.margin))

    def __sub__(self, other):
        return TruncatedOperator((self.matrix - other.matrix).tocsr(), self.cutoff,
                                 max(self.margin, other.margin))

    def __matmul__(self, other):
        return TruncatedOperator((self.matrix @ other.matrix).tocsr(), self.cutoff,
                                 self.margin + other.margin)

    def __mul__(self, scale):
        return TruncatedOperator((self.matrix * scale).tocsr(), self.cutoff, self.margin)

    __rmul__ = __mul__

    def adjoint(self):
        return TruncatedOperator(self.matrix.conj().T.tocsr(), self.cutoff, self.margin)

    def interior_columns(self):
        N = self.cutoff
        limit = max(N - self.margin, 0)
        m, n = np.divmod(np.arange(N * N), N)
        return np.flatnonzero((m < limit) & (n < limit))

    def interior_norm(self):
        """Máximo |entrada| sobre las columnas interiores"""
        cols = self.interior_columns()
        if cols.size == 0:
            return 0.0
        block = self.matrix[:, cols]
        return float(abs(block).max()) if block.nnz else 0.0

    def max_norm(self):
        return float(abs(self.matrix).max()) if self.matrix.nnz else 0.0

    def diagonal(self):
        return self.matrix.diagonal()

    def to_json(self):
        return {'cutoff': self.cutoff, 'margin': self.margin, 'nnz': int(self.matrix.nnz),
                'interior_norm': self.interior_norm()}


@dataclass
class SigmaRep:
    q: float
    cutoff: int
    generator_matrices: dict = field(default_factory=dict)

    def __getitem__(self, letter):
        try:
            return self.generator_matrices[letter]
        except KeyError:
            raise UnknownLetter(f"σ no representa la letra '{letter}'") from None

    def identity(self):
        N = self.cutoff
        return TruncatedOperator(sp.identity(N * N, dtype=complex, format='csr'), N, 0)

    def zero(self):
        N = self.cutoff
        return TruncatedOperator(sp.csr_matrix((N * N, N * N), dtype=complex), N, 0)


# ============================================================================
# CONSTRUCCIÓN
# ============================================================================

def _as_float(q):
    if isinstance(q, str):
        q = parse_rational(q)
    if isinstance(q, QQ.dtype):
        return float(q.numerator) / float(q.denominator)
    return float(q)


def a_coefficient(q, m, n):
    """⟨m−1,n| a |m,n⟩ = (1−q^{2m})^{½} q^{m+2n}"""
    return np.sqrt(1.0 - np.power(q, 2 * m)) * np.power(q, m + 2 * n)


def b_coefficient(q, m, n):
    """⟨m,n−1| b̄ |m,n⟩ = (1−q^{4n})^{½} q^{2(m+n+1)}"""
    return np.sqrt(1.0 - np.power(q, 4 * n)) * np.power(q, 2 * (m + n + 1))


def _shift(N, rows, cols, values):
    return sp.csr_matrix((values.astype(complex), (rows, cols)), shape=(N * N, N * N))


def build_sigma(q, N) -> SigmaRep:
    """Matrices de σ(t), σ(a), σ(ā), σ(b), σ(b̄) con corte N"""
    qf = _as_float(q)
    if not 0.0 < qf < 1.0:
        raise BadParameter(f"q debe estar en (0, 1): {q}")
    if int(N) != N or N < 4:
        raise BadParameter(f"el corte debe ser un entero ≥ 4: {N}")
    N = int(N)

    idx = np.arange(N * N)
    m, n = np.divmod(idx, N)

    gens = {'t': TruncatedOperator(
        sp.diags(np.power(qf, 2 * m + 4 * n + 4).astype(complex), format='csr'), N, 0)}

    up_m = m + 1 < N
    gens['ab'] = _shift(N, idx[up_m] + N, idx[up_m], a_coefficient(qf, m[up_m] + 1, n[up_m]))
    down_m = m >= 1
    gens['a'] = _shift(N, idx[down_m] - N, idx[down_m], a_coefficient(qf, m[down_m], n[down_m]))
    up_n = n + 1 < N
    gens['b'] = _shift(N, idx[up_n] + 1, idx[up_n], b_coefficient(qf, m[up_n], n[up_n] + 1))
    down_n = n >= 1
    gens['bb'] = _shift(N, idx[down_n] - 1, idx[down_n], b_coefficient(qf, m[down_n], n[down_n]))
    for letter in ('a', 'ab', 'b', 'bb'):
        gens[letter] = TruncatedOperator(gens[letter], N, 1)

    logger.debug(f"🔧 σ construida: q = {qf}, N = {N} ({N * N} estados)")
    return SigmaRep(qf, N, gens)


@lru_cache(maxsize=None)
def letters_system():
    return load_presentation('s4_q_letters')


# ============================================================================
# REPRESENTAR POLINOMIOS
# ============================================================================

def represent(rep: SigmaRep, poly, system=None) -> TruncatedOperator:
    """σ de un polinomio en las letras t, a, ā, b, b̄ (producto palabra a palabra)"""
    if isinstance(poly, NCPoly):
        system, terms = poly.system, poly.terms
    else:
        terms = poly
        system = system or letters_system()
    letters = []
    for g in system.generators:
        if g.name not in LETTERS:
            raise UnknownLetter(f"{system.name}: '{g.name}' no es una letra de S⁴_q")
        letters.append(g.name)

    result = rep.zero()
    for word, coef in terms.items():
        op = rep.identity()
        for i in word:
            op = op @ rep[letters[i]]
        result = result + op * coef.eval(rep.q)
    return result


def beta(poly, system=None):
    """β: t, a, b ↦ 0; devuelve el escalar exacto del término constante"""
    if isinstance(poly, NCPoly):
        return poly.constant()
    system = system or letters_system()
    return poly.get((), system.scalar(0))


# ============================================================================
# TRAZAS Y EMPAREJAMIENTOS
# ============================================================================

@dataclass
class TraceReport:
    q: object
    cutoff: int | None
    limit: object
    truncated: object
    deficit_bound: object

    def to_json(self):
        return {k: (str(v) if isinstance(v, QQ.dtype) else v) for k, v in self.__dict__.items()}


def closed_form_trace(q, N=None) -> TraceReport:
    """
    Tr σ(t) = q⁴/((1−q²)(1−q⁴)); truncada en N vale
    límite·(1−q^{2N})(1−q^{4N}), con déficit ≤ límite·(q^{2N} + q^{4N}).

    Exacto (QQ) si q es racional.
    """
    if isinstance(q, str):
        q = parse_rational(q)
    limit = q ** 4 / ((1 - q ** 2) * (1 - q ** 4))
    if N is None:
        return TraceReport(q, None, limit, None, None)
    truncated = limit * (1 - q ** (2 * N)) * (1 - q ** (4 * N))
    bound = limit * (q ** (2 * N) + q ** (4 * N))
    return TraceReport(q, N, limit, truncated, bound)


def partial_trace_t(q, N):
    """Σ_{m,n<N} q^{2m+4n+4} (también para N < 4)"""
    qf = _as_float(q)
    m = np.arange(N)
    return float(np.sum(np.power(qf, 2 * m)) * np.sum(np.power(qf, 4 * m)) * qf ** 4)


def trace_t(rep: SigmaRep) -> float:
    return float(np.real(rep['t'].diagonal().sum()))


def tau1(rep: SigmaRep, poly, system=None) -> float:
    """τ¹(x) = Tr(σ(x) − β(x)); τ¹(1) = 0"""
    terms = poly.terms if isinstance(poly, NCPoly) else poly
    rest = {w: c for w, c in terms.items() if w}
    if not rest:
        return 0.0
    system = poly.system if isinstance(poly, NCPoly) else system
    return float(np.real(represent(rep, rest, system).diagonal().sum()))


def ch0_letters():
    """ch₀(p_q) = 2 − q⁻⁴(1−q²)(1−q⁴) t"""
    return load_expression(letters_system(), 'ch0')


def index_pairing(rep: SigmaRep) -> float:
    """⟨[μ],[p]⟩ = τ¹(ch₀(p_q)) = −q⁻⁴(1−q²)(1−q⁴) Tr σ(t)"""
    value = tau1(rep, ch0_letters())
    logger.info(f"✅ Emparejamiento de índice (q = {rep.q}, N = {rep.cutoff}): {value:.12f}")
    return value


def rank_pairing() -> int:
    """τ⁰(ch₀(p_q)) = β(ch₀(p_q)), exacto"""
    value = beta(ch0_letters())
    if value.exponents() not in ([], [0]):
        raise BadParameter(f"β(ch₀) no es constante: {value}")
    c = value.constant_term().coeffs[0]
    if c.denominator != 1:
        raise BadParameter(f"β(ch₀) no es entero: {c}")
    return int(c.numerator)


# ============================================================================
# COMPROBACIONES
# ============================================================================

def relation_residuals(rep: SigmaRep):
    """Residuo interior de cada relación de S⁴_q y de su conjugada"""
    system = letters_system()
    relations = load_relations(system)
    results = []
    for name, raw in sorted(relations.items()):
        for label, terms in ((name, raw), (f"{name}*", system.star_raw(raw))):
            if label.endswith('*') and system.reduce(terms) == system.reduce(raw):
                continue
            norm = represent(rep, terms, system).interior_norm()
            results.append(CheckResult.from_bool(
                f"pair.sigma.rel[{label}]", SUITE, f"σ satisface {label} en el bloque interior",
                norm < RELATION_TOL, detail=f"‖·‖ = {norm:.3e}", residual=norm))
    t = rep['t']
    exact = (t.adjoint().matrix - t.matrix).nnz == 0
    results.append(CheckResult.from_bool("pair.sigma.t_selfadjoint", SUITE, "t̄ = t", exact))
    return results


def adjointness_check(rep: SigmaRep):
    results = []
    for low, high in ADJOINT_PAIRS:
        diff = (rep[high].matrix - rep[low].adjoint().matrix)
        diff.eliminate_zeros()
        results.append(CheckResult.from_bool(
            f"pair.sigma.adjoint[{low}]", SUITE, f"σ({high}) = σ({low})†", diff.nnz == 0,
            residual=float(abs(diff).max()) if diff.nnz else 0.0))
    return results


def norm_check(rep: SigmaRep):
    """‖σ(x)‖ ≤ 1: ‖M‖₂ ≤ (‖M‖₁‖M‖_∞)^{½}"""
    results = []
    for letter in LETTERS:
        M = rep[letter].matrix
        bound = float(np.sqrt(spla.norm(M, 1) * spla.norm(M, np.inf)))
        results.append(CheckResult.from_bool(
            f"pair.sigma.norm[{letter}]", SUITE, f"‖σ({letter})‖ ≤ 1",
            bound <= 1.0 + NORM_TOL, detail=f"cota {bound:.15f}", residual=bound))
    return results


def recursion_check(q, N):
    """a_{m,n+1} = q²a_{m,n}, b_{m+1,n} = q²b_{m,n}, b_{m,n} = q²a_{2n,m}"""
    qf = _as_float(q)
    m, n = np.meshgrid(np.arange(1, N), np.arange(1, N), indexing='ij')
    residuals = {
        'a_n': np.abs(a_coefficient(qf, m, n + 1) - qf ** 2 * a_coefficient(qf, m, n)).max(),
        'b_m': np.abs(b_coefficient(qf, m + 1, n) - qf ** 2 * b_coefficient(qf, m, n)).max(),
        'b_a': np.abs(b_coefficient(qf, m, n) - qf ** 2 * a_coefficient(qf, 2 * n, m)).max(),
    }
    return [CheckResult.from_bool(f"pair.sigma.recursion[{key}]", SUITE,
                                  "recurrencia de coeficientes de σ", value < RECURSION_TOL,
                                  residual=float(value))
            for key, value in residuals.items()]


def _close(x, y, rel=1e-12):
    return abs(x - y) <= rel * max(1.0, abs(y))


def tail_bound_check(q, cutoffs=TAIL_CUTOFFS):
    """|Tr_N σ(t) − Tr σ(t)| ≤ déficit(N) y Tr_N coincide con la fórmula truncada"""
    exact_q = parse_rational(q) if isinstance(q, str) else q
    results = []
    for N in cutoffs:
        report = closed_form_trace(exact_q, N)
        partial = trace_t(build_sigma(q, N))
        limit = _as_float(report.limit)
        truncated = _as_float(report.truncated)
        bound = _as_float(report.deficit_bound)
        deficit = abs(limit - partial)
        holds = deficit <= bound * (1 + 1e-9) + 1e-15 and _close(partial, truncated)
        results.append(CheckResult.from_bool(
            f"pair.trace.tail[N={N}]", SUITE, "déficit de Tr σ(t) acotado por la cola geométrica",
            holds, detail=f"déficit {deficit:.3e} ≤ {bound:.3e}",
            residual={'deficit': deficit, 'bound': bound}))
    return results


def pairing_tasks(q, cutoff, tolerance=RELATION_TOL):
    """Tareas de la suite 'pair'"""
    def pairing():
        rep = build_sigma(q, cutoff)
        value = index_pairing(rep)
        return CheckResult.from_bool(
            "pair.index", SUITE, "⟨[μ],[p]⟩ = −q⁻⁴(1−q²)(1−q⁴) Tr σ(t) = −1",
            abs(value + 1.0) < tolerance, detail=f"valor {value:.15f}", residual=value + 1.0)

    def rank():
        value = rank_pairing()
        return CheckResult.from_bool("pair.rank", SUITE, "τ⁰(ch₀(p_q)) = 2", value == 2,
                                     residual=value)

    def trace():
        rep = build_sigma(q, cutoff)
        report = closed_form_trace(parse_rational(q) if isinstance(q, str) else q, cutoff)
        value = trace_t(rep)
        return CheckResult.from_bool(
            "pair.trace.closed_form", SUITE, "Tr_N σ(t) = q⁴(1−q^{2N})(1−q^{4N})/((1−q²)(1−q⁴))",
            _close(value, _as_float(report.truncated)), residual=report.to_json())

    def sigma_checks():
        rep = build_sigma(q, cutoff)
        return (relation_residuals(rep) + adjointness_check(rep) + norm_check(rep))

    return [
        ("pair.index", pairing),
        ("pair.rank", rank),
        ("pair.trace.closed_form", trace),
        ("pair.sigma", sigma_checks),
        ("pair.sigma.recursion", lambda: recursion_check(q, cutoff)),
        ("pair.trace.tail", lambda: tail_bound_check(q)),
    ]


def pairing_summary(q, cutoff) -> dict:
    """Valores que el subcomando 'pair' añade al informe"""
    rep = build_sigma(q, cutoff)
    report = closed_form_trace(parse_rational(q) if isinstance(q, str) else q, cutoff)
    return {
        'q': rep.q,
        'cutoff': rep.cutoff,
        'pairing': index_pairing(rep),
        'rank': rank_pairing(),
        'trace_truncated': trace_t(rep),
        'trace_closed_form': _as_float(report.truncated),
        'trace_limit': _as_float(report.limit),
        'tail_bound': _as_float(report.deficit_bound),
    }
