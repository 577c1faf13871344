"""
============================================================================
ESFERAS θ - S⁴_θ, S⁷_θ′, instantón básico y estrella de Hodge
============================================================================

Construye las esferas tóricas a partir de data/s4_theta.yaml y
data/s7_theta.yaml, la proyección p = ΨΨ†, el potencial ω = Ψ†dΨ, la
curvatura F₀ = p·dp·dp y la estrella de Hodge ∗_θ sobre 2-formas
tangenciales, y comprueba las identidades que las relacionan.

Con θ = 0 (μ = 1) todo se reduce al caso conmutativo.
============================================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import NamedTuple

import numpy as np
import yaml
from sympy.polys.domains import QQ

from .errors import BadParameter, InvariantFailed, NotAProjection, NotUnitary, OracleMismatch
from .ncalg import DEFAULT_STEP_BUDGET, NCPoly, RewriteSystem, deformation_phase, homomorphism
from .ncmatrix import (NCMatrix, bianchi_check, dagger, gauge_covariance_check,
                       grassmann_curvature, hermitian_compatibility, is_projection, mat_d, trace)
from .presentations import DATA_DIR, load_presentation
from .scalars import FIELD_SQRT2, FieldElem, Scalar, UnitMode, parse_rational, phase_unit_value
from .utils.checks import CheckResult

logger = logging.getLogger(__name__)

SUITE = 'theta'

# λ′_{ab} tal como se muestra, en exponentes de μ
LAMBDA_PRIME_SHOWN = [
    [0, 0, -1, 1],
    [0, 0, 1, -1],
    [1, -1, 0, 0],
    [-1, 1, 0, 0],
]

S4_THETA = [[0, 1], [-1, 0]]
S7_THETA = [[0, QQ(1, 2)], [QQ(-1, 2), 0]]

PSI_NAMES = ['psi1', 'psi2', 'psi3', 'psi4']
Z_NAMES = ['z0', 'z1', 'z2']


# ============================================================================
# CONFIGURACIÓN
# ============================================================================

@dataclass(frozen=True)
class ThetaConfig:
    theta: object = QQ(1, 3)
    step_budget: int = DEFAULT_STEP_BUDGET

    @classmethod
    def from_value(cls, theta, step_budget=DEFAULT_STEP_BUDGET):
        try:
            value = parse_rational(theta)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise BadParameter(f"θ debe ser racional: {theta!r}") from exc
        return cls(value, step_budget)

    @property
    def classical(self):
        return self.theta == 0

    def mu_pow(self, k):
        if self.classical:
            return Scalar.one(UnitMode.PHASE)
        return Scalar.unit(int(k), UnitMode.PHASE)

    @property
    def mu(self):
        return self.mu_pow(1)

    @property
    def lam(self):
        return self.mu_pow(2)

    def mu_value(self):
        """Valor numérico de μ = e^{iπθ}"""
        return phase_unit_value(self.theta)

    def lambda_table(self):
        """λ_{μν} con z_μ z_ν = λ_{μν} z_ν z_μ (μ, ν = 0, 1, 2)"""
        weights = [(0, 0), (1, 0), (0, 1)]
        return {(m, n): deformation_phase(weights[m], weights[n], S4_THETA,
                                          classical=self.classical)
                for m in range(3) for n in range(3)}

    def lambda_prime_table(self):
        """λ′_{ab} con ψ_a ψ_b = λ′_{ab} ψ_b ψ_a"""
        weights = [(1, 0), (-1, 0), (0, -1), (0, 1)]
        return [[deformation_phase(weights[a], weights[b], S7_THETA, classical=self.classical)
                 for b in range(4)] for a in range(4)]

    def theta_prime_table(self):
        """θ′_{ab} racionales: λ′_{ab} = e^{2πiθ′_{ab}}"""
        weights = [(1, 0), (-1, 0), (0, -1), (0, 1)]
        out = []
        for a in range(4):
            row = []
            for b in range(4):
                value = QQ(0)
                for i in range(2):
                    for j in range(2):
                        value += weights[a][i] * S7_THETA[i][j] * weights[b][j]
                row.append(value * self.theta)
            out.append(row)
        return out


class SpherePair(NamedTuple):
    s4: RewriteSystem
    s7: RewriteSystem


@lru_cache(maxsize=8)
def build_theta_spheres(cfg: ThetaConfig) -> SpherePair:
    """S⁴_θ y S⁷_θ′ con funciones, 1-formas, pesos y reglas de ideal"""
    s4 = load_presentation('s4_theta', classical=cfg.classical, step_budget=cfg.step_budget)
    s7 = load_presentation('s7_theta', classical=cfg.classical, step_budget=cfg.step_budget)
    logger.info(f"🔧 Esferas θ = {cfg.theta}: {s4!r}, {s7!r}")
    return SpherePair(s4, s7)


def overlap_checks(cfg: ThetaConfig):
    results = []
    for system in build_theta_spheres(cfg):
        report = system.check_overlaps()
        results.append(CheckResult.from_bool(
            f"theta.overlaps.{system.name}", SUITE,
            f"solapamientos de {system.name} resueltos ({report.checked})",
            report.resolved, residual=report.ambiguities))
    return results


# ============================================================================
# MATRICES
# ============================================================================

def dirac_matrices(cfg: ThetaConfig, algebra):
    """γ₀, γ₁, γ₂ y sus adjuntas como matrices constantes 4×4"""
    mu = cfg.mu
    two = Scalar.const(2, UnitMode.PHASE)
    g0 = [[1, None, None, None], [None, 1, None, None],
          [None, None, -1, None], [None, None, None, -1]]
    g1 = [[None] * 4 for _ in range(4)]
    g1[1][3] = two
    g1[2][0] = two * mu
    g2 = [[None] * 4 for _ in range(4)]
    g2[0][3] = -two
    g2[2][1] = two * mu.star()
    gammas = {
        'gamma0': NCMatrix.from_scalars(algebra, g0),
        'gamma1': NCMatrix.from_scalars(algebra, g1),
        'gamma2': NCMatrix.from_scalars(algebra, g2),
    }
    gammas['gamma1*'] = dagger(gammas['gamma1'])
    gammas['gamma2*'] = dagger(gammas['gamma2'])
    return gammas


def psi_matrix(s7: RewriteSystem) -> NCMatrix:
    """Ψ = [[ψ₁, −ψ₂*], [ψ₂, ψ₁*], [ψ₃, −ψ₄*], [ψ₄, ψ₃*]]"""
    g = s7.gen
    return NCMatrix(s7, [
        [g('psi1'), -g('psi2*')],
        [g('psi2'), g('psi1*')],
        [g('psi3'), -g('psi4*')],
        [g('psi4'), g('psi3*')],
    ])


def projection_matrix(s4: RewriteSystem, cfg: ThetaConfig) -> NCMatrix:
    """p_θ escrita en los generadores de S⁴_θ"""
    g = s4.gen
    half = QQ(1, 2)
    one = s4.one()
    mu, mub = cfg.mu, cfg.mu.star()
    z = s4.zero()
    rows = [
        [one + g('z0'), z, g('z1'), -(g('z2*') * mub)],
        [z, one + g('z0'), g('z2'), g('z1*') * mu],
        [g('z1*'), g('z2*'), one - g('z0'), z],
        [-(g('z2') * mu), g('z1') * mub, z, one - g('z0')],
    ]
    return NCMatrix(s4, [[x * half for x in row] for row in rows])


def subalgebra_images(s4: RewriteSystem, s7: RewriteSystem, cfg: ThetaConfig):
    """Imágenes de z_μ, z_μ* en S⁷_θ′ (índice de S⁴ → NCPoly de S⁷)"""
    g = s7.gen
    mu = cfg.mu
    z0 = g('psi1*') * g('psi1') + g('psi2*') * g('psi2') \
        - g('psi3*') * g('psi3') - g('psi4*') * g('psi4')
    z1 = (g('psi3*') * g('psi1') * mu + g('psi2*') * g('psi4')) * 2
    z2 = (-(g('psi1*') * g('psi4')) + g('psi3*') * g('psi2') * mu.star()) * 2
    images = {
        s4.index('z0'): z0,
        s4.index('z1'): z1,
        s4.index('z2'): z2,
        s4.index('z1*'): z1.star(),
        s4.index('z2*'): z2.star(),
    }
    return images


def pulled_back_weight(weight):
    """Peso en 𝕋̃² de un peso (a, b) de 𝕋² vía p(s₁,s₂) = (s₁+s₂, −s₁+s₂)"""
    a, b = weight
    return (parse_rational(a) - parse_rational(b), parse_rational(a) + parse_rational(b))


# ============================================================================
# SUBÁLGEBRA Y CLIFFORD
# ============================================================================

def verify_subalgebra_map(cfg: ThetaConfig):
    s4, s7 = build_theta_spheres(cfg)
    images = subalgebra_images(s4, s7, cfg)
    one = Scalar.one(s4.unit_mode)
    results = []

    # relaciones de S⁴_θ entre funciones
    relations = {}
    for lhs, rhs in list(s4.rules.items()) + list(s4.ideal_rules.items()):
        if s4.word_degree(lhs):
            continue
        raw = dict(rhs)
        raw = {w: -c for w, c in raw.items()}
        raw[lhs] = raw.get(lhs, Scalar.zero(s4.unit_mode)) + one
        relations[s4.format_word(lhs)] = raw
    for name, raw in sorted(relations.items()):
        residual = homomorphism(raw, images, s7, source=s4)
        results.append(CheckResult.from_residuals(
            f"theta.subalgebra.rel[{name}]", SUITE,
            f"relación '{name}' de S⁴_θ bajo z ↦ ψ*ψ", residual))

    sphere = dict(s4.sphere_relation)
    sphere[()] = sphere.get((), Scalar.zero(s4.unit_mode)) - one
    residual = homomorphism(sphere, images, s7, source=s4)
    results.append(CheckResult.from_residuals(
        "theta.subalgebra.sphere", SUITE, "z₀² + z₁*z₁ + z₂*z₂ = 1 en S⁷_θ′", residual))

    # z₀ central
    z0 = images[s4.index('z0')]
    central = [z0 * s7.gen(n) - s7.gen(n) * z0 for n in PSI_NAMES + [p + '*' for p in PSI_NAMES]]
    results.append(CheckResult.from_residuals(
        "theta.subalgebra.z0_central", SUITE, "z₀ central en S⁷_θ′", central))

    # z_μ = Σ ψ*_a (γ_μ)_{ab} ψ_b
    gammas = dirac_matrices(cfg, s7)
    for zname, gname in [('z0', 'gamma0'), ('z1', 'gamma1'), ('z2', 'gamma2'),
                         ('z1*', 'gamma1*'), ('z2*', 'gamma2*')]:
        gamma = gammas[gname]
        total = s7.zero()
        for i, j, entry in gamma.nonzero_entries():
            total = total + s7.gen(PSI_NAMES[i] + '*') * entry * s7.gen(PSI_NAMES[j])
        residual = total - images[s4.index(zname)]
        results.append(CheckResult.from_residuals(
            f"theta.subalgebra.dirac[{zname}]", SUITE,
            f"{zname} = Σ ψ*_a ({gname})_ab ψ_b", residual))

    # pesos
    mismatched = []
    for zname in ['z0', 'z1', 'z2', 'z1*', 'z2*']:
        expected = pulled_back_weight(s4.generator(zname).weight)
        got = images[s4.index(zname)].weights()
        if got != {expected}:
            mismatched.append((zname, [str(x) for x in expected], [[str(x) for x in w] for w in got]))
    results.append(CheckResult.from_bool(
        "theta.subalgebra.weights", SUITE, "pesos de z_μ vía el recubrimiento doble",
        not mismatched, residual=mismatched))

    # λ′ frente a la matriz mostrada
    table = cfg.lambda_prime_table()
    shown = [[cfg.mu_pow(k) for k in row] for row in LAMBDA_PRIME_SHOWN]
    bad = [(a, b) for a in range(4) for b in range(4) if table[a][b] != shown[a][b]]
    results.append(CheckResult.from_bool(
        "theta.lambda_prime", SUITE, "λ′_{ab} derivada de los pesos", not bad, residual=bad))
    return results


def verify_clifford(cfg: ThetaConfig):
    s4, _ = build_theta_spheres(cfg)
    gammas = dirac_matrices(cfg, s4)
    lam = cfg.lambda_table()
    identity4 = NCMatrix.identity(s4, 4)
    results = []
    for m in (1, 2):
        for n in (1, 2):
            gm, gn = gammas[f'gamma{m}'], gammas[f'gamma{n}']
            gns = gammas[f'gamma{n}*']
            res = gm @ gn + (gn @ gm) * lam[(m, n)]
            results.append(CheckResult.from_residuals(
                f"theta.clifford.anti[{m}{n}]", SUITE,
                f"γ{m}γ{n} + λ_{m}{n} γ{n}γ{m} = 0", res))
            expected = identity4 * (4 if m == n else 0)
            res = gm @ gns + (gns @ gm) * lam[(n, m)] - expected
            results.append(CheckResult.from_residuals(
                f"theta.clifford.mixed[{m}{n}*]", SUITE,
                f"γ{m}γ{n}* + λ_{n}{m} γ{n}*γ{m} = 4δ", res))

    def comm(a, b):
        return a @ b - b @ a

    product = comm(gammas['gamma1'], gammas['gamma1*']) @ comm(gammas['gamma2'], gammas['gamma2*'])
    shown = product * QQ(-1, 4) - gammas['gamma0']
    corrected = product * QQ(-1, 16) - gammas['gamma0']
    results.append(CheckResult.from_residuals(
        "theta.clifford.grading", SUITE, "γ₀ = −¼[γ₁,γ₁*][γ₂,γ₂*] (corregida: −1/16)",
        shown, corrected))
    results.append(CheckResult.from_residuals(
        "theta.clifford.grading_square", SUITE, "γ₀² = 1",
        gammas['gamma0'] @ gammas['gamma0'] - identity4))
    return results


# ============================================================================
# INSTANTÓN BÁSICO
# ============================================================================

@dataclass
class InstantonData:
    cfg: ThetaConfig
    s4: RewriteSystem
    s7: RewriteSystem
    Psi: NCMatrix
    p: NCMatrix
    omega: NCMatrix
    F0: NCMatrix
    p7: NCMatrix = None
    F_omega: NCMatrix = None
    images: dict = field(default_factory=dict)

    def image(self, poly: NCPoly) -> NCPoly:
        """Transporta un elemento de S⁴_θ a S⁷_θ′"""
        return homomorphism(poly, self.images, self.s7)

    def image_matrix(self, m: NCMatrix) -> NCMatrix:
        return NCMatrix(self.s7, [[self.image(x) for x in row] for row in m.rows])


def _require_zero(name, residual):
    if not residual.is_zero():
        logger.error(f"❌ Invariante del instantón: {name}")
        raise InvariantFailed(name, residual)


@lru_cache(maxsize=8)
def build_instanton(cfg: ThetaConfig) -> InstantonData:
    s4, s7 = build_theta_spheres(cfg)
    images = subalgebra_images(s4, s7, cfg)

    Psi = psi_matrix(s7)
    Psi_dag = dagger(Psi)
    _require_zero("Ψ†Ψ = I₂", Psi_dag @ Psi - NCMatrix.identity(s7, 2))

    p = projection_matrix(s4, cfg)
    if not is_projection(p):
        raise InvariantFailed("p² = p = p†", p @ p - p)
    p7 = Psi @ Psi_dag

    data = InstantonData(cfg, s4, s7, Psi, p, None, None, p7=p7, images=images)
    _require_zero("ΨΨ† = p (entrada a entrada)", p7 - data.image_matrix(p))

    omega = Psi_dag @ mat_d(Psi)
    _require_zero("tr ω = 0", trace(omega))
    _require_zero("ω† = −ω", dagger(omega) + omega)
    charged = [(i, j) for i, j, x in omega.nonzero_entries()
               if x.weights() - {(QQ(0), QQ(0))}]
    if charged:
        raise InvariantFailed(f"entradas de ω con peso no nulo: {charged}")

    try:
        F0 = grassmann_curvature(p)
    except NotAProjection as exc:
        raise InvariantFailed(str(exc)) from exc

    F_omega = mat_d(omega) + omega @ omega
    dp7 = mat_d(p7)
    F_p7 = p7 @ dp7 @ dp7
    _require_zero("Ψ F_ω Ψ† = F_p", Psi @ F_omega @ Psi_dag - F_p7)
    _require_zero("F₀ transportada = F_p", data.image_matrix(F0) - F_p7)

    data.omega, data.F0, data.F_omega = omega, F0, F_omega
    logger.info(f"✅ Instantón básico construido (θ = {cfg.theta})")
    return data


def instanton_checks(cfg: ThetaConfig):
    """Invariantes del instantón como CheckResult (build_instanton lanza si fallan)"""
    data = build_instanton(cfg)
    out = [CheckResult.from_bool("theta.instanton.build", SUITE,
                                 "Ψ†Ψ = 1, p = ΨΨ†, p² = p = p†, tr ω = 0, ω† = −ω, "
                                 "Ψ F_ω Ψ† = F_p", True)]
    weights = {w for _, _, x in data.p.nonzero_entries() for w in x.weights()}
    out.append(CheckResult.from_bool(
        "theta.instanton.p13", SUITE, "p₁₃ = ½ z₁",
        data.p[0, 2] == data.s4.gen('z1') * QQ(1, 2)))
    out.append(CheckResult.from_bool(
        "theta.instanton.p_weights", SUITE, "pesos de las entradas de p",
        all(len(x.weights()) == 1 for _, _, x in data.p.nonzero_entries()),
        residual=[[str(c) for c in w] for w in weights]))
    bianchi = bianchi_check(data.p, data.F0)
    out.append(CheckResult.from_residuals(
        "theta.instanton.bianchi", SUITE, "[∇₀, F₀] = 0 sobre ξ_j = p e_j", bianchi.residuals))
    out.append(CheckResult.from_bool(
        "theta.instanton.omega_hermitian", SUITE, "d + ω compatible con ⟨,⟩ (ω† = −ω)",
        hermitian_compatibility(data.omega)))
    u = su2_exact_matrix(data.s7)
    trivial = NCMatrix.identity(data.s7, 2)
    out.append(CheckResult.from_residuals(
        "theta.instanton.gauge_covariance", SUITE, "F(ω^u) = u†F(ω)u, u ∈ SU(2) constante",
        gauge_covariance_check(trivial, u, data.omega)))
    return out


def su2_exact_matrix(algebra) -> NCMatrix:
    """w = (1/√2)[[1, i], [i, 1]] ∈ SU(2) con entradas exactas"""
    s = FIELD_SQRT2 * QQ(1, 2)
    si = s * FieldElem(0, 1)
    return NCMatrix.from_scalars(algebra, [[s, si], [si, s]])


# ============================================================================
# ACCIÓN DE SU(2) (NUMÉRICA)
# ============================================================================

def numeric_table(poly: NCPoly, u0) -> dict:
    return {w: c.eval(u0) for w, c in poly.terms.items()}


def _num_add(a, b, scale=1.0):
    out = dict(a)
    for w, c in b.items():
        out[w] = out.get(w, 0j) + scale * c
    return out


def _num_mul(system, a, b, u0):
    out = {}
    one = Scalar.one(system.unit_mode)
    for w1, c1 in a.items():
        for w2, c2 in b.items():
            for w, c in system.normal_form_raw({w1 + w2: one}).items():
                out[w] = out.get(w, 0j) + c1 * c2 * c.eval(u0)
    return out


def _num_star(system, a, u0):
    out = {}
    one = Scalar.one(system.unit_mode)
    for w, c in a.items():
        for w2, c2 in system.normal_form_raw(system.star_raw({w: one})).items():
            out[w2] = out.get(w2, 0j) + np.conj(c) * c2.eval(u0)
    return out


def _num_d(system, a, u0):
    out = {}
    one = Scalar.one(system.unit_mode)
    for w, c in a.items():
        for w2, c2 in system.normal_form_raw(system.differential_raw({w: one})).items():
            out[w2] = out.get(w2, 0j) + c * c2.eval(u0)
    return out


def _num_distance(a, b):
    keys = set(a) | set(b)
    return max((abs(a.get(k, 0j) - b.get(k, 0j)) for k in keys), default=0.0)


def check_special_unitary(w, tol=1e-12):
    w = np.asarray(w, dtype=complex)
    if w.shape != (2, 2):
        raise NotUnitary(f"w debe ser 2×2, no {w.shape}")
    if not np.allclose(w.conj().T @ w, np.eye(2), atol=tol) or abs(np.linalg.det(w) - 1) > tol:
        raise NotUnitary("w†w ≠ I o det w ≠ 1")
    return w


def su2_action_check(cfg: ThetaConfig, w, tol=1e-12):
    """
    p invariante bajo Ψ ↦ Ψw y ω ↦ w†ωw (w constante), evaluando los
    coeficientes en μ = e^{iπθ}.
    """
    w = check_special_unitary(w, tol)
    data = build_instanton(cfg)
    s7 = data.s7
    u0 = cfg.mu_value()
    Psi = [[numeric_table(data.Psi[a, j], u0) for j in range(2)] for a in range(4)]

    Psi_w = [[{} for _ in range(2)] for _ in range(4)]
    for a in range(4):
        for j in range(2):
            for l in range(2):
                Psi_w[a][j] = _num_add(Psi_w[a][j], Psi[a][l], w[l, j])
    Psi_w_star = [[_num_star(s7, Psi_w[a][j], u0) for j in range(2)] for a in range(4)]

    p_dist = 0.0
    for a in range(4):
        for b in range(4):
            entry = {}
            for j in range(2):
                entry = _num_add(entry, _num_mul(s7, Psi_w[a][j], Psi_w_star[b][j], u0))
            p_dist = max(p_dist, _num_distance(entry, numeric_table(data.p7[a, b], u0)))

    omega = [[numeric_table(data.omega[k, l], u0) for l in range(2)] for k in range(2)]
    w_omega_dist = 0.0
    for i in range(2):
        for j in range(2):
            lhs = {}
            for a in range(4):
                lhs = _num_add(lhs, _num_mul(s7, Psi_w_star[a][i], _num_d(s7, Psi_w[a][j], u0), u0))
            rhs = {}
            for k in range(2):
                for l in range(2):
                    rhs = _num_add(rhs, omega[k][l], np.conj(w[k, i]) * w[l, j])
            w_omega_dist = max(w_omega_dist, _num_distance(lhs, rhs))

    return [
        CheckResult.from_bool("theta.su2.p_invariant", SUITE, "p(Ψw) = p(Ψ)",
                              p_dist < tol, detail=f"distancia {p_dist:.2e}",
                              residual=p_dist),
        CheckResult.from_bool("theta.su2.omega_covariant", SUITE, "ω(Ψw) = w†ωw + w†dw",
                              w_omega_dist < tol, detail=f"distancia {w_omega_dist:.2e}",
                              residual=w_omega_dist),
    ]


def standard_su2_samples(angles=(0.3, 0.7)):
    """I, diag(e^{iφ}, e^{−iφ}) y una rotación real"""
    phi, rot = angles
    return {
        'identidad': np.eye(2, dtype=complex),
        'diagonal': np.diag([np.exp(1j * phi), np.exp(-1j * phi)]),
        'rotacion': np.array([[np.cos(rot), -np.sin(rot)], [np.sin(rot), np.cos(rot)]],
                             dtype=complex),
    }


# ============================================================================
# ESTRELLA DE HODGE
# ============================================================================

def _load_hodge_data():
    with open(DATA_DIR / 'hodge_s4.yaml', 'r', encoding='utf-8') as f:
        return yaml.safe_load(f)


def _omega_form(r, r_prime):
    return int(parse_rational(r[0]) * parse_rational(r_prime[1])
               - parse_rational(r[1]) * parse_rational(r_prime[0]))


@dataclass
class HodgeTable:
    system: RewriteSystem
    table: dict
    orientation: int

    def star2(self, X: NCPoly) -> NCPoly:
        """∗_θ lineal a izquierda sobre 2-formas en forma normal"""
        system = self.system
        out = system.zero()
        for word, coef in X.terms.items():
            k = next((i for i, g in enumerate(word) if system.generators[g].degree), len(word))
            funcs, forms = word[:k], word[k:]
            if len(forms) != 2 or forms not in self.table:
                raise ValueError(f"∗_θ solo actúa sobre 2-formas: {system.format_word(word)}")
            out = out + NCPoly(system, {funcs: coef}, normalized=True) * self.table[forms]
        return out

    def star_matrix(self, m: NCMatrix) -> NCMatrix:
        return m.map(self.star2)

    def reversed(self) -> HodgeTable:
        """Tabla con la orientación opuesta"""
        return HodgeTable(self.system, {k: -v for k, v in self.table.items()}, -self.orientation)

    def basis(self):
        return {k: NCPoly(self.system, {k: Scalar.one(self.system.unit_mode)})
                for k in sorted(self.table)}

    def involution_residuals(self):
        """∗∘∗ − id sobre la base (módulo R − 1 y dR)"""
        return {self.system.format_word(k): self.star2(self.star2(b)) - b
                for k, b in self.basis().items()}

    def to_json(self):
        return {self.system.format_word(k): v.to_json() for k, v in sorted(self.table.items())}


@lru_cache(maxsize=8)
def build_hodge(cfg: ThetaConfig, oracle_points=20, seed=0, tol=1e-10) -> HodgeTable:
    s4, _ = build_theta_spheres(cfg)
    data = _load_hodge_data()
    if oracle_points:
        hodge_oracle_check(oracle_points, seed, tol, data=data)
    orientation = int(data['orientation'])
    table = {}
    for entry in data['table']:
        l, m = entry['key']
        rl, rm = s4.generator(l).weight, s4.generator(m).weight
        value = s4.zero()
        for coef, k, a, b in entry['terms']:
            rk, ra, rb = (s4.generator(n).weight for n in (k, a, b))
            phase = cfg.mu_pow(-_omega_form(rk, ra) - _omega_form(rk, rb) - _omega_form(ra, rb))
            term = s4.gen(k) * s4.gen(a) * s4.gen(b)
            value = value + term * (phase * parse_rational(str(coef)))
        value = value * (cfg.mu_pow(_omega_form(rl, rm)) * orientation)
        # solo reordenación: la clave no pasa por la proyección tangencial
        (word, c), = s4.reduce({s4.word(l, m): Scalar.one(s4.unit_mode)}).items()
        table[word] = value * c.inverse()
    hodge = HodgeTable(s4, table, orientation)
    residuals = hodge.involution_residuals()
    bad = [k for k, v in residuals.items() if not v.is_zero()]
    if bad:
        raise InvariantFailed(f"∗∘∗ ≠ id en {bad}", {k: residuals[k] for k in bad})
    logger.info(f"✅ Estrella de Hodge θ = {cfg.theta}: ∗∘∗ = id en {len(table)} 2-formas")
    return hodge


# ---- oráculo numérico clásico ---------------------------------------------

_FORM_VECTORS = {
    'dz0': [1, 0, 0, 0, 0],
    'dz1': [0, 1, 1j, 0, 0],
    'dz1*': [0, 1, -1j, 0, 0],
    'dz2': [0, 0, 0, 1, 1j],
    'dz2*': [0, 0, 0, 1, -1j],
}


def _levi_civita4():
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


def _function_values(x):
    return {
        'z0': x[0],
        'z1': x[1] + 1j * x[2],
        'z1*': x[1] - 1j * x[2],
        'z2': x[3] + 1j * x[4],
        'z2*': x[3] - 1j * x[4],
    }


def _wedge(a, b):
    va = np.asarray(_FORM_VECTORS[a], dtype=complex)
    vb = np.asarray(_FORM_VECTORS[b], dtype=complex)
    return np.outer(va, vb) - np.outer(vb, va)


def _oriented_frame(x, rng):
    """Marco tangente E (5×4) con (N, E) positivamente orientado"""
    basis = np.column_stack([x, rng.standard_normal((5, 4))])
    Q, _ = np.linalg.qr(basis)
    if Q[:, 0] @ x < 0:
        Q[:, 0] = -Q[:, 0]
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    return Q[:, 1:]


def hodge_oracle_check(points=20, seed=0, tol=1e-10, data=None):
    """
    Compara la tabla clásica (orientación +1) con ∗ de la métrica redonda
    en un marco tangente, ∗B_ij = ½ ε_ijkl B_kl. Lanza OracleMismatch.
    """
    data = data or _load_hodge_data()
    rng = np.random.default_rng(seed)
    eps = _levi_civita4()
    worst = 0.0
    for _ in range(points):
        x = rng.standard_normal(5)
        x /= np.linalg.norm(x)
        E = _oriented_frame(x, rng)
        values = _function_values(x)
        for entry in data['table']:
            l, m = entry['key']
            B = E.T @ _wedge(l, m) @ E
            expected = 0.5 * np.einsum('ijkl,kl->ij', eps, B)
            candidate = np.zeros((5, 5), dtype=complex)
            for coef, k, a, b in entry['terms']:
                candidate += float(parse_rational(str(coef))) * values[k] * _wedge(a, b)
            worst = max(worst, float(np.max(np.abs(E.T @ candidate @ E - expected))))
    if worst > tol:
        raise OracleMismatch(f"la tabla de Hodge difiere del oráculo: {worst:.3e}")
    logger.debug(f"✅ Oráculo de Hodge: desviación máxima {worst:.2e} en {points} puntos")
    return worst


# ---- autodualidad -----------------------------------------------------------

def self_duality_residual(F: NCMatrix, h: HodgeTable) -> NCMatrix:
    return h.star_matrix(F) - F


def self_duality_check(data: InstantonData, h: HodgeTable) -> bool:
    return self_duality_residual(data.F0, h).is_zero()


def anti_self_dual_form(h: HodgeTable, key=None) -> NCPoly:
    """Y = β − ∗β, que ∗ manda a −Y"""
    basis = h.basis()
    beta = basis[key] if key is not None else next(iter(basis.values()))
    return beta - h.star2(beta)


def topological_charge_density(data: InstantonData, h: HodgeTable) -> NCPoly:
    """tr(F₀ ∗F₀) como 4-forma"""
    return trace(data.F0 @ h.star_matrix(data.F0))


def hodge_checks(cfg: ThetaConfig, oracle_points=20, seed=0, tol=1e-10):
    data = build_instanton(cfg)
    h = build_hodge(cfg, oracle_points, seed, tol)
    results = [CheckResult.from_bool("theta.hodge.involution", SUITE,
                                     "∗_θ∘∗_θ = id en 2-formas tangenciales", True)]
    results.append(CheckResult.from_residuals(
        "theta.hodge.self_dual_F0", SUITE, "∗_θF₀ = F₀", self_duality_residual(data.F0, h)))
    flipped = h.reversed()
    results.append(CheckResult.from_residuals(
        "theta.hodge.reversed_orientation", SUITE, "con la orientación opuesta ∗F₀ = −F₀",
        flipped.star_matrix(data.F0) + data.F0))
    Y = anti_self_dual_form(h)
    results.append(CheckResult.from_residuals(
        "theta.hodge.anti_self_dual", SUITE, "Y = β − ∗β ↦ −Y", h.star2(Y) + Y))
    results.append(CheckResult.from_bool(
        "theta.hodge.zero", SUITE, "la 2-forma nula es autodual",
        h.star2(data.s4.zero()).is_zero()))
    equivariant = all(v.weights() <= {data.s4.word_weight(k)} for k, v in h.table.items())
    results.append(CheckResult.from_bool(
        "theta.hodge.equivariant", SUITE, "∗_θ conserva el peso de 𝕋²", equivariant))
    density = topological_charge_density(data, h)
    square = trace(data.F0 @ data.F0)
    results.append(CheckResult.from_residuals(
        "theta.hodge.charge_density", SUITE, "tr(F₀∗F₀) = tr(F₀²), de peso 0",
        [density - square, *(() if density.weights() <= {(QQ(0), QQ(0))} else (density,))]))
    return results


# ============================================================================
# TAREAS DE LA SUITE
# ============================================================================

def theta_tasks(cfg: ThetaConfig, oracle_points=20, su2_angles=(0.3, 0.7), seed=0,
                tolerance=1e-10):
    def su2_checks():
        results = []
        for name, w in standard_su2_samples(tuple(su2_angles)).items():
            for r in su2_action_check(cfg, w):
                r.check_id = f"{r.check_id}[{name}]"
                results.append(r)
        return results

    return [
        ("theta.overlaps", lambda: overlap_checks(cfg)),
        ("theta.subalgebra", lambda: verify_subalgebra_map(cfg)),
        ("theta.clifford", lambda: verify_clifford(cfg)),
        ("theta.instanton", lambda: instanton_checks(cfg)),
        ("theta.su2", su2_checks),
        ("theta.hodge", lambda: hodge_checks(cfg, oracle_points, seed, tolerance)),
    ]
