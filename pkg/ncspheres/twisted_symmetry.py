"""
============================================================================
SIMETRÍA TORCIDA - U_θ(so(5)) ⊂ U_θ(so(5,1)) actuando sobre S⁴_θ y S⁷_θ′
============================================================================

Los generadores H₁, H₂, E_r (so(5)) y H₀, G_r (conformes) actúan por
derivaciones torcidas: sobre una palabra g₁…gₙ

    X(g₁…gₙ) = Σ_i λ^{−r₂h₁(g₁…g_{i−1})} g₁…X(g_i)…λ^{−r₁h₂(g_{i+1}…gₙ)} gₙ

con h = (h₁, h₂) el peso de Cartan de cada letra y λ^{kh} = μ^{2kh}, es
decir el coproducto Δ(E_r) = E_r⊗λ^{−r₁H₂} + λ^{−r₂H₁}⊗E_r. Sobre formas
X(dg) = d X(g).

En S⁷_θ′ la acción viene de matrices espinoriales: ψ_a ↦ Σ Γ_ab ψ_b y
ψ*_a ↦ Σ Γ̃_ab ψ*_b con Γ̃ = σΓσᵀ. La composición de operadores invierte
el producto de matrices: [X, Y] corresponde a [Γ_Y, Γ_X].
============================================================================
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

from sympy.polys.domains import QQ

from .errors import NonIntegralPhase, UnknownGenerator
from .ncalg import NCPoly, RewriteSystem, add_into
from .ncmatrix import NCMatrix, dagger, mat_d
from .scalars import FIELD_ONE, FIELD_SQRT2, FieldElem, Scalar
from .theta_spheres import (PSI_NAMES, ThetaConfig, build_hodge, build_instanton,
                            build_theta_spheres, dirac_matrices)
from .utils.checks import CheckResult

logger = logging.getLogger(__name__)

SUITE_SO5 = 'so5'
SUITE_SO51 = 'so51'
SUITE_VARIATIONS = 'variations'

LONG_ROOTS = [(1, 1), (1, -1), (-1, -1), (-1, 1)]
SHORT_ROOTS = [(1, 0), (0, 1), (-1, 0), (0, -1)]
POSITIVE_ROOTS = [(1, 1), (1, -1), (1, 0), (0, 1)]

# diagonales de H₁, H₂ en la representación espinorial
CARTAN_DIAG = [
    [QQ(1, 2), QQ(-1, 2), QQ(-1, 2), QQ(1, 2)],
    [QQ(-1, 2), QQ(1, 2), QQ(-1, 2), QQ(1, 2)],
]

INV_SQRT2 = FieldElem(0, 0, QQ(1, 2))

# σ = blockdiag(J′, J′), J′ = [[0, −1], [1, 0]]
SIGMA = [
    [None, -1, None, None],
    [1, None, None, None],
    [None, None, None, -1],
    [None, None, 1, None],
]


def _fmt(x):
    return '0' if x == 0 else f"{x:+d}"


def root_name(prefix, root):
    return f"{prefix}({_fmt(root[0])},{_fmt(root[1])})"


@dataclass(frozen=True)
class TwistedGenerator:
    name: str
    kind: str  # 'H1', 'H2', 'H0', 'E', 'G'
    root: tuple = (0, 0)

    @property
    def is_conformal(self):
        return self.kind in ('H0', 'G')

    @property
    def is_positive(self):
        return self.root in POSITIVE_ROOTS

    def opposite(self):
        return make_generator(self.kind, (-self.root[0], -self.root[1]))


def make_generator(kind, root=(0, 0)):
    if kind in ('H1', 'H2', 'H0'):
        return TwistedGenerator(kind, kind)
    root = tuple(root)
    if kind == 'E' and not is_root(root):
        raise UnknownGenerator(f"E{root}: no es una raíz de so(5)")
    if kind == 'G' and root not in SHORT_ROOTS:
        raise UnknownGenerator(f"G{root}: solo hay G para raíces cortas")
    if kind not in ('E', 'G'):
        raise UnknownGenerator(f"tipo de generador desconocido: {kind!r}")
    return TwistedGenerator(root_name(kind, root), kind, tuple(root))


def so5_generators():
    gens = [make_generator('H1'), make_generator('H2')]
    gens += [make_generator('E', r) for r in LONG_ROOTS + SHORT_ROOTS]
    return gens


def so51_generators():
    return so5_generators() + [make_generator('H0')] + \
        [make_generator('G', r) for r in SHORT_ROOTS]


def is_root(r):
    return tuple(r) in LONG_ROOTS or tuple(r) in SHORT_ROOTS


# ============================================================================
# CORCHETES ESPERADOS
# ============================================================================

@dataclass
class ExpectedBracket:
    """[a, b] = Σ c·X (exacto) o N·X con N a ajustar (fitted); variant = forma corregida"""
    terms: list
    fitted: bool = False
    variant: list | None = None

    @property
    def target(self):
        return self.terms[0][1] if self.terms else None


def _negate(expected):
    variant = None if expected.variant is None else [(-c, g) for c, g in expected.variant]
    return ExpectedBracket([(-c, g) for c, g in expected.terms], expected.fitted, variant)


def expected_bracket(a: TwistedGenerator, b: TwistedGenerator) -> ExpectedBracket:
    cartan = ('H1', 'H2')
    sqrt2 = FIELD_SQRT2
    if a.kind in cartan + ('H0',) and b.kind in cartan + ('H0',):
        return ExpectedBracket([])
    if a.kind in cartan:
        j = cartan.index(a.kind)
        return ExpectedBracket([(FieldElem(b.root[j]), b)] if b.root[j] else [])
    if b.kind in cartan + ('H0',):
        return _negate(expected_bracket(b, a))
    if a.kind == 'H0':
        if b.kind == 'G':
            return ExpectedBracket([(sqrt2, make_generator('E', b.root))])
        if b.root in SHORT_ROOTS:
            return ExpectedBracket([(INV_SQRT2, make_generator('G', b.root))])
        return ExpectedBracket([])
    if a.kind == 'G' and b.kind == 'E':
        return _negate(expected_bracket(b, a))

    r, s = b.root, a.root
    total = (r[0] + s[0], r[1] + s[1])
    if total == (0, 0):
        h1, h2 = make_generator('H1'), make_generator('H2')
        if a.kind == 'E' and b.kind == 'E':
            scale = 1
        elif a.kind == 'G' and b.kind == 'G':
            scale = 2
        else:
            return ExpectedBracket([(sqrt2, make_generator('H0'))])
        terms = [(FieldElem(scale * c), h) for c, h in ((r[0], h1), (r[1], h2)) if c]
        if scale == 2:
            # Jacobi con [H₀,G_r], [H₀,E_r] y [E_{−r},G_r]: [G_{−r}, G_r] = −2(r₁H₁ + r₂H₂)
            return ExpectedBracket(terms, variant=[(-c, h) for c, h in terms])
        return ExpectedBracket(terms)
    if a.kind == 'E' and b.kind == 'G':
        if total in SHORT_ROOTS:
            return ExpectedBracket([(FIELD_ONE, make_generator('G', total))], fitted=True)
        return ExpectedBracket([])
    if is_root(total):
        return ExpectedBracket([(FIELD_ONE, make_generator('E', total))], fitted=True)
    return ExpectedBracket([])


# ============================================================================
# ACCIÓN
# ============================================================================

class TwistedAction:
    """
    Acción de los generadores torcidos sobre S⁴_θ y S⁷_θ′ para un θ dado.

    Las imágenes de los generadores del álgebra se memorizan; la extensión
    a palabras aplica la regla de Leibniz torcida.
    """

    def __init__(self, cfg: ThetaConfig):
        self.cfg = cfg
        self.s4, self.s7 = build_theta_spheres(cfg)
        self.instanton = build_instanton(cfg)
        self.images = self.instanton.images
        self._generator_cache = {}
        self._spinor_cache = {}
        self._psi_rows = {}
        for a, name in enumerate(PSI_NAMES):
            self._psi_rows[self.s7.index(name)] = (a, False)
            self._psi_rows[self.s7.index(name + '*')] = (a, True)

    # ---- matrices espinoriales -------------------------------------------

    def lam_matrix(self, k, j, algebra=None) -> NCMatrix:
        """λ^{k H_j} = diag(μ^{2k·h_j(a)})"""
        algebra = algebra or self.s7
        diag = []
        for h in CARTAN_DIAG[j]:
            exp = 2 * k * h
            if exp.denominator != 1:
                raise NonIntegralPhase(f"λ^{k}H{j + 1} no es potencia entera de μ")
            diag.append(self.cfg.mu_pow(int(exp.numerator)))
        return NCMatrix.from_scalars(algebra, [[diag[a] if a == b else None for b in range(4)]
                                               for a in range(4)])

    def constant_spinor_matrix(self, g: TwistedGenerator, algebra) -> NCMatrix:
        """Γ(g) para los generadores de so(5) (matrices constantes)"""
        if g.kind in ('H1', 'H2'):
            diag = CARTAN_DIAG[0 if g.kind == 'H1' else 1]
            return NCMatrix.from_scalars(algebra, [[diag[a] if a == b else None
                                                    for b in range(4)] for a in range(4)])
        if g.kind != 'E':
            raise ValueError(f"{g.name} no tiene matriz constante")
        if not g.is_positive:
            # la acción sobre los ψ es una antirrepresentación: Γ(X*) = −Γ(X)†
            return -dagger(self.constant_spinor_matrix(g.opposite(), algebra))
        mu = self.cfg.mu
        table = [[None] * 4 for _ in range(4)]
        if g.root == (1, 1):
            table[2][3] = -1
        elif g.root == (1, -1):
            table[1][0] = -mu
        elif g.root == (1, 0):
            table[1][3] = -INV_SQRT2
            table[2][0] = mu * INV_SQRT2
        else:
            table[0][3] = mu.star() * INV_SQRT2
            table[2][1] = INV_SQRT2
        return NCMatrix.from_scalars(algebra, table)

    def spinor_matrix(self, g: TwistedGenerator) -> NCMatrix:
        """Γ(g) sobre S⁷_θ′; las conformes llevan entradas z_μ"""
        if g.name in self._spinor_cache:
            return self._spinor_cache[g.name]
        if not g.is_conformal:
            matrix = self.constant_spinor_matrix(g, self.s7)
        elif g.kind == 'G' and not g.is_positive:
            raise ValueError(f"{g.name} actúa por adjunción, sin matriz Γ propia")
        else:
            gammas = dirac_matrices(self.cfg, self.s7)
            identity = NCMatrix.identity(self.s7, 4)
            z = {name: self.images[self.s4.index(name)] for name in ('z0', 'z1', 'z2')}
            if g.kind == 'H0':
                matrix = gammas['gamma0'] - z['z0'] * identity
            elif g.root == (1, 0):
                matrix = gammas['gamma1'] - z['z1'] * self.lam_matrix(-1, 1)
            else:
                matrix = self.lam_matrix(-1, 0) @ gammas['gamma2'] - z['z2'] * identity
            matrix = matrix * QQ(1, 2)
        self._spinor_cache[g.name] = matrix
        return matrix

    def conjugate_spinor_matrix(self, g: TwistedGenerator) -> NCMatrix:
        """Γ̃ = σΓσᵀ, la acción sobre los ψ*"""
        sigma = NCMatrix.from_scalars(self.s7, SIGMA)
        return sigma @ self.spinor_matrix(g) @ sigma.transpose()

    # ---- acción sobre generadores ----------------------------------------

    def _s4_function_images(self, g: TwistedGenerator):
        s = self.s4.gen
        z0, z1, z1s, z2, z2s = (s(n) for n in ('z0', 'z1', 'z1*', 'z2', 'z2*'))
        lam = self.cfg.lam
        one = self.s4.one()
        if g.kind == 'H1':
            return {'z1': z1, 'z1*': -z1s}
        if g.kind == 'H2':
            return {'z2': z2, 'z2*': -z2s}
        if g.kind == 'H0':
            return {'z0': one - z0 * z0, 'z1': -(z0 * z1), 'z1*': -(z0 * z1s),
                    'z2': -(z0 * z2), 'z2*': -(z0 * z2s)}
        if g.kind == 'E':
            if g.root == (1, 1):
                return {'z1*': z2, 'z2*': -z1}
            if g.root == (1, -1):
                return {'z1*': z2s, 'z2': -z1}
            if g.root == (1, 0):
                return {'z1*': z0 * FIELD_SQRT2, 'z0': -(z1 * INV_SQRT2)}
            return {'z2*': z0 * FIELD_SQRT2, 'z0': -(z2 * INV_SQRT2)}
        if g.root == (1, 0):
            return {'z0': -(z1 * z0), 'z1': -(z1 * z1), 'z1*': one * 2 - z1 * z1s,
                    'z2': -(z1 * z2) * lam.star(), 'z2*': -(z1 * z2s) * lam}
        return {'z0': -(z2 * z0), 'z1': -(z2 * z1), 'z1*': -(z2 * z1s),
                'z2': -(z2 * z2), 'z2*': one * 2 - z2 * z2s}

    def _adjoint_image(self, g: TwistedGenerator, system: RewriteSystem, index: int) -> NCPoly:
        """
        X_{−r}(a) = λ^{r₁h₂(a) + r₂h₁(a) − r₁r₂}·(X_r(a*))* sobre un generador a.

        La conjugación ⋆∘X_r∘⋆ intercambia los dos factores de torsión del
        coproducto; la fase λ^{r₁H₂ + r₂H₁} los devuelve a los de −r.
        """
        positive = g.opposite()
        r1, r2 = positive.root
        h1, h2 = system.word_cartan((index,))
        k = 2 * (r1 * h2 + r2 * h1 - r1 * r2)
        if k.denominator != 1:
            raise NonIntegralPhase(f"{g.name}: fase no entera en {system.generators[index].name}")
        image = self.on_generator(positive, system, system.generators[index].star_partner)
        return image.star() * self.cfg.mu_pow(int(k.numerator))

    def on_generator(self, g: TwistedGenerator, system: RewriteSystem, index: int) -> NCPoly:
        key = (g.name, system.name, index)
        if key in self._generator_cache:
            return self._generator_cache[key]
        gen = system.generators[index]
        if gen.degree == 1:
            value = self.on_generator(g, system, gen.d_partner).d()
        elif g.kind in ('E', 'G') and not g.is_positive and \
                (system is self.s4 or g.kind == 'G'):
            value = self._adjoint_image(g, system, index)
        elif system is self.s4:
            value = self._s4_function_images(g).get(gen.name, system.zero())
        else:
            row, starred = self._psi_rows[index]
            matrix = self.conjugate_spinor_matrix(g) if starred else self.spinor_matrix(g)
            value = system.zero()
            for b, name in enumerate(PSI_NAMES):
                entry = matrix[row, b]
                if not entry.is_zero():
                    value = value + entry * system.gen(name + '*' if starred else name)
        self._generator_cache[key] = value
        return value

    def act(self, g: TwistedGenerator, p, system: RewriteSystem | None = None) -> NCPoly:
        """X(p) por la regla de Leibniz torcida; p es NCPoly o {palabra: Scalar}"""
        if isinstance(p, NCPoly):
            system, terms = p.system, p.terms
        else:
            terms = p
        r1, r2 = g.root
        out = {}
        for word, coef in terms.items():
            for pos, letter in enumerate(word):
                image = self.on_generator(g, system, letter)
                if image.is_zero():
                    continue
                k = -2 * r2 * system.word_cartan(word[:pos])[0] \
                    - 2 * r1 * system.word_cartan(word[pos + 1:])[1]
                if k.denominator != 1:
                    raise NonIntegralPhase(f"{g.name}: fase no entera en "
                                           f"{system.format_word(word)}")
                scale = coef * self.cfg.mu_pow(int(k.numerator))
                for w, c in image.terms.items():
                    add_into(out, word[:pos] + w + word[pos + 1:], c * scale)
        return NCPoly(system, out)

    def act_matrix(self, g, m: NCMatrix) -> NCMatrix:
        return m.map(lambda x: self.act(g, x))

    def commutator(self, a, b, p: NCPoly) -> NCPoly:
        return self.act(a, self.act(b, p)) - self.act(b, self.act(a, p))

    def function_generators(self, system):
        return [system.gen(g.name) for g in system.generators if g.degree == 0]

    def all_generators(self, system):
        return [system.gen(g.name) for g in system.generators]


@lru_cache(maxsize=8)
def twisted_context(cfg: ThetaConfig) -> TwistedAction:
    action = TwistedAction(cfg)
    logger.info(f"🔧 Acción torcida preparada (θ = {cfg.theta})")
    return action


def act(g: TwistedGenerator, p: NCPoly, cfg: ThetaConfig) -> NCPoly:
    return twisted_context(cfg).act(g, p)


# ============================================================================
# CORCHETES
# ============================================================================

def _fit_scalar(values, targets):
    """c con values = c·targets; None si no hay monomio invertible"""
    for v, t in zip(values, targets):
        if t.is_zero():
            continue
        word, tc = min(t.terms.items(), key=lambda item: (len(item[0]), item[0]))
        try:
            return v.coefficient(word) * tc.inverse()
        except ZeroDivisionError:
            return None
    return None


def _suite_for(*gens):
    return SUITE_SO51 if any(g.is_conformal for g in gens) else SUITE_SO5


def _combination(ctx, terms, x):
    out = x.system.zero()
    for c, gen in terms:
        out = out + ctx.act(gen, x) * c
    return out


def bracket_check(a: TwistedGenerator, b: TwistedGenerator, cfg: ThetaConfig):
    """[a, b] como operadores sobre los generadores de S⁴_θ y S⁷_θ′"""
    ctx = twisted_context(cfg)
    expected = expected_bracket(a, b)
    suite = _suite_for(a, b)
    results = []
    for system in (ctx.s4, ctx.s7):
        xs = ctx.all_generators(system)
        values = [ctx.commutator(a, b, x) for x in xs]
        check_id = f"{suite}.bracket[{a.name},{b.name}].{system.name}"
        anchor = f"[{a.name}, {b.name}] sobre {system.name}"
        if expected.fitted:
            targets = [ctx.act(expected.target, x) for x in xs]
            c = _fit_scalar(values, targets)
            if c is None:
                residual = values if all(t.is_zero() for t in targets) else targets
                results.append(CheckResult.from_bool(
                    check_id, suite, anchor + f" ∝ {expected.target.name}",
                    all(v.is_zero() for v in values), residual=residual,
                    detail="sin coeficiente ajustable"))
                continue
            residual = [v - t * c for v, t in zip(values, targets)]
            results.append(CheckResult.from_residuals(
                check_id, suite, anchor + f" = N·{expected.target.name}", residual,
                detail=f"N = {c}"))
            continue
        residual = [v - _combination(ctx, expected.terms, x) for x, v in zip(xs, values)]
        corrected = None
        if expected.variant is not None:
            corrected = [v - _combination(ctx, expected.variant, x) for x, v in zip(xs, values)]
        results.append(CheckResult.from_residuals(check_id, suite, anchor, residual, corrected))
    return results


def matrix_bracket_check(a: TwistedGenerator, b: TwistedGenerator, cfg: ThetaConfig):
    """Γ_{[a,b]} = [Γ_b, Γ_a] en la representación espinorial (solo so(5))"""
    ctx = twisted_context(cfg)
    s4 = ctx.s4
    expected = expected_bracket(a, b)
    ga, gb = ctx.constant_spinor_matrix(a, s4), ctx.constant_spinor_matrix(b, s4)
    value = gb @ ga - ga @ gb
    check_id = f"{SUITE_SO5}.matrix_bracket[{a.name},{b.name}]"
    anchor = f"Γ_[{a.name},{b.name}] = [Γ_{b.name}, Γ_{a.name}]"
    if expected.fitted:
        target = ctx.constant_spinor_matrix(expected.target, s4)
        values = [x for _, _, x in value.entries()]
        targets = [x for _, _, x in target.entries()]
        c = _fit_scalar(values, targets)
        if c is None:
            return CheckResult.from_bool(check_id, SUITE_SO5, anchor, value.is_zero(),
                                         residual=value)
        return CheckResult.from_residuals(check_id, SUITE_SO5, anchor, value - target * c,
                                          detail=f"N = {c}")
    target = NCMatrix.zeros(s4, 4)
    for c, gen in expected.terms:
        target = target + ctx.constant_spinor_matrix(gen, s4) * c
    return CheckResult.from_residuals(check_id, SUITE_SO5, anchor, value - target)


def bracket_pairs(generators):
    return [(a, b) for i, a in enumerate(generators) for b in generators[i + 1:]]


def dirac_bracket_check(cfg: ThetaConfig):
    """¼[γ, γ′] frente a las matrices de so(5)"""
    ctx = twisted_context(cfg)
    s4 = ctx.s4
    gammas = dirac_matrices(cfg, s4)
    spin = {g.name: ctx.constant_spinor_matrix(g, s4) for g in so5_generators()}
    mu = cfg.mu
    two_cos = mu + mu.star()

    def quarter(x, y):
        return (gammas[x] @ gammas[y] - gammas[y] @ gammas[x]) * QQ(1, 4)

    cases = [
        ('gamma1*', 'gamma1', spin['H1'] * 2, None),
        ('gamma2*', 'gamma2', spin['H2'] * 2, None),
        ('gamma1', 'gamma2', spin['E(+1,+1)'] * two_cos, None),
        ('gamma1', 'gamma2*', spin['E(+1,-1)'] * two_cos, None),
        ('gamma1', 'gamma0', spin['E(+1,0)'] * FIELD_SQRT2, None),
        ('gamma2', 'gamma0', spin['E(0,+1)'] * (mu.star() * FIELD_SQRT2),
         ctx.lam_matrix(1, 0, s4) @ spin['E(0,+1)'] * FIELD_SQRT2),
    ]
    results = []
    for x, y, shown, corrected in cases:
        value = quarter(x, y)
        results.append(CheckResult.from_residuals(
            f"{SUITE_SO5}.dirac[{x},{y}]", SUITE_SO5, f"¼[{x}, {y}] en so(5)",
            value - shown, None if corrected is None else value - corrected))
    return results


# ============================================================================
# INVARIANCIA DEL INSTANTÓN
# ============================================================================

def omega_invariance_check(cfg: ThetaConfig):
    """
    Γ̃ᵗλ^{−r₁H₂} + λ^{r₂H₁}Γ = 0 (variante: λ^{−r₂H₁}) y X(ω) = 0 para
    los generadores de so(5).
    """
    ctx = twisted_context(cfg)
    omega = ctx.instanton.omega
    results = []
    for g in so5_generators():
        r1, r2 = g.root
        tilde_t = ctx.conjugate_spinor_matrix(g).transpose()
        gamma = ctx.spinor_matrix(g)
        left = tilde_t @ ctx.lam_matrix(-r1, 1)
        shown = left + ctx.lam_matrix(r2, 0) @ gamma
        corrected = left + ctx.lam_matrix(-r2, 0) @ gamma
        results.append(CheckResult.from_residuals(
            f"{SUITE_SO5}.omega_matrix[{g.name}]", SUITE_SO5,
            f"Γ̃ᵗλ^(−r₁H₂) + λ^(r₂H₁)Γ = 0 para {g.name}", shown, corrected))
        results.append(CheckResult.from_residuals(
            f"{SUITE_SO5}.omega_invariance[{g.name}]", SUITE_SO5,
            f"{g.name}(ω) = 0 con ω = Ψ†dΨ", ctx.act_matrix(g, omega)))
    return results


# ============================================================================
# ESTRUCTURA DE HOPF (REPRESENTACIÓN ESPINORIAL)
# ============================================================================

def _kron(A: NCMatrix, B: NCMatrix) -> NCMatrix:
    n, m = A.shape
    k, l = B.shape
    return NCMatrix(A.algebra, [[A[i // k, j // l] * B[i % k, j % l] for j in range(m * l)]
                                for i in range(n * k)])


class TwistedCoproduct:
    """Δ, S y ε de U_θ(so(5)) evaluados en la representación espinorial"""

    def __init__(self, ctx: TwistedAction):
        self.ctx = ctx
        self.algebra = ctx.s4
        self.identity = NCMatrix.identity(self.algebra, 4)

    def gamma(self, g):
        return self.ctx.constant_spinor_matrix(g, self.algebra)

    def twist_factors(self, g):
        """(λ^{−r₂H₁}, λ^{−r₁H₂})"""
        r1, r2 = g.root
        return (self.ctx.lam_matrix(-r2, 0, self.algebra),
                self.ctx.lam_matrix(-r1, 1, self.algebra))

    def coproduct(self, g) -> NCMatrix:
        left, right = self.twist_factors(g)
        gm = self.gamma(g)
        return _kron(gm, right) + _kron(left, gm)

    def antipode(self, g) -> NCMatrix:
        """S(E) = −λ^{r₂H₁} E λ^{r₁H₂}; la matriz invierte el orden"""
        r1, r2 = g.root
        inv_left = self.ctx.lam_matrix(r2, 0, self.algebra)
        inv_right = self.ctx.lam_matrix(r1, 1, self.algebra)
        return -(inv_right @ self.gamma(g) @ inv_left)

    def antipode_residuals(self, g):
        """m(S⊗id)Δ(g) y m(id⊗S)Δ(g), que deben anularse (ε(g) = 0)"""
        left, right = self.twist_factors(g)
        r1, r2 = g.root
        inv_left = self.ctx.lam_matrix(r2, 0, self.algebra)
        inv_right = self.ctx.lam_matrix(r1, 1, self.algebra)
        gm, s = self.gamma(g), self.antipode(g)
        # ρ(ab) = ρ(b)ρ(a)
        first = right @ s + gm @ inv_left
        second = inv_right @ gm + s @ left
        return first, second


def hopf_checks(cfg: ThetaConfig):
    ctx = twisted_context(cfg)
    hopf = TwistedCoproduct(ctx)
    results = []
    roots = [g for g in so5_generators() if g.kind == 'E']
    for g in roots:
        first, second = hopf.antipode_residuals(g)
        results.append(CheckResult.from_residuals(
            f"{SUITE_SO5}.hopf.antipode[{g.name}]", SUITE_SO5,
            f"m(S⊗id)Δ = m(id⊗S)Δ = ε para {g.name}", [first, second]))
    for g in roots:
        delta_e = hopf.coproduct(g)
        for j, kind in enumerate(('H1', 'H2')):
            h = make_generator(kind)
            delta_h = _kron(hopf.gamma(h), hopf.identity) + _kron(hopf.identity, hopf.gamma(h))
            value = delta_e @ delta_h - delta_h @ delta_e
            results.append(CheckResult.from_residuals(
                f"{SUITE_SO5}.hopf.coproduct[{kind},{g.name}]", SUITE_SO5,
                f"Δ[{kind}, {g.name}] = [Δ{kind}, Δ{g.name}]",
                value - delta_e * g.root[j]))
        if g.is_positive:
            opposite = g.opposite()
            delta_f = hopf.coproduct(opposite)
            value = delta_e @ delta_f - delta_f @ delta_e
            expected = NCMatrix.zeros(hopf.algebra, 16)
            for c, h in expected_bracket(opposite, g).terms:
                gh = hopf.gamma(h)
                expected = expected + (_kron(gh, hopf.identity) + _kron(hopf.identity, gh)) * c
            results.append(CheckResult.from_residuals(
                f"{SUITE_SO5}.hopf.coproduct[{opposite.name},{g.name}]", SUITE_SO5,
                f"Δ[{opposite.name}, {g.name}] = [Δ{opposite.name}, Δ{g.name}]",
                value - expected))
    return results


# ============================================================================
# COMPATIBILIDAD CON LAS RELACIONES Y REDUCCIÓN S⁷ → S⁴
# ============================================================================

def _relations(system: RewriteSystem):
    one = Scalar.one(system.unit_mode)
    out = []
    for lhs, rhs in list(system.rules.items()) + list(system.ideal_rules.items()):
        raw = {w: -c for w, c in rhs.items()}
        raw[lhs] = raw.get(lhs, Scalar.zero(system.unit_mode)) + one
        out.append((system.format_word(lhs), raw))
    return out


def relation_compatibility(g: TwistedGenerator, cfg: ThetaConfig):
    """X(relación) ≡ 0 para cada relación de S⁴_θ y de S⁷_θ′"""
    ctx = twisted_context(cfg)
    suite = _suite_for(g)
    results = []
    for system in (ctx.s4, ctx.s7):
        bad = {}
        for name, raw in _relations(system):
            value = ctx.act(g, raw, system)
            if not value.is_zero():
                bad[name] = value
        results.append(CheckResult.from_bool(
            f"{suite}.relations[{g.name}].{system.name}", suite,
            f"{g.name} conserva las relaciones de {system.name}", not bad,
            residual=bad, detail=f"{len(bad)} relaciones no conservadas" if bad else ''))
    return results


def act7_reduction_check(g: TwistedGenerator, cfg: ThetaConfig):
    """X(imagen de z) = imagen de X(z) para la inclusión S⁴_θ ⊂ S⁷_θ′"""
    ctx = twisted_context(cfg)
    data = ctx.instanton
    suite = _suite_for(g)
    values, targets = [], []
    for z in ctx.function_generators(ctx.s4):
        values.append(ctx.act(g, data.image(z)))
        targets.append(data.image(ctx.act(g, z)))
    residual = [v - t for v, t in zip(values, targets)]
    check_id = f"{suite}.act7_reduction[{g.name}]"
    anchor = f"{g.name} sobre S⁷_θ′ se reduce a {g.name} sobre S⁴_θ"
    if all(r.is_zero() for r in residual):
        return CheckResult.from_bool(check_id, suite, anchor, True)
    c = _fit_scalar(values, targets)
    if c is not None and all((v - t * c).is_zero() for v, t in zip(values, targets)):
        return CheckResult.from_bool(check_id, suite, anchor, False, residual=residual,
                                     detail=f"difieren en un factor global {c}")
    return CheckResult.from_bool(check_id, suite, anchor, False, residual=residual)


def hodge_invariance_check(g: TwistedGenerator, cfg: ThetaConfig):
    """X(∗β) = ∗X(β) sobre la base de 2-formas de S⁴_θ"""
    ctx = twisted_context(cfg)
    h = build_hodge(cfg)
    suite = _suite_for(g)
    residual = {}
    for key, beta in h.basis().items():
        res = ctx.act(g, h.star2(beta)) - h.star2(ctx.act(g, beta))
        if not res.is_zero():
            residual[ctx.s4.format_word(key)] = res
    return CheckResult.from_bool(
        f"{suite}.hodge_invariance[{g.name}]", suite, f"{g.name}∘∗_θ = ∗_θ∘{g.name}",
        not residual, residual=residual)


# ============================================================================
# VARIACIONES CONFORMES
# ============================================================================

# (índice, raíz de G o None para H₀, z, γ, (k, j) de λ^{kH_j} en δF)
VARIATION_TABLE = [
    (0, None, 'z0', 'gamma0', None),
    (1, (1, 0), 'z1', 'gamma1', (1, 1)),
    (2, (0, 1), 'z2', 'gamma2', (1, 0)),
    (3, (-1, 0), 'z1*', 'gamma1*', (-1, 1)),
    (4, (0, -1), 'z2*', 'gamma2*', (-1, 0)),
]


@dataclass
class Variation:
    """
    Variación conforme i-ésima. δα y δF viven en S⁴_θ: su imagen en S⁷_θ′
    es δα = p·γ·dp·p − ½Ψ dz Ψ† porque Ψ·dz = C·dz·Ψ con C diagonal de fases.
    """
    index: int
    generator: TwistedGenerator
    z_name: str
    gamma4: NCMatrix
    row_phases: list
    delta_alpha: NCMatrix
    delta_F: NCMatrix
    delta_F4: NCMatrix
    lam: tuple | None


def lambda_action(poly: NCPoly, k, j, cfg: ThetaConfig) -> NCPoly:
    """λ^{kH_j} sobre S⁴_θ: multiplica cada palabra por λ^{k·peso_j}"""
    system = poly.system
    out = {}
    for word, coef in poly.terms.items():
        weight = system.word_weight(word)[j]
        add_into(out, word, coef * cfg.mu_pow(int(2 * k * weight)))
    return NCPoly(system, out, normalized=True)


def row_phases(ctx: TwistedAction, z_name: str) -> list:
    """c_a con Ψ_a·dz = c_a·dz·Ψ_a en S⁷_θ′ (las filas de Ψ son homogéneas)"""
    data = ctx.instanton
    dz = data.image(ctx.s4.gen(z_name)).d()
    phases = []
    for a in range(4):
        entry = data.Psi[a, 0]
        c = _fit_scalar([entry * dz], [dz * entry])
        phases.append(Scalar.one(ctx.s7.unit_mode) if c is None else c)
    return phases


def _row_phase_residual(ctx: TwistedAction, var: Variation) -> NCMatrix:
    data = ctx.instanton
    dz = data.image(ctx.s4.gen(var.z_name)).d()
    Psi = data.Psi
    rows = [[Psi[a, k] * dz - (dz * Psi[a, k]) * var.row_phases[a] for k in range(2)]
            for a in range(4)]
    return NCMatrix(ctx.s7, rows)


@lru_cache(maxsize=64)
def conformal_variation(cfg: ThetaConfig, index: int) -> Variation:
    """δα_i, δF_i = p·d(δα_i) y la forma cerrada p dp γ dp p − p γ dp dp p"""
    ctx = twisted_context(cfg)
    s4 = ctx.s4
    p = ctx.instanton.p
    dp = mat_d(p)
    _, root, z_name, gamma_name, lam = VARIATION_TABLE[index]
    g = make_generator('H0') if root is None else make_generator('G', root)
    gamma = dirac_matrices(cfg, s4)[gamma_name]
    phases = row_phases(ctx, z_name)
    dz = s4.gen(z_name).d()
    dz_rows = NCMatrix(s4, [[dz * phases[a] if a == b else s4.zero() for b in range(4)]
                            for a in range(4)])
    delta_alpha = p @ gamma @ dp @ p - (dz_rows @ p) * QQ(1, 2)
    delta_F = p @ mat_d(delta_alpha)
    delta_F4 = p @ dp @ gamma @ dp @ p - p @ gamma @ dp @ dp @ p
    logger.debug(f"🔧 Variación {index} ({g.name}) construida (θ = {cfg.theta})")
    return Variation(index, g, z_name, gamma, phases, delta_alpha, delta_F, delta_F4, lam)


def conformal_variations(cfg: ThetaConfig):
    """Las cinco variaciones, i = 0…4"""
    out = tuple(conformal_variation(cfg, i) for i in range(len(VARIATION_TABLE)))
    logger.info(f"✅ Variaciones conformes construidas (θ = {cfg.theta})")
    return out


def _delta_omega_closed(ctx, index, z_name, gamma_name):
    data = ctx.instanton
    s7 = ctx.s7
    Psi = data.Psi
    omega = data.omega
    z = data.image(ctx.s4.gen(z_name))
    gamma = dirac_matrices(ctx.cfg, s7)[gamma_name]
    half_dz = NCMatrix.identity(s7, 2) * (z.d() * QQ(1, 2))
    spinor = dagger(Psi) @ gamma @ mat_d(Psi)
    if index <= 2:
        return spinor - half_dz - z * omega
    return spinor - half_dz - omega * z


def _indices(indices):
    return range(len(VARIATION_TABLE)) if indices is None else indices


def variation_checks(cfg: ThetaConfig, indices=None):
    ctx = twisted_context(cfg)
    data = ctx.instanton
    F0 = data.F0
    s4 = ctx.s4
    p = data.p
    dp = mat_d(p)
    results = []
    for i in _indices(indices):
        var = conformal_variation(cfg, i)
        _, _, z_name, gamma_name, _ = VARIATION_TABLE[i]

        closed = _delta_omega_closed(ctx, i, z_name, gamma_name)
        results.append(CheckResult.from_residuals(
            f"{SUITE_VARIATIONS}.delta_omega[{i}]", SUITE_VARIATIONS,
            f"{var.generator.name}(ω) = Ψ†γ dΨ − ½dz − zω",
            ctx.act_matrix(var.generator, data.omega) - closed))

        results.append(CheckResult.from_residuals(
            f"{SUITE_VARIATIONS}.row_phases[{i}]", SUITE_VARIATIONS,
            f"Ψ·d{z_name} = C·d{z_name}·Ψ", _row_phase_residual(ctx, var),
            detail=f"C = diag({', '.join(str(c) for c in var.row_phases)})"))

        pa = p @ var.delta_alpha
        ap = var.delta_alpha @ p
        results.append(CheckResult.from_residuals(
            f"{SUITE_VARIATIONS}.delta_alpha_projected[{i}]", SUITE_VARIATIONS,
            "p·δα = δα·p = δα", [pa - var.delta_alpha, ap - var.delta_alpha]))

        crucial = p @ (dp @ var.gamma4 + var.gamma4 @ dp) @ dp @ p
        results.append(CheckResult.from_residuals(
            f"{SUITE_VARIATIONS}.crucial[{i}]", SUITE_VARIATIONS,
            "p(dp·γ + γ·dp)dp·p = 0", crucial))

        results.append(CheckResult.from_residuals(
            f"{SUITE_VARIATIONS}.delta_F_from_alpha[{i}]", SUITE_VARIATIONS,
            "p·d(δα) = p dp γ dp p − p γ dp dp p", var.delta_F - var.delta_F4))

        z = s4.gen(z_name)
        if var.lam is None:
            results.append(CheckResult.from_residuals(
                f"{SUITE_VARIATIONS}.delta_F[{i}]", SUITE_VARIATIONS, "δF₀ = −2z₀F₀",
                var.delta_F4 - (z * -2) * F0, None))
            continue
        k, j = var.lam
        shown = (z * -2) * (ctx.lam_matrix(k, j, s4) @ F0)
        variants = {
            'lambda_inverse': var.delta_F4 - (z * -2) * (ctx.lam_matrix(-k, j, s4) @ F0),
            'weight_action': var.delta_F4 - (z * -2) * F0.map(
                lambda x: lambda_action(x, k, j, cfg)),
        }
        results.append(CheckResult.from_variants(
            f"{SUITE_VARIATIONS}.delta_F[{i}]", SUITE_VARIATIONS,
            f"δF_{i} = −2{z_name}·λ^({k:+d}H{j + 1})F₀", var.delta_F4 - shown, variants))
    return results


def variation_self_duality(cfg: ThetaConfig, indices=None):
    """∗_θ δF_i = δF_i"""
    h = build_hodge(cfg)
    results = []
    for i in _indices(indices):
        var = conformal_variation(cfg, i)
        results.append(CheckResult.from_residuals(
            f"{SUITE_VARIATIONS}.self_dual[{i}]", SUITE_VARIATIONS,
            f"∗_θ δF_{i} = δF_{i}", h.star_matrix(var.delta_F4) - var.delta_F4))
    return results


# ============================================================================
# TAREAS POR SUITE
# ============================================================================

def so5_tasks(cfg: ThetaConfig):
    tasks = [("so5.dirac", lambda: dirac_bracket_check(cfg)),
             ("so5.omega", lambda: omega_invariance_check(cfg)),
             ("so5.hopf", lambda: hopf_checks(cfg))]
    gens = so5_generators()
    for a, b in bracket_pairs(gens):
        tasks.append((f"so5.bracket[{a.name},{b.name}]",
                      lambda a=a, b=b: bracket_check(a, b, cfg)))
        tasks.append((f"so5.matrix_bracket[{a.name},{b.name}]",
                      lambda a=a, b=b: matrix_bracket_check(a, b, cfg)))
    for g in gens:
        tasks.append((f"so5.relations[{g.name}]", lambda g=g: relation_compatibility(g, cfg)))
        tasks.append((f"so5.act7_reduction[{g.name}]", lambda g=g: act7_reduction_check(g, cfg)))
    return tasks


def so51_tasks(cfg: ThetaConfig):
    so5 = so5_generators()
    gens = so51_generators()
    tasks = []
    for a, b in bracket_pairs(gens):
        if a in so5 and b in so5:
            continue
        tasks.append((f"so51.bracket[{a.name},{b.name}]",
                      lambda a=a, b=b: bracket_check(a, b, cfg)))
    for g in gens:
        if g in so5:
            tasks.append((f"so51.hodge_invariance[{g.name}]",
                          lambda g=g: hodge_invariance_check(g, cfg)))
            continue
        tasks.append((f"so51.relations[{g.name}]", lambda g=g: relation_compatibility(g, cfg)))
        tasks.append((f"so51.act7_reduction[{g.name}]", lambda g=g: act7_reduction_check(g, cfg)))
        tasks.append((f"so51.hodge_invariance[{g.name}]",
                      lambda g=g: hodge_invariance_check(g, cfg)))
    return tasks


def variation_tasks(cfg: ThetaConfig):
    """Una tarea por variación y comprobación, para repartir entre hilos"""
    tasks = []
    for i in range(len(VARIATION_TABLE)):
        tasks.append((f"variations.checks[{i}]",
                      lambda i=i: variation_checks(cfg, indices=(i,))))
        tasks.append((f"variations.self_dual[{i}]",
                      lambda i=i: variation_self_duality(cfg, indices=(i,))))
    return tasks
