"""
Presentaciones declarativas de álgebras (archivos YAML en ncspheres/data).

Formato:

    name: S4_theta
    unit_mode: phase            # phase | real
    generators:
      - {name: z1, degree: 0, weight: [1, 0], star: "z1*", d: dz1}
    quasi_commutation:          # opcional: reglas generadas desde Θ
      theta_matrix: [[0, 1], [-1, 0]]
    rules:                      # opcional: reglas explícitas "palabra -> poli"
      - "x3 x2 -> q^-2 x2 x3 + q^-2 (q^-1 - q) x1 x4"
    close_under_star: true      # añade las reglas conjugadas
    ideal:
      - "z2* z2 -> 1 - z0 z0 - z1* z1"
    sphere: "z0 z0 + z1* z1 + z2* z2"

Los polinomios se escriben por yuxtaposición. Literales escalares:
racionales p/q, i, sqrt2, u, q, mu (= u), lam (= u²), con exponentes ^k.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path

import yaml

from .errors import PresentationError
from .ncalg import (DEFAULT_STEP_BUDGET, Generator, RewriteSystem,
                    graded_phase_rules, raw_add, raw_mul, raw_scale, word_key)
from .scalars import FIELD_I, FIELD_SQRT2, Scalar, UnitMode, parse_rational

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / 'data'

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*\*?)"
                    r"|(?P<op>[-+^()]))")

SCALAR_SYMBOLS = {
    'i': lambda mode: Scalar.const(FIELD_I, mode),
    'sqrt2': lambda mode: Scalar.const(FIELD_SQRT2, mode),
    'u': lambda mode: Scalar.unit(1, mode),
    'q': lambda mode: Scalar.unit(1, mode),
    'mu': lambda mode: Scalar.unit(1, mode),
    'lam': lambda mode: Scalar.unit(2, mode),
}


def _tokenize(text):
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise PresentationError(f"carácter inesperado en '{text}' (posición {pos})")
        pos = match.end()
        kind = match.lastgroup
        tokens.append((kind, match.group(kind)))
    return tokens


class _PolyParser:
    """Descenso recursivo sobre polinomios crudos {palabra: Scalar}"""

    def __init__(self, names, mode, text):
        self.names = names
        self.mode = mode
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        result = self.expr()
        if self.pos != len(self.tokens):
            raise PresentationError(f"sobra texto en '{self.text}'")
        return result

    def expr(self):
        sign = 1
        kind, val = self.peek()
        if kind == 'op' and val in '+-':
            self.take()
            sign = -1 if val == '-' else 1
        acc = raw_scale(self.term(), Scalar.const(sign, self.mode))
        while True:
            kind, val = self.peek()
            if kind == 'op' and val in '+-':
                self.take()
                term = self.term()
                acc = raw_add(acc, term, scale=Scalar.const(-1 if val == '-' else 1, self.mode))
            else:
                return acc

    def term(self):
        acc = self.factor()
        while True:
            kind, val = self.peek()
            if kind in ('num', 'name') or (kind == 'op' and val == '('):
                acc = raw_mul(acc, self.factor())
            else:
                return acc

    def factor(self):
        base, is_scalar = self.primary()
        kind, val = self.peek()
        if kind == 'op' and val == '^':
            self.take()
            negative = False
            kind, val = self.peek()
            if kind == 'op' and val == '-':
                self.take()
                negative = True
            kind, val = self.take()
            if kind != 'num' or '/' in val:
                raise PresentationError(f"exponente inválido en '{self.text}'")
            exp = -int(val) if negative else int(val)
            if is_scalar:
                return {(): base ** exp}
            if exp < 0:
                raise PresentationError(f"exponente negativo sobre un generador en '{self.text}'")
            result = {(): Scalar.one(self.mode)}
            for _ in range(exp):
                result = raw_mul(result, base)
            return result
        return {(): base} if is_scalar else base

    def primary(self):
        kind, val = self.take()
        if kind == 'num':
            return Scalar.const(parse_rational(val), self.mode), True
        if kind == 'name':
            if val in self.names:
                return {(self.names[val],): Scalar.one(self.mode)}, False
            if val in SCALAR_SYMBOLS:
                return SCALAR_SYMBOLS[val](self.mode), True
            raise PresentationError(f"símbolo desconocido '{val}' en '{self.text}'")
        if kind == 'op' and val == '(':
            inner = self.expr()
            kind, val = self.take()
            if val != ')':
                raise PresentationError(f"falta ')' en '{self.text}'")
            return inner, False
        raise PresentationError(f"token inesperado {val!r} en '{self.text}'")


def parse_raw(text, names, mode):
    return _PolyParser(names, mode, str(text)).parse()


def parse_poly(system, text):
    """Lee un NCPoly del sistema a partir de texto"""
    names = {g.name: g.index for g in system.generators}
    return system.poly(parse_raw(text, names, system.unit_mode))


def _parse_rule(text, names, mode):
    if '->' not in text:
        raise PresentationError(f"regla sin '->': '{text}'")
    lhs_text, rhs_text = text.split('->', 1)
    lhs = parse_raw(lhs_text, names, mode)
    if len(lhs) != 1:
        raise PresentationError(f"el lado izquierdo debe ser una palabra: '{text}'")
    (word, coef), = lhs.items()
    if coef != Scalar.one(mode):
        raise PresentationError(f"el lado izquierdo no puede llevar coeficiente: '{text}'")
    return word, parse_raw(rhs_text, names, mode)


def _conjugate_rules(rules, generators, mode):
    """
    Añade la regla de la relación conjugada de cada regla explícita.

    La relación conjugada se reduce antes con las reglas ya conocidas, de
    modo que su palabra dominante es siempre una palabra nueva.
    """
    added = {}
    for lhs, rhs in rules.items():
        relation = raw_add({lhs: Scalar.one(mode)}, rhs, scale=Scalar.const(-1, mode))
        partial = RewriteSystem('parcial', generators, {**rules, **added}, unit_mode=mode)
        conj = partial.reduce(partial.star_raw(relation))
        if not conj:
            continue
        lead = max(conj, key=word_key)
        try:
            inv = conj[lead].inverse()
        except ZeroDivisionError as exc:
            raise PresentationError(f"la relación conjugada de {partial.format_word(lhs)} no "
                                    "tiene coeficiente dominante invertible") from exc
        rest = {w: c for w, c in conj.items() if w != lead}
        added[lead] = raw_scale(rest, -inv)
    return added


def build_system(spec, name=None, classical=False, step_budget=DEFAULT_STEP_BUDGET):
    """Construye un RewriteSystem a partir de un diccionario de presentación"""
    try:
        mode = UnitMode(spec.get('unit_mode', 'phase'))
        gen_specs = spec['generators']
    except (KeyError, ValueError) as exc:
        raise PresentationError(f"presentación incompleta: {exc}") from exc

    names = {g['name']: pos for pos, g in enumerate(gen_specs)}
    generators = []
    for pos, g in enumerate(gen_specs):
        try:
            generators.append(Generator(
                name=g['name'],
                index=pos,
                degree=int(g.get('degree', 0)),
                weight=tuple(parse_rational(str(w)) for w in g.get('weight', [0, 0])),
                star_partner=names[g.get('star', g['name'])],
                d_partner=names[g['d']] if g.get('d') else None,
                cartan=tuple(parse_rational(str(c)) for c in g['cartan']) if 'cartan' in g else None,
            ))
        except KeyError as exc:
            raise PresentationError(f"generador {g.get('name')}: referencia desconocida {exc}") from exc

    rules = {}
    qc = spec.get('quasi_commutation')
    if qc:
        theta = [[parse_rational(str(x)) for x in row] for row in qc['theta_matrix']]
        rules.update(graded_phase_rules(generators, theta, mode, classical))
    for text in spec.get('rules', []) or []:
        lhs, rhs = _parse_rule(text, names, mode)
        rules[lhs] = rhs
    if spec.get('close_under_star'):
        rules.update(_conjugate_rules(rules, generators, mode))

    ideal = {}
    for text in spec.get('ideal', []) or []:
        lhs, rhs = _parse_rule(text, names, mode)
        ideal[lhs] = rhs

    sphere = parse_raw(spec['sphere'], names, mode) if spec.get('sphere') else None
    system = RewriteSystem(name or spec.get('name', 'sin_nombre'), generators, rules, ideal,
                           unit_mode=mode, sphere_relation=sphere, step_budget=step_budget)
    logger.debug(f"🔧 {system!r}")
    return system


def _read_spec(name):
    path = DATA_DIR / f"{name}.yaml"
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f)
    except FileNotFoundError as exc:
        raise PresentationError(f"no existe la presentación {path}") from exc


def load_presentation(name, classical=False, step_budget=DEFAULT_STEP_BUDGET):
    """Carga ncspheres/data/<name>.yaml"""
    return build_system(_read_spec(name), classical=classical, step_budget=step_budget)


def load_relations(system, name=None):
    """Relaciones con nombre de la sección 'relations', como polinomios crudos"""
    spec = _read_spec(name or system.name.lower())
    names = {g.name: g.index for g in system.generators}
    return {key: parse_raw(text, names, system.unit_mode)
            for key, text in (spec.get('relations') or {}).items()}


def load_expression(system, key, name=None):
    """Lee una expresión auxiliar (clave de primer nivel) del archivo de la presentación"""
    spec = _read_spec(name or system.name.lower())
    if key not in spec:
        raise PresentationError(f"{system.name}: falta la clave '{key}'")
    return parse_poly(system, spec[key])


def available_presentations():
    return sorted(p.stem for p in DATA_DIR.glob('*.yaml') if not p.stem.startswith('hodge'))
