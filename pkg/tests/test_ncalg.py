import itertools
from concurrent.futures import ThreadPoolExecutor

import pytest

from ncspheres.errors import InvalidRule, UnknownGenerator
from ncspheres.ncalg import contraction, homomorphism, tangential_projection, tensor_product
from ncspheres.presentations import load_presentation, parse_poly


def test_sphere_relation_reduces_to_one(s4_theta):
    assert parse_poly(s4_theta, "z0 z0 + z1* z1 + z2* z2") == s4_theta.one()


def test_z0_is_central(s4_theta):
    z0 = s4_theta.gen('z0')
    for name in ('z1', 'z1*', 'z2', 'z2*'):
        g = s4_theta.gen(name)
        assert z0 * g == g * z0


def test_classical_limit_commutes():
    s4 = load_presentation('s4_theta', classical=True)
    assert s4.gen('z1') * s4.gen('z2') == s4.gen('z2') * s4.gen('z1')


def test_unknown_generator(s4_theta):
    with pytest.raises(UnknownGenerator):
        s4_theta.gen('w7')


def test_su2_overlaps_resolve(su2, b_q):
    assert su2.check_overlaps().resolved
    assert b_q.check_overlaps().resolved


def test_su2_unitarity_relations(su2):
    assert parse_poly(su2, "alphab alpha + gammab gamma") == su2.one()
    assert parse_poly(su2, "alpha alphab + q^2 gammab gamma") == su2.one()
    assert parse_poly(su2, "alpha gamma") == parse_poly(su2, "q gamma alpha")


def test_star_is_antimultiplicative(su2):
    a, g = su2.gen('alpha'), su2.gen('gamma')
    assert (a * g).star() == g.star() * a.star()


def test_tensor_factors_commute(su2):
    tp = tensor_product([su2, su2], tags=['', '2'])
    a, a2 = tp.system.gen('alpha'), tp.system.gen('alpha_2')
    assert a2 * a == a * a2
    assert tp.embed(1, su2.gen('gamma')) == tp.system.gen('gamma_2')


def test_tensor_rejects_mixed_modes(s4_theta, su2):
    with pytest.raises(InvalidRule):
        tensor_product([s4_theta, su2])


def test_homomorphism_identity(su2):
    images = {g.index: su2.gen(g.name) for g in su2.generators}
    p = parse_poly(su2, "alpha gammab + 2 gamma")
    assert homomorphism(p, images, su2) == p


def test_sphere_differential_vanishes(s4_theta):
    dR = s4_theta.zero()
    for name in ('z0', 'z1', 'z2'):
        g = s4_theta.gen(name)
        dR = dR + g.star().d() * g + g.star() * g.d()
    assert dR.is_zero()


def test_one_forms_are_tangential(s4_theta):
    z0, z1 = s4_theta.gen('z0'), s4_theta.gen('z1')
    form = z0.d() * z1 + z1.star() * z0.d()
    assert tangential_projection(s4_theta, form) == form
    assert contraction(s4_theta, form).is_zero()


def test_normal_forms_shared_between_threads():
    shared = load_presentation('s7_q')
    words = list(itertools.product(range(len(shared.generators)), repeat=3))
    with ThreadPoolExecutor(max_workers=4) as pool:
        concurrent = list(pool.map(shared.word_normal_form, words))
    sequential = load_presentation('s7_q')
    assert concurrent == [sequential.word_normal_form(w) for w in words]
