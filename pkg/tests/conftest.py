"""Sistemas compartidos por las pruebas (se construyen una vez por sesión)"""

import pytest
from sympy.polys.domains import QQ

from ncspheres.presentations import load_presentation
from ncspheres.q_sympl import build_q_spheres, build_R
from ncspheres.qrep import build_sigma
from ncspheres.theta_spheres import ThetaConfig


@pytest.fixture(scope='session')
def s4_theta():
    return load_presentation('s4_theta')


@pytest.fixture(scope='session')
def su2():
    return load_presentation('su2_q')


@pytest.fixture(scope='session')
def b_q():
    return load_presentation('b_q')


@pytest.fixture(scope='session')
def qs():
    return build_q_spheres()


@pytest.fixture(scope='session')
def R():
    return build_R()


@pytest.fixture(scope='session')
def sigma_half():
    return build_sigma(QQ(1, 2), 40)


@pytest.fixture(scope='session', params=['0', '1/3'])
def theta_cfg(request):
    return ThetaConfig.from_value(request.param)
