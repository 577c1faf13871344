"""
ncspheres - verificación simbólica exacta de esferas θ y q deformadas,
instantones, simetrías torcidas, carácter de Chern y emparejamientos de índice.
"""

from .errors import NCSpheresError
from .ncalg import NCPoly, RewriteSystem, homomorphism, tensor_product
from .ncmatrix import NCMatrix
from .presentations import load_presentation, parse_poly
from .scalars import FieldElem, Scalar, UnitMode

__version__ = '0.1.0'

__all__ = [
    'FieldElem', 'NCMatrix', 'NCPoly', 'NCSpheresError', 'RewriteSystem', 'Scalar',
    'UnitMode', 'homomorphism', 'load_presentation', 'parse_poly', 'tensor_product',
]
