"""Shape functions, quadrature, assembly and sparse solves.

The assembly routines live in :mod:`layered_fsi.fem.assembly`; they depend on
the ALE module, which itself only needs the basis tables defined here.
"""

from .basis import DEFAULT_RULE, QuadRule, gauss_legendre, lagrange_1d, lagrange_2d, square_rule
from .linalg import Factorization, is_symmetric, solve_sparse
from .weights import FormWeights

__all__ = [
    "DEFAULT_RULE", "Factorization", "FormWeights", "QuadRule", "gauss_legendre",
    "is_symmetric", "lagrange_1d", "lagrange_2d", "solve_sparse", "square_rule",
]
