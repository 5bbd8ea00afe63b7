"""Exact algebra over Q(z): polynomials, rational functions, root isolation."""

from .linalg import (
    SingularMatrixError,
    charpoly,
    determinant,
    matmul,
    matrix_inverse_ratfield,
)
from .poly import (
    PoleError,
    Polynomial,
    RationalFunction,
    poly_gcd,
    poly_lcm,
    squarefree_decomposition,
    squarefree_part,
)
from .roots import (
    IsolatedRoot,
    algebraic_cmp,
    algebraic_equal,
    as_algebraic,
    cmp_rational,
    count_roots,
    image_cmp,
    isolate_real_roots,
    sign_at,
    sturm_sequence,
)

__all__ = [
    "IsolatedRoot",
    "PoleError",
    "Polynomial",
    "RationalFunction",
    "SingularMatrixError",
    "algebraic_cmp",
    "algebraic_equal",
    "as_algebraic",
    "charpoly",
    "cmp_rational",
    "count_roots",
    "determinant",
    "image_cmp",
    "isolate_real_roots",
    "matmul",
    "matrix_inverse_ratfield",
    "poly_gcd",
    "poly_lcm",
    "sign_at",
    "squarefree_decomposition",
    "squarefree_part",
    "sturm_sequence",
]
