"""Covariant functional calculus for tuples of matrices in real Clifford algebras."""

__version__ = "0.1.0"

from .clifford_core import (
    Multivector,
    geometric_product,
    reversion,
    conjugation,
    grade_involution,
    vector_embed,
    is_vector,
    kelvin_inverse,
    mv_inverse,
    modulus,
    in_gamma,
    in_pin,
)

__all__ = [
    "__version__",
    "Multivector",
    "geometric_product",
    "reversion",
    "conjugation",
    "grade_involution",
    "vector_embed",
    "is_vector",
    "kelvin_inverse",
    "mv_inverse",
    "modulus",
    "in_gamma",
    "in_pin",
]
