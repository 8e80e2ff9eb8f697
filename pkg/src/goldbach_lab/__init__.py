"""Desk-scale laboratory for the three-primes circle method.

Exponential sums over primes with smooth weights, major-arc predictions,
explicit minor-arc bounds, large-sieve measurements, prime-ladder
verification of ternary decompositions and interval arithmetic.
"""

from .errors import (
    DomainError,
    LabError,
    PrecisionError,
    ResourceError,
    UnsupportedError,
    VerificationFailure,
)
from .report import BoundReport

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "DomainError",
    "LabError",
    "PrecisionError",
    "ResourceError",
    "UnsupportedError",
    "VerificationFailure",
    "__version__",
]
