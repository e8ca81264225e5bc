"""KMS states on C*-algebras of right LCM monoids with a scale N.

Modules: ``monoids`` (normal forms, right LCMs), ``scale`` (N, ker N and the
quotient S/~N), ``measure`` (cylinder measures, existence, partition
function), ``kms`` (spanning elements and state values), ``uniqueness``
(extreme states and the uniqueness criterion) and ``cli``.
"""

__version__ = "0.1.0"

from .monoids import AxB, C3, FreeAbelian, FreeMonoid, Lamplighter, Monoid, make_monoid
from .scale import NClass, Scale, make_scale

__all__ = [
    "AxB",
    "C3",
    "FreeAbelian",
    "FreeMonoid",
    "Lamplighter",
    "Monoid",
    "NClass",
    "Scale",
    "make_monoid",
    "make_scale",
    "__version__",
]
