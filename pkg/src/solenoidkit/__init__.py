"""Exact invariants of Wieler solenoids and their Cuntz-Pimsner algebras."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import DomainError, StructuralFailure
from .exact_linalg import (
    AbelianGroup,
    IntMatrix,
    RationalInterval,
    SmithDecomposition,
    StationaryLimitModule,
    abelian_group_of,
    exterior_power,
    perron_bounds,
    positive_definite,
    smith_normal_form,
    stationary_limit,
)
from .sft import EventuallyPeriodicWord, SftSystem

__all__ = [
    "__version__",
    "DomainError",
    "StructuralFailure",
    "AbelianGroup",
    "IntMatrix",
    "RationalInterval",
    "SmithDecomposition",
    "StationaryLimitModule",
    "abelian_group_of",
    "exterior_power",
    "perron_bounds",
    "positive_definite",
    "smith_normal_form",
    "stationary_limit",
    "EventuallyPeriodicWord",
    "SftSystem",
]
