"""Finite-precision operator calculus for rank-one modules over the Robba ring."""

from .padic import (
    PadicContext,
    PadicScalar,
    PrecisionError,
    DomainError,
    agree_digits,
    INF,
)
from .cyclo import CycloElement, phi_pn, zeta_minus_one
from .series import (
    SeriesElement,
    DifElement,
    WindowError,
    lazard_interpolate,
    delta_project,
    t_series,
    Q_poly,
)

__all__ = [
    "PadicContext",
    "PadicScalar",
    "PrecisionError",
    "DomainError",
    "WindowError",
    "CycloElement",
    "SeriesElement",
    "DifElement",
    "agree_digits",
    "phi_pn",
    "zeta_minus_one",
    "lazard_interpolate",
    "delta_project",
    "t_series",
    "Q_poly",
    "INF",
]
