"""critwave: desk-scale numerical laboratory for type-II blow-up of the
focusing energy-critical wave equation in four space dimensions."""

from . import (  # noqa: F401
    blowup_law,
    coercivity,
    errors,
    groundstate,
    numerics,
    profile,
    report,
    spectral,
    wave_sim,
)

__version__ = "0.1.0"
