"""Resonance energies and widths from trace-optimized Rayleigh-Ritz bases."""

from .basis import BasisSpec, ParamPoint, make_basis
from .potentials import (
    AngularSector,
    PotentialSpec,
    bardsley_potential,
    cubic_potential,
    gaussian_quartic_potential,
    mexican_hat_potential,
    pure_ho_potential,
    quartic_potential,
    sextic_potential,
)

__version__ = "0.1.0"

__all__ = [
    "AngularSector",
    "BasisSpec",
    "ParamPoint",
    "PotentialSpec",
    "bardsley_potential",
    "cubic_potential",
    "gaussian_quartic_potential",
    "make_basis",
    "mexican_hat_potential",
    "pure_ho_potential",
    "quartic_potential",
    "sextic_potential",
    "__version__",
]
