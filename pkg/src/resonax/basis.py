"""Basis families with complex nonlinear parameters.

Six families, all orthonormal under the bilinear c-product (no complex
conjugation), which is the right pairing once parameters go complex:

* ``ho``           harmonic-oscillator functions, even or odd parity sector
* ``shifted_ho``   oscillator functions centered at a complex shift t
* ``trig_even``    cos((j+1/2) pi x / L) / sqrt(L) on (-L, L)
* ``trig_odd``     sin((j+1) pi x / L) / sqrt(L) on (-L, L)
* ``radial_ho``    generalized-Laguerre radial oscillator functions on (0, inf)
* ``radial_trig``  sqrt(2/L) sin((j+1) pi r / L) on (0, L)

Matrix elements at complex parameters are the analytic continuation of
the real-parameter ones; all evaluations use principal branches so the
continuation is single-valued on the admissible region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HO = "ho"
SHIFTED_HO = "shifted_ho"
TRIG_EVEN = "trig_even"
TRIG_ODD = "trig_odd"
RADIAL_HO = "radial_ho"
RADIAL_TRIG = "radial_trig"

FAMILIES = (HO, SHIFTED_HO, TRIG_EVEN, TRIG_ODD, RADIAL_HO, RADIAL_TRIG)

OSCILLATOR_FAMILIES = (HO, SHIFTED_HO, RADIAL_HO)
TRIG_FAMILIES = (TRIG_EVEN, TRIG_ODD, RADIAL_TRIG)


@dataclass(frozen=True)
class ParamPoint:
    """Values of the active nonlinear parameters.

    omega is the oscillator frequency (Re > 0 so the Gaussian weight
    decays), t the complex center of the shifted family, L the complex
    box scale of the trig families (upper half plane, nonzero).
    """

    omega: complex | None = None
    t: complex | None = None
    L: complex | None = None

    def __post_init__(self):
        if self.omega is None and self.t is None and self.L is None:
            raise ValueError("empty parameter point")
        if self.omega is not None and not complex(self.omega).real > 0:
            raise ValueError(f"need Re(omega) > 0, got {self.omega}")
        if self.L is not None:
            Lc = complex(self.L)
            if Lc == 0 or Lc.imag < 0:
                raise ValueError(f"need Im(L) >= 0 and L != 0, got {self.L}")

    def active(self, names) -> tuple:
        # values pass through unconverted so extended-precision scalars survive
        return tuple(getattr(self, n) for n in names)


@dataclass(frozen=True)
class BasisSpec:
    """A family plus its parity/angular sector."""

    family: str
    sector: str
    lam: float = 0.0

    @property
    def param_names(self) -> tuple[str, ...]:
        if self.family == SHIFTED_HO:
            return ("omega", "t")
        if self.family in TRIG_FAMILIES:
            return ("L",)
        return ("omega",)

    def indices(self, M: int) -> np.ndarray:
        """Underlying quantum indices of the first M sector functions."""
        n = np.arange(M)
        if self.family == HO:
            return 2 * n if self.sector == "even" else 2 * n + 1
        return n


def make_basis(family: str, sector: str | None = None, lam: float | None = None) -> BasisSpec:
    if family not in FAMILIES:
        raise ValueError(f"unknown basis family {family!r}")
    if family == HO:
        if sector not in ("even", "odd"):
            raise ValueError("ho basis needs sector 'even' or 'odd'")
        return BasisSpec(family, sector)
    if family == SHIFTED_HO:
        if sector not in (None, "all"):
            raise ValueError("shifted_ho basis carries no parity sector")
        return BasisSpec(family, "all")
    if family == TRIG_EVEN:
        if sector not in (None, "even"):
            raise ValueError("trig_even is the even sector")
        return BasisSpec(family, "even")
    if family == TRIG_ODD:
        if sector not in (None, "odd"):
            raise ValueError("trig_odd is the odd sector")
        return BasisSpec(family, "odd")
    if family == RADIAL_HO:
        if lam is None:
            raise ValueError("radial_ho needs lam from the angular reduction")
        if lam <= -1.0:
            raise ValueError("radial_ho needs lam > -1 for normalizable functions")
        return BasisSpec(family, "radial", float(lam))
    # radial_trig
    if lam not in (None, 0, 0.0):
        raise ValueError("radial_trig supports only lam = 0")
    return BasisSpec(family, "radial", 0.0)


def check_params(basis: BasisSpec, params: ParamPoint) -> tuple[complex, ...]:
    """Validate that exactly the family's parameters are present."""
    wanted = basis.param_names
    for name in ("omega", "t", "L"):
        have = getattr(params, name) is not None
        if have != (name in wanted):
            raise ValueError(f"family {basis.family!r} expects parameters {wanted}, got {params}")
    return params.active(wanted)


def validity_region(family: str):
    """Predicate over raw parameter tuples for admissible basis parameters.

    Oscillator families: Re(omega) > 0 and Im(omega) <= 0, i.e. contour
    rotation angle theta = -arg(omega)/2 in [0, pi/4).  Trig families:
    Im(L) >= 0 and L != 0; the real part may have either sign.
    """
    if family in OSCILLATOR_FAMILIES or family == SHIFTED_HO:
        def ok(values) -> bool:
            w = complex(values[0])
            return w.real > 0.0 and w.imag <= 0.0
        return ok
    if family in TRIG_FAMILIES:
        def ok(values) -> bool:
            L = complex(values[0])
            return L != 0 and L.imag >= 0.0
        return ok
    raise ValueError(f"unknown basis family {family!r}")


# Pointwise evaluation helpers.  These run on scalars or numpy arrays and
# keep everything in normalized form so large indices stay finite.

def hermite_stack(kmax: int, y):
    """Normalized Hermite functions h_0..h_kmax at (complex) argument y.

    h_k(y) = H_k(y) exp(-y^2/2) / sqrt(2^k k! sqrt(pi)), by upward
    recurrence; stable because the functions themselves stay O(1) on the
    real axis and grow only through the explicit exponential off it.
    """
    y = np.asarray(y, dtype=complex)
    out = np.empty((kmax + 1,) + y.shape, dtype=complex)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * y * y)
    if kmax >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for k in range(1, kmax):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * y * out[k] - np.sqrt(k / (k + 1.0)) * out[k - 1]
    return out


def hermite_second_derivative(stack, k: int):
    """h_k'' from the stack (which must extend to index k+2)."""
    kk = float(k)
    val = -(2 * kk + 1) / 2.0 * stack[k]
    if k >= 2:
        val = val + math.sqrt(kk * (kk - 1)) / 2.0 * stack[k - 2]
    val = val + math.sqrt((kk + 1) * (kk + 2)) / 2.0 * stack[k + 2]
    return val


def scaled_laguerre_stack(mmax: int, alpha: float, z):
    """Q_m(z) = exp(-z/2) L_m^alpha(z) for m = 0..mmax.

    The exponential factors straight through the three-term Laguerre
    recurrence, which keeps values bounded where the basis functions are.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty((mmax + 1,) + z.shape, dtype=complex)
    e = np.exp(-0.5 * z)
    out[0] = e
    if mmax >= 1:
        out[1] = (1.0 + alpha - z) * e
    for m in range(1, mmax):
        out[m + 1] = ((2 * m + alpha + 1 - z) * out[m] - (m + alpha) * out[m - 1]) / (m + 1.0)
    return out


def radial_ho_norm(m: int, lam: float, omega: complex) -> complex:
    ln = 0.5 * (math.log(2.0) + math.lgamma(m + 1) - math.lgamma(m + lam + 1.5))
    return math.exp(ln) * complex(omega) ** ((lam + 1.5) / 2.0)


def eval_fn(basis: BasisSpec, j: int, params: ParamPoint, x):
    """Value of the j-th sector basis function at real argument x."""
    if j < 0:
        raise ValueError("index must be nonnegative")
    vals = check_params(basis, params)
    x = np.asarray(x, dtype=float)

    if basis.family in (HO, SHIFTED_HO):
        omega = vals[0]
        shift = vals[1] if basis.family == SHIFTED_HO else 0.0
        k = int(basis.indices(j + 1)[j])
        y = np.sqrt(complex(omega)) * (x - shift)
        return omega**0.25 * hermite_stack(k, y)[k]

    if basis.family == TRIG_EVEN:
        L = vals[0]
        return np.cos((j + 0.5) * np.pi * x / L) / np.sqrt(L)

    if basis.family == TRIG_ODD:
        L = vals[0]
        return np.sin((j + 1) * np.pi * x / L) / np.sqrt(L)

    if basis.family == RADIAL_TRIG:
        L = vals[0]
        return np.sqrt(2.0 / L) * np.sin((j + 1) * np.pi * x / L)

    # radial_ho
    omega = vals[0]
    lam = basis.lam
    z = omega * x * x
    q = scaled_laguerre_stack(j, lam + 0.5, z)[j]
    return radial_ho_norm(j, lam, omega) * x ** (lam + 1.0) * q
