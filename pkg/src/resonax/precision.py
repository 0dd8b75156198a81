"""Precision tiers for the solver kernels.

Every kernel accepts ``dps`` (decimal digits): ``None`` selects IEEE double
via numpy/LAPACK, an integer selects arbitrary-precision arithmetic via
mpmath.  Extended runs are expected to use at least 40 digits; anything
below 16 makes no sense and is rejected.
"""

from __future__ import annotations

import mpmath
import numpy as np

MIN_EXTENDED_DIGITS = 16


def check_digits(dps: int | None) -> int | None:
    if dps is None:
        return None
    dps = int(dps)
    if dps < MIN_EXTENDED_DIGITS:
        raise ValueError(f"extended precision needs >= {MIN_EXTENDED_DIGITS} digits, got {dps}")
    return dps


def working_digits(dps: int | None) -> int:
    """Decimal digits carried by the tier (16 for IEEE double)."""
    return 16 if dps is None else int(dps)


def to_mpc(z, dps: int) -> mpmath.mpc:
    with mpmath.workdps(dps):
        return mpmath.mpc(z)


def mpc_to_complex(z) -> complex:
    return complex(float(mpmath.re(z)), float(mpmath.im(z)))


def eig_general(entries, dps: int | None = None) -> list[complex]:
    """Eigenvalues of a dense complex matrix, no conjugation anywhere.

    Double tier goes through LAPACK; extended tier uses mpmath's QR
    iteration.  Extended results stay mpc so downstream code keeps the
    digits; callers round when they serialize.
    """
    if dps is None:
        h = np.asarray(entries, dtype=complex)
        return list(np.linalg.eigvals(h))
    with mpmath.workdps(dps):
        h = entries if isinstance(entries, mpmath.matrix) else mpmath.matrix(entries)
        return list(mpmath.eig(h, left=False, right=False))


def poly_roots(coeffs_desc, dps: int | None = None) -> list[complex]:
    """Roots of a polynomial given by descending coefficients."""
    if dps is None:
        return list(np.roots(np.asarray(coeffs_desc, dtype=complex)))
    with mpmath.workdps(dps):
        return list(mpmath.polyroots(list(coeffs_desc), maxsteps=200, extraprec=80))


def sort_by_real(values) -> list:
    return sorted(values, key=lambda z: (float(mpmath.re(z)) if isinstance(z, (mpmath.mpc, mpmath.mpf)) else z.real))
