"""Independent numerical cross-checks for the algebraic matrix elements.

Two routes that share no code with the closed-form assembly:

* ``quadrature_element`` evaluates single c-product matrix elements by
  mapped Gauss-Legendre quadrature, with second derivatives taken
  analytically from the basis recurrences rather than by differencing.
* ``rotated_grid_solve`` diagonalizes a complex-rotated finite-difference
  Hamiltonian on a uniform grid, which exposes isolated resonances as
  complex eigenvalues without any basis-set machinery.

The quadrature route is trustworthy only where the integrand cancellation
stays modest, so comparisons against closed forms are made on gated
parameter sets with enough nodes to resolve the oscillatory phase.  The
grid route resolves widths down to roughly Gamma ~ 1e-5; anything
narrower drowns in the finite-difference floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import (
    HO,
    RADIAL_HO,
    RADIAL_TRIG,
    SHIFTED_HO,
    TRIG_EVEN,
    TRIG_FAMILIES,
    BasisSpec,
    ParamPoint,
    check_params,
    hermite_second_derivative,
    hermite_stack,
    radial_ho_norm,
    scaled_laguerre_stack,
)
from .potentials import FULL_LINE, HALF_LINE, PotentialSpec, eval_potential

MAX_INDEX = 60
MIN_NODES = 200


@lru_cache(maxsize=32)
def _leggauss_base(nodes: int):
    return np.polynomial.legendre.leggauss(nodes)


def _gauss_legendre(nodes: int, lo: float, hi: float):
    u, w = _leggauss_base(nodes)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return mid + half * u, half * w


def _tail_radius(a: float, absw: float, degree: int, extra: float = 0.0) -> float:
    """Half-width where an oscillator basis-function pair has decayed away.

    The pair falls off like exp(-a x**2) but carries a polynomial of the
    given degree in sqrt(absw) x (plus `extra` bare powers of x), and at
    complex frequency absw can exceed a by a lot, so the polynomial can
    outrun a fixed tail budget.  A fixed-point balance of the two keeps
    the truncated tail below the 1e-12 overlap target.
    """
    R = math.sqrt(45.0 / a)
    for _ in range(80):
        grow = degree * math.log(max(2.0 * math.sqrt(absw) * R, 2.0))
        grow += extra * math.log(max(R, 2.0))
        Rn = math.sqrt((45.0 + max(grow, 0.0)) / a)
        if abs(Rn - R) <= 1e-10 * R:
            break
        R = Rn
    return R


def quadrature_condition(basis: BasisSpec, params: ParamPoint, j: int, m: int) -> float:
    """Cancellation amplitude of the quadrature route for one element.

    At complex frequency the polynomial part of an oscillator function
    grows with |omega| while the Gaussian only damps with Re(omega), so
    along the real line the normalized functions can peak far above 1.
    The integral then cancels down from that peak, and roundoff scales
    with it.  Box families parameterize to real trig arguments and stay
    near 1.  Comparisons should skip pairs whose condition times machine
    epsilon exceeds the target accuracy.
    """
    vals = check_params(basis, params)
    fam = basis.family
    if fam in TRIG_FAMILIES:
        return 1.0
    omega = complex(vals[0])
    a, absw = omega.real, abs(omega)
    if fam == RADIAL_HO:
        # Laguerre pair carries (omega r**2)**(j+m) against exp(-a r**2)
        ln_amp = (j + m) * math.log(absw / a)
    else:
        idx = basis.indices(max(j, m) + 1)
        # Hermite pair carries (omega x**2)**((kj+km)/2) against exp(-a x**2)
        ln_amp = 0.5 * (int(idx[j]) + int(idx[m])) * math.log(absw / a)
        if fam == SHIFTED_HO:
            ti = complex(vals[1]).imag
            b = omega.imag
            ln_amp += ti * ti * (a + b * b / a)
    return float(math.exp(min(max(ln_amp, 0.0), 600.0)))


def quadrature_element(
    basis: BasisSpec,
    potential: PotentialSpec | None,
    params: ParamPoint,
    j: int,
    m: int,
    nodes: int = 400,
) -> complex:
    """C-product element (phi_j, H phi_m), or the overlap when potential is None.

    The product is bilinear (no conjugation), so complex parameters enter
    the integrand directly.  Box families integrate over the unit
    interval with the box scale as an explicit Jacobian; oscillator
    families integrate over a real window wide enough to bury the
    Gaussian tails.  Callers must supply enough nodes to resolve the
    oscillation of both basis functions and any complex-frequency phase.
    """
    if not (0 <= j < MAX_INDEX and 0 <= m < MAX_INDEX):
        raise ValueError(f"quadrature oracle covers indices below {MAX_INDEX}")
    if nodes < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} quadrature nodes")
    vals = check_params(basis, params)
    fam = basis.family

    if fam in TRIG_FAMILIES:
        L = complex(vals[0])
        lo = 0.0 if fam == RADIAL_TRIG else -1.0
        u, w = _gauss_legendre(nodes, lo, 1.0)
        if fam == TRIG_EVEN:
            kj, km = (j + 0.5) * np.pi, (m + 0.5) * np.pi
            pj = np.cos(kj * u) / np.sqrt(L)
            pm = np.cos(km * u) / np.sqrt(L)
        else:
            kj, km = (j + 1.0) * np.pi, (m + 1.0) * np.pi
            scale = np.sqrt(2.0 / L) if fam == RADIAL_TRIG else 1.0 / np.sqrt(L)
            pj = scale * np.sin(kj * u)
            pm = scale * np.sin(km * u)
        if potential is None:
            return complex(L * np.sum(w * pj * pm))
        # -phi'' / 2 = (k/L)**2 phi / 2 for every box function
        v = eval_potential(potential, L * u)
        return complex(L * np.sum(w * pj * (0.5 * (km / L) ** 2 * pm + v * pm)))

    omega = complex(vals[0])
    a = omega.real
    if fam == RADIAL_HO:
        lam = basis.lam
        top = max(j, m)
        R = _tail_radius(a, abs(omega), 2 * (j + m), extra=2.0 * lam + 2.0)
        x, w = _gauss_legendre(nodes, 0.0, R)
        z = omega * x * x
        stack = scaled_laguerre_stack(top, lam + 0.5, z)
        pj = radial_ho_norm(j, lam, omega) * x ** (lam + 1.0) * stack[j]
        pm = radial_ho_norm(m, lam, omega) * x ** (lam + 1.0) * stack[m]
        if potential is None:
            return complex(np.sum(w * pj * pm))
        # phi_m solves the radial oscillator equation, which gives the
        # second derivative without differentiating the Laguerre stack
        level = 2.0 * omega * (2.0 * m + lam + 1.5)
        d2m = (lam * (lam + 1.0) / (x * x) + omega * omega * x * x - level) * pm
        v = eval_potential(potential, x)
        return complex(np.sum(w * (pj * (-0.5 * d2m + v * pm))))

    # ho / shifted_ho
    shift = complex(vals[1]) if fam == SHIFTED_HO else 0.0
    idx = basis.indices(max(j, m) + 1)
    kj, km = int(idx[j]), int(idx[m])
    top = max(kj, km)
    R = _tail_radius(a, abs(omega), kj + km)
    # a complex center tilts the Gaussian and shifts its effective peak
    R += abs(shift.imag) * (1.0 + abs(omega.imag) / a)
    center = shift.real
    x, w = _gauss_legendre(nodes, center - R, center + R)
    y = np.sqrt(omega) * (x - shift)
    stack = hermite_stack(top + 2, y)
    pref = omega**0.25
    pj = pref * stack[kj]
    pm = pref * stack[km]
    if potential is None:
        return complex(np.sum(w * pj * pm))
    # chain rule: phi = omega**(1/4) h_k(y), y = sqrt(omega) (x - t)
    d2m = pref * omega * hermite_second_derivative(stack, km)
    v = eval_potential(potential, x)
    return complex(np.sum(w * (pj * (-0.5 * d2m + v * pm))))


def matelem_agreement(
    basis: BasisSpec,
    potential: PotentialSpec,
    params: ParamPoint,
    M: int = 12,
    nodes: int = 600,
    condition_cap: float = 30.0,
) -> float:
    """Worst deviation between quadrature and closed-form entries.

    Returns max over the upper triangle of |q - closed| / max(1, |closed|),
    which behaves like a relative error on large entries and an absolute
    one near structural zeros.  Pairs whose quadrature condition exceeds
    the cap are skipped; their cancellation noise would swamp any real
    disagreement.
    """
    from .matelem import build_matrix

    entries = build_matrix(basis, potential, params, M, dps=None).entries
    worst = 0.0
    for j in range(M):
        for m in range(j, M):
            if quadrature_condition(basis, params, j, m) > condition_cap:
                continue
            q = quadrature_element(basis, potential, params, j, m, nodes)
            ref = complex(entries[j, m])
            dev = abs(q - ref) / max(1.0, abs(ref))
            if dev > worst:
                worst = dev
    return worst


@dataclass(frozen=True)
class GridSolveSpec:
    """Rotated finite-difference discretization.

    theta is the rotation angle of the coordinate ray, R the box
    half-width (full line) or radius (half line), N the number of
    interior grid points.
    """

    theta: float
    R: float
    N: int
    domain: str = FULL_LINE

    def __post_init__(self):
        if not 0.0 < self.theta < 0.5 * math.pi:
            raise ValueError("rotation angle must lie in (0, pi/2)")
        if self.R <= 0.0:
            raise ValueError("need a positive box size")
        if self.N < 64:
            raise ValueError("need at least 64 grid points")
        if self.domain not in (FULL_LINE, HALF_LINE):
            raise ValueError(f"unknown domain {self.domain!r}")


def rotated_grid_solve(potential: PotentialSpec, spec: GridSolveSpec) -> np.ndarray:
    """All eigenvalues of the rotated Hamiltonian on a uniform grid.

    The coordinate is scaled as x -> x e^{i theta}, which multiplies the
    kinetic term by e^{-2i theta} and evaluates the potential along the
    rotated ray.  A fourth-order five-point stencil discretizes the
    second derivative with Dirichlet walls; on the half line the
    regular solution vanishes linearly at the origin, so the ghost point
    below the first node carries the odd image of the solution there.
    Eigenvalues come back sorted by real part.
    """
    if potential.domain == HALF_LINE and spec.domain != HALF_LINE:
        raise ValueError("half-line potential needs a half-line grid")
    n = spec.N
    if spec.domain == HALF_LINE:
        h = spec.R / (n + 1)
        x = h * np.arange(1, n + 1)
    else:
        h = 2.0 * spec.R / (n + 1)
        x = -spec.R + h * np.arange(1, n + 1)

    scale = 1.0 / (12.0 * h * h)
    d2 = (
        np.diag(np.full(n, -30.0))
        + np.diag(np.full(n - 1, 16.0), 1)
        + np.diag(np.full(n - 1, 16.0), -1)
        + np.diag(np.full(n - 2, -1.0), 2)
        + np.diag(np.full(n - 2, -1.0), -2)
    )
    if spec.domain == HALF_LINE:
        # stencil at the first node reaches x = -h, where the odd image
        # contributes -psi(h); the node at x = 0 itself is a Dirichlet zero
        d2[0, 0] += 1.0
    d2 = d2 * scale

    kin = -0.5 * np.exp(-2j * spec.theta)
    v = eval_potential(potential, x * np.exp(1j * spec.theta))
    ham = kin * d2 + np.diag(np.broadcast_to(np.asarray(v), (n,)).astype(complex))
    vals = np.linalg.eigvals(ham)
    return vals[np.argsort(vals.real)]
