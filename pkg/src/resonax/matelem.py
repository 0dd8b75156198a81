"""Matrix elements and basis-size traces under the bilinear c-product.

Everything here is the analytic continuation, in the nonlinear basis
parameters, of closed real-parameter formulas:

* oscillator families: ladder-operator band matrices.  A monomial x**p is
  the p-th power of the position band computed in an enlarged index space
  (dimension + p), then truncated; the retained block is exact because a
  band of width 1 cannot leak farther than p steps.
* radial oscillator: powers of the tridiagonal r**2 band, enlargement q
  for r**(2q); kinetic-plus-centrifugal comes from the solvable radial
  oscillator minus its own quadratic well, so the centrifugal singularity
  never appears explicitly.
* trig families: the substitution x = L u maps every element onto moment
  integrals over the unit interval.  Polynomial and exponential kernels
  have elementary antiderivatives; Gaussian kernels use fixed-order
  Gauss-Legendre quadrature with 4 (M + 8) nodes, spectrally convergent
  for the entire integrands that occur.

The trace of the Hamiltonian block, as a function of the parameters, is
returned in closed form: a Laurent polynomial in omega (oscillator
families), a polynomial in t with Laurent-omega coefficients (shifted
family), or a holomorphic evaluator with exact first and second
derivatives (trig families).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .basis import (HO, RADIAL_HO, RADIAL_TRIG, SHIFTED_HO, TRIG_EVEN,
                    TRIG_ODD, BasisSpec, ParamPoint, check_params)
from .potentials import (CENTRIFUGAL, EXP_POLY, FULL_LINE, GAUSSIAN, HALF_LINE,
                         MONOMIAL, PotentialSpec)


class UnsupportedPairError(ValueError):
    """Raised when a (basis family, potential term) pair has no closed form."""


@dataclass
class RRMatrix:
    """Complex symmetric Rayleigh-Ritz block H_jm = (phi_j | H phi_m)."""

    M: int
    entries: object          # numpy array (double) or mpmath.matrix (extended)
    params: ParamPoint
    sector: str


@dataclass
class TraceFunction:
    """Tr H as a function of the active basis parameters at fixed M.

    kind 'laurent' stores {power: coeff} over omega, 'laurent2' stores
    {(t_power, omega_power): coeff}, 'evaluator' stores a callable
    L -> (T, T', T'').
    """

    kind: str
    M: int
    basis: BasisSpec
    potential: PotentialSpec
    dps: int | None = None
    coeffs: dict | None = None
    _raw: object = None

    def value(self, *params):
        if self.kind == "laurent":
            (w,) = params
            return sum(c * w**k for k, c in self.coeffs.items())
        if self.kind == "laurent2":
            w, t = params[0], params[1]
            return sum(c * t**i * w**k for (i, k), c in self.coeffs.items())
        return self._raw(params[0])[0]

    def gradient(self, *params):
        if self.kind == "laurent":
            (w,) = params
            return (sum(k * c * w ** (k - 1) for k, c in self.coeffs.items() if k),)
        if self.kind == "laurent2":
            w, t = params[0], params[1]
            dw = sum(k * c * t**i * w ** (k - 1) for (i, k), c in self.coeffs.items() if k)
            dt = sum(i * c * t ** (i - 1) * w**k for (i, k), c in self.coeffs.items() if i)
            return (dw, dt)
        return (self._raw(params[0])[1],)

    def second(self, *params):
        """Second derivative (1-parameter) or 2x2 Hessian rows (2-parameter)."""
        if self.kind == "laurent":
            (w,) = params
            return sum(k * (k - 1) * c * w ** (k - 2) for k, c in self.coeffs.items() if k * (k - 1))
        if self.kind == "laurent2":
            w, t = params[0], params[1]
            dww = sum(k * (k - 1) * c * t**i * w ** (k - 2) for (i, k), c in self.coeffs.items() if k * (k - 1))
            dwt = sum(k * i * c * t ** (i - 1) * w ** (k - 1) for (i, k), c in self.coeffs.items() if k and i)
            dtt = sum(i * (i - 1) * c * t ** (i - 2) * w**k for (i, k), c in self.coeffs.items() if i * (i - 1))
            return ((dww, dwt), (dwt, dtt))
        return self._raw(params[0])[2]


def trace_gradient(tf: TraceFunction, params: ParamPoint):
    """Gradient of the trace at a parameter point, one entry per active parameter."""
    vals = check_params(tf.basis, params)
    return tf.gradient(*vals)


# --------------------------------------------------------------------------
# cached dimensionless bands (real entries; tier-specific storage)

_cache: dict = {}


def _position_band_powers(n: int, pmax: int, dps: int | None):
    """[I, B, B**2, ..., B**pmax] with B the (a + a^T) band, B[k,k+1] = sqrt(k+1)."""
    key = ("pos", n, pmax, dps)
    if key in _cache:
        return _cache[key]
    if dps is None:
        b = np.zeros((n, n))
        v = np.sqrt(np.arange(1.0, n))
        b[np.arange(n - 1), np.arange(1, n)] = v
        b[np.arange(1, n), np.arange(n - 1)] = v
        powers = [np.eye(n)]
        for _ in range(pmax):
            p = powers[-1] @ b
            powers.append((p + p.T) / 2.0)  # keeps symmetry bit-exact under BLAS
    else:
        with mpmath.workdps(dps):
            b = mpmath.zeros(n, n)
            for k in range(n - 1):
                b[k, k + 1] = b[k + 1, k] = mpmath.sqrt(k + 1)
            powers = [mpmath.eye(n)]
            for _ in range(pmax):
                powers.append(powers[-1] * b)
    _cache[key] = powers
    return powers


def _kinetic_band(n: int, dps: int | None):
    """p**2 / (2 omega): diagonal (k + 1/2)/2, second off-diagonals -sqrt((k+1)(k+2))/4."""
    key = ("kin", n, dps)
    if key in _cache:
        return _cache[key]
    if dps is None:
        m = np.zeros((n, n))
        k = np.arange(n)
        m[k, k] = (k + 0.5) / 2.0
        off = -np.sqrt((k[:-2] + 1.0) * (k[:-2] + 2.0)) / 4.0
        m[k[:-2], k[:-2] + 2] = off
        m[k[:-2] + 2, k[:-2]] = off
    else:
        with mpmath.workdps(dps):
            m = mpmath.zeros(n, n)
            for k in range(n):
                m[k, k] = mpmath.mpf(2 * k + 1) / 4
            for k in range(n - 2):
                m[k, k + 2] = m[k + 2, k] = -mpmath.sqrt((k + 1) * (k + 2)) / 4
    _cache[key] = m
    return m


def _radial_band_powers(n: int, lam: float, qmax: int, dps: int | None):
    """[I, S, S**2, ...] with S = omega * r**2 band for the radial oscillator."""
    key = ("rad", n, lam, qmax, dps)
    if key in _cache:
        return _cache[key]
    if dps is None:
        s = np.zeros((n, n))
        j = np.arange(n)
        s[j, j] = 2.0 * j + lam + 1.5
        off = -np.sqrt((j[:-1] + 1.0) * (j[:-1] + lam + 1.5))
        s[j[:-1], j[:-1] + 1] = off
        s[j[:-1] + 1, j[:-1]] = off
        powers = [np.eye(n)]
        for _ in range(qmax):
            p = powers[-1] @ s
            powers.append((p + p.T) / 2.0)
    else:
        with mpmath.workdps(dps):
            lam_mp = mpmath.mpf(lam)
            s = mpmath.zeros(n, n)
            for j in range(n):
                s[j, j] = 2 * j + lam_mp + mpmath.mpf(1.5)
            for j in range(n - 1):
                s[j, j + 1] = s[j + 1, j] = -mpmath.sqrt((j + 1) * (j + 1 + lam_mp + mpmath.mpf(0.5)))
            powers = [mpmath.eye(n)]
            for _ in range(qmax):
                powers.append(powers[-1] * s)
    _cache[key] = powers
    return powers


def _radial_kinetic_band(n: int, lam: float, dps: int | None):
    """(-u''/2 + lam(lam+1)/(2 r**2)) / omega = diag(2j+lam+3/2) - S/2."""
    key = ("radkin", n, lam, dps)
    if key in _cache:
        return _cache[key]
    s = _radial_band_powers(n, lam, 1, dps)[1]
    if dps is None:
        m = -0.5 * s
        j = np.arange(n)
        m[j, j] += 2.0 * j + lam + 1.5
    else:
        with mpmath.workdps(dps):
            m = -0.5 * s
            for j in range(n):
                m[j, j] += 2 * j + mpmath.mpf(lam) + mpmath.mpf(1.5)
    _cache[key] = m
    return m


# --------------------------------------------------------------------------
# moment integrals on the unit interval (trig families)

def _leggauss(n: int, dps: int | None):
    key = ("gl", n, dps)
    if key in _cache:
        return _cache[key]
    if dps is None:
        x, w = np.polynomial.legendre.leggauss(n)
    else:
        x, w = _mp_leggauss(n, dps)
    _cache[key] = (x, w)
    return x, w


def _mp_leggauss(n: int, dps: int):
    """Gauss-Legendre nodes/weights by Newton iteration in mp arithmetic."""
    with mpmath.workdps(dps + 10):
        xs, ws = [], []
        for i in range(n):
            x = mpmath.mpf(math.cos(math.pi * (i + 0.75) / (n + 0.5)))
            for _ in range(60):
                p0, p1 = mpmath.mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x = x - dx
                if abs(dx) < mpmath.mpf(10) ** (-dps - 6):
                    break
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
    return xs, ws


def poly_cos_moments(p: int, nmax: int, half: bool, dps: int | None):
    """integral of u**p cos(n pi u) over [-1,1] (half=False) or [0,1] (half=True)."""
    one = mpmath.mpf(1) if dps is not None else 1.0
    pi2 = (mpmath.pi if dps is not None else math.pi) ** 2
    out = []
    for n in range(nmax + 1):
        if n == 0:
            if half:
                out.append(one / (p + 1))
            else:
                out.append(2 * one / (p + 1) if p % 2 == 0 else 0 * one)
            continue
        a2 = n * n * pi2
        sgn = one if n % 2 == 0 else -one
        if half:
            vals = {0: 0 * one, 1: (sgn - 1) / a2}
            for q in range(2, p + 1):
                vals[q] = q * sgn / a2 - q * (q - 1) * vals[q - 2] / a2
            out.append(vals[p])
        else:
            if p % 2 == 1:
                out.append(0 * one)
                continue
            vals = {0: 0 * one}
            for q in range(2, p + 1, 2):
                vals[q] = 2 * q * sgn / a2 - q * (q - 1) * vals[q - 2] / a2
            out.append(vals[p])
    if dps is None:
        return np.asarray(out, dtype=float)
    return out


def gaussian_cos_moments(c, powers, nmax: int, nodes: int, dps: int | None):
    """{p: integral of u**p exp(-c u**2) cos(n pi u) du over [-1,1]} for n <= nmax."""
    x, w = _leggauss(nodes, dps)
    if dps is None:
        f = w * np.exp(-c * x * x)
        n = np.arange(nmax + 1)
        cosn = np.cos(np.pi * np.outer(n, x))
        return {p: cosn @ (f * x**p) for p in powers}
    with mpmath.workdps(dps):
        c = mpmath.mpc(c)
        f = [w[i] * mpmath.exp(-c * x[i] * x[i]) for i in range(nodes)]
        out = {}
        for p in powers:
            fp = [f[i] * x[i] ** p for i in range(nodes)]
            tab = []
            for n in range(nmax + 1):
                tab.append(mpmath.fsum((fp[i] * mpmath.cos(n * mpmath.pi * x[i]) for i in range(nodes)), absolute=False))
            out[p] = tab
        return out


def _cint(p: int, z, dps: int | None):
    """integral of u**p exp(-z u) du over [0,1], elementwise in z.

    Series below |z| ~ 1.5 avoids the cancellation in the closed form.
    """
    if dps is None:
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        small = np.abs(z) <= 1.5
        if np.any(small):
            zs = z[small]
            term = np.ones_like(zs)
            acc = term / (p + 1)
            for m in range(1, 60):
                term = term * (-zs) / m
                acc = acc + term / (p + m + 1)
                if np.all(np.abs(term) < 1e-20):
                    break
            out[small] = acc
        if np.any(~small):
            zl = z[~small]
            e = np.exp(-zl)
            c = (1.0 - e) / zl
            for q in range(1, p + 1):
                c = (q * c - e) / zl
            out[~small] = c
        return out
    with mpmath.workdps(dps):
        z = mpmath.mpc(z)
        if abs(z) <= 1.5:
            term = mpmath.mpc(1)
            acc = term / (p + 1)
            for m in range(1, 8 * dps):
                term = term * (-z) / m
                acc = acc + term / (p + m + 1)
                if abs(term) < mpmath.mpf(10) ** (-dps - 8):
                    break
            return acc
        e = mpmath.exp(-z)
        c = (1 - e) / z
        for q in range(1, p + 1):
            c = (q * c - e) / z
        return c


def exp_cos_moments(z, p: int, nmax: int, dps: int | None):
    """integral of u**p exp(-z u) cos(n pi u) du over [0,1] for n = 0..nmax."""
    if dps is None:
        n = np.arange(nmax + 1)
        zp = z - 1j * math.pi * n
        zm = z + 1j * math.pi * n
        return 0.5 * (_cint(p, zp, None) + _cint(p, zm, None))
    with mpmath.workdps(dps):
        out = []
        for n in range(nmax + 1):
            s = mpmath.mpc(0, n * mpmath.pi)
            out.append((_cint(p, z - s, dps) + _cint(p, z + s, dps)) / 2)
        return out


# --------------------------------------------------------------------------
# support gates

def _monomial_terms(potential: PotentialSpec):
    return [t for t in potential.terms if t.kind == MONOMIAL]


def check_support(basis: BasisSpec, potential: PotentialSpec) -> None:
    fam = basis.family
    if fam in (HO, SHIFTED_HO):
        if potential.domain != FULL_LINE:
            raise UnsupportedPairError(f"{fam} basis lives on the full line")
        if fam == HO and potential.symmetry != "even":
            raise UnsupportedPairError("parity-sectored ho basis needs a reflection-even potential")
        bad = [t.kind for t in potential.terms if t.kind != MONOMIAL]
        if bad:
            raise UnsupportedPairError(f"no closed oscillator elements for terms {bad}")
        return
    if fam in (TRIG_EVEN, TRIG_ODD):
        if potential.domain != FULL_LINE or potential.symmetry != "even":
            raise UnsupportedPairError("parity trig bases need an even full-line potential")
        bad = [t.kind for t in potential.terms if t.kind not in (MONOMIAL, GAUSSIAN)]
        if bad:
            raise UnsupportedPairError(f"no trig moment formulas for terms {bad}")
        return
    if fam == RADIAL_HO:
        if potential.domain != HALF_LINE:
            raise UnsupportedPairError("radial_ho basis lives on the half line")
        want = basis.lam * (basis.lam + 1.0) / 2.0
        got = complex(potential.centrifugal_strength())
        if abs(got - want) > 1e-12 * max(1.0, abs(want)):
            raise UnsupportedPairError(
                f"centrifugal strength {got} does not match the basis sector value {want}")
        for t in _monomial_terms(potential):
            if t.power % 2:
                raise UnsupportedPairError("radial_ho supports even monomial powers only")
        bad = [t.kind for t in potential.terms if t.kind not in (MONOMIAL, CENTRIFUGAL)]
        if bad:
            raise UnsupportedPairError(f"no radial oscillator elements for terms {bad}")
        return
    if fam == RADIAL_TRIG:
        if potential.domain != HALF_LINE:
            raise UnsupportedPairError("radial_trig basis lives on the half line")
        if potential.centrifugal_strength() != 0:
            raise UnsupportedPairError("radial_trig supports lam = 0 problems only")
        bad = [t.kind for t in potential.terms if t.kind not in (MONOMIAL, EXP_POLY)]
        if bad:
            raise UnsupportedPairError(f"no radial trig moment formulas for terms {bad}")
        return
    raise UnsupportedPairError(f"unknown family {fam!r}")


# --------------------------------------------------------------------------
# oscillator-family assembly

def _two_omega_pow(w, q_half_num: int, dps: int | None):
    """(2 omega) ** (-q_half_num / 2) on the principal branch."""
    if dps is None:
        return complex(2 * w) ** (-q_half_num / 2.0)
    with mpmath.workdps(dps):
        return mpmath.power(2 * mpmath.mpc(w), -mpmath.mpf(q_half_num) / 2)


def _assemble_ho(basis, potential, w, t, M, dps, margin=0):
    idx = basis.indices(M)
    kmax = int(idx[-1])
    pmax = potential.max_monomial_power()
    n = kmax + pmax + 1 + margin
    powers = _position_band_powers(n, pmax, dps)
    kin = _kinetic_band(n, dps)
    if dps is None:
        w = complex(w)
        t = None if t is None else complex(t)
        h = w * kin.astype(complex)
        for term in _monomial_terms(potential):
            p = term.power
            if t is None:
                h = h + term.coefficient * _two_omega_pow(w, p, None) * powers[p]
            else:
                for q in range(p + 1):
                    coef = term.coefficient * math.comb(p, q) * t ** (p - q) * _two_omega_pow(w, q, None)
                    h = h + coef * powers[q]
        return h[np.ix_(idx, idx)]
    with mpmath.workdps(dps):
        w = mpmath.mpc(w)
        h = w * _to_mpc_matrix(kin)
        for term in _monomial_terms(potential):
            p = term.power
            if t is None:
                h = h + mpmath.mpc(term.coefficient) * _two_omega_pow(w, p, dps) * _to_mpc_matrix(powers[p])
            else:
                tc = mpmath.mpc(t)
                for q in range(p + 1):
                    coef = mpmath.mpc(term.coefficient) * math.comb(p, q) * tc ** (p - q) * _two_omega_pow(w, q, dps)
                    h = h + coef * _to_mpc_matrix(powers[q])
        out = mpmath.zeros(M, M)
        for a, ka in enumerate(idx):
            for b, kb in enumerate(idx):
                out[a, b] = h[int(ka), int(kb)]
        return out


def _to_mpc_matrix(m):
    out = mpmath.matrix(m.rows, m.cols)
    for i in range(m.rows):
        for j in range(m.cols):
            out[i, j] = mpmath.mpc(m[i, j])
    return out


def _assemble_radial_ho(basis, potential, w, M, dps, margin=0):
    qmax = potential.max_monomial_power() // 2
    n = M + qmax + margin
    powers = _radial_band_powers(n, basis.lam, qmax, dps)
    kin = _radial_kinetic_band(n, basis.lam, dps)
    if dps is None:
        w = complex(w)
        h = w * kin.astype(complex)
        for term in _monomial_terms(potential):
            q = term.power // 2
            h = h + term.coefficient * w ** (-q) * powers[q]
        return h[:M, :M]
    with mpmath.workdps(dps):
        w = mpmath.mpc(w)
        h = w * _to_mpc_matrix(kin)
        for term in _monomial_terms(potential):
            q = term.power // 2
            h = h + mpmath.mpc(term.coefficient) * w ** (-q) * _to_mpc_matrix(powers[q])
        return h[:M, :M]


# --------------------------------------------------------------------------
# trig-family assembly

def _trig_diag_gap(basis) -> int:
    # cos(a)cos(b) pairs n = j - m with n = j + m + 1; sin with j + m + 2
    return 1 if basis.family == TRIG_EVEN else 2


def _trig_wavenumbers(basis, M, dps):
    off = 0.5 if basis.family == TRIG_EVEN else 1.0
    if dps is None:
        return (np.arange(M) + off) * math.pi
    with mpmath.workdps(dps):
        return [(mpmath.mpf(j) + mpmath.mpf(off)) * mpmath.pi for j in range(M)]


def _term_moment_table(term, L, nmax, nodes, dps):
    """Table over n of the term's unit-interval cosine moments at scale L."""
    if term.kind == MONOMIAL:
        tab = poly_cos_moments(term.power, nmax, False, dps)
        scale = term.coefficient * L ** term.power
    elif term.kind == GAUSSIAN:
        tab = gaussian_cos_moments(term.decay * L * L, (0,), nmax, nodes, dps)[0]
        scale = term.coefficient
    else:
        raise UnsupportedPairError(term.kind)
    if dps is None:
        return complex(scale) * np.asarray(tab, dtype=complex)
    with mpmath.workdps(dps):
        s = mpmath.mpc(scale)
        return [s * v for v in tab]


def _assemble_trig(basis, potential, L, M, dps):
    gap = _trig_diag_gap(basis)
    nmax = 2 * M + gap
    nodes = 4 * (M + 8)
    k = _trig_wavenumbers(basis, M, dps)
    sign = 1.0 if basis.family == TRIG_EVEN else -1.0
    if dps is None:
        L = complex(L)
        j = np.arange(M)
        ndiff = np.abs(np.subtract.outer(j, j))
        nsum = np.add.outer(j, j) + gap
        h = np.zeros((M, M), dtype=complex)
        for term in potential.terms:
            tab = _term_moment_table(term, L, nmax, nodes, None)
            h = h + 0.5 * (tab[ndiff] + sign * tab[nsum])
        h[j, j] += (np.asarray(k) / complex(L)) ** 2 / 2.0
        return h
    with mpmath.workdps(dps):
        L = mpmath.mpc(L)
        h = mpmath.zeros(M, M)
        tabs = [_term_moment_table(term, L, nmax, nodes, dps) for term in potential.terms]
        half = mpmath.mpf(0.5)
        for a in range(M):
            for b in range(M):
                v = mpmath.mpc(0)
                for tab in tabs:
                    v += half * (tab[abs(a - b)] + sign * tab[a + b + gap])
                h[a, b] = v
        for a in range(M):
            h[a, a] += (k[a] / L) ** 2 / 2
        return h


def _radial_trig_tables(potential, L, nmax, dps):
    tabs = []
    for term in potential.terms:
        if term.kind == MONOMIAL:
            tab = poly_cos_moments(term.power, nmax, True, dps)
            scale = term.coefficient * L ** term.power
        else:  # exp_poly
            tab = exp_cos_moments(term.decay * L, term.power, nmax, dps)
            scale = term.coefficient * L ** term.power
        if dps is None:
            tabs.append(complex(scale) * np.asarray(tab, dtype=complex))
        else:
            with mpmath.workdps(dps):
                s = mpmath.mpc(scale)
                tabs.append([s * v for v in tab])
    return tabs


def _assemble_radial_trig(basis, potential, L, M, dps):
    nmax = 2 * M + 2
    k = _trig_wavenumbers(basis, M, dps)
    if dps is None:
        L = complex(L)
    tabs = _radial_trig_tables(potential, L, nmax, dps)
    if dps is None:
        j = np.arange(M)
        ndiff = np.abs(np.subtract.outer(j, j))
        nsum = np.add.outer(j, j) + 2
        h = np.zeros((M, M), dtype=complex)
        for tab in tabs:
            h = h + tab[ndiff] - tab[nsum]
        h[j, j] += (np.asarray(k) / complex(L)) ** 2 / 2.0
        return h
    with mpmath.workdps(dps):
        L = mpmath.mpc(L)
        h = mpmath.zeros(M, M)
        for a in range(M):
            for b in range(M):
                v = mpmath.mpc(0)
                for tab in tabs:
                    v += tab[abs(a - b)] - tab[a + b + 2]
                h[a, b] = v
        for a in range(M):
            h[a, a] += (k[a] / L) ** 2 / 2
        return h


def build_matrix(basis: BasisSpec, potential: PotentialSpec, params: ParamPoint,
                 M: int, dps: int | None = None, margin: int = 0) -> RRMatrix:
    """The M x M Hamiltonian block at the given parameter point.

    margin enlarges the internal band powers beyond the exact requirement;
    the retained block must not depend on it (validation hook).
    """
    if M < 1:
        raise ValueError("need M >= 1")
    check_support(basis, potential)
    vals = check_params(basis, params)
    fam = basis.family
    if fam in (HO, SHIFTED_HO):
        w = vals[0]
        t = vals[1] if fam == SHIFTED_HO else None
        h = _assemble_ho(basis, potential, w, t, M, dps, margin)
    elif fam == RADIAL_HO:
        # the centrifugal term is folded into the kinetic band, monomials remain
        h = _assemble_radial_ho(basis, potential, vals[0], M, dps, margin)
    elif fam in (TRIG_EVEN, TRIG_ODD):
        h = _assemble_trig(basis, potential, vals[0], M, dps)
    else:
        h = _assemble_radial_trig(basis, potential, vals[0], M, dps)
    return RRMatrix(M=M, entries=h, params=params, sector=basis.sector)


# --------------------------------------------------------------------------
# traces

def trace_fn(basis: BasisSpec, potential: PotentialSpec, M: int,
             dps: int | None = None) -> TraceFunction:
    """Tr of the M x M block as a closed function of the basis parameters."""
    check_support(basis, potential)
    fam = basis.family
    if fam == HO:
        return _trace_ho(basis, potential, M, dps)
    if fam == SHIFTED_HO:
        return _trace_shifted(basis, potential, M, dps)
    if fam == RADIAL_HO:
        return _trace_radial_ho(basis, potential, M, dps)
    if fam in (TRIG_EVEN, TRIG_ODD):
        return _trace_trig(basis, potential, M, dps)
    return _trace_radial_trig(basis, potential, M, dps)


def _zero(dps):
    return 0j if dps is None else mpmath.mpc(0)


def _trace_ho(basis, potential, M, dps):
    idx = basis.indices(M)
    pmax = potential.max_monomial_power()
    n = int(idx[-1]) + pmax + 1
    powers = _position_band_powers(n, pmax, dps)
    kin = _kinetic_band(n, dps)
    coeffs = {1: _zero(dps), }
    coeffs[1] += _diag_sum(kin, idx, dps)
    for term in _monomial_terms(potential):
        p = term.power
        c = term.coefficient * _pow2(-p // 2, dps) * _diag_sum(powers[p], idx, dps)
        coeffs[-(p // 2)] = coeffs.get(-(p // 2), _zero(dps)) + c
    return TraceFunction("laurent", M, basis, potential, dps, coeffs=coeffs)


def _trace_shifted(basis, potential, M, dps):
    idx = basis.indices(M)
    pmax = potential.max_monomial_power()
    n = int(idx[-1]) + pmax + 1
    powers = _position_band_powers(n, pmax, dps)
    kin = _kinetic_band(n, dps)
    coeffs = {(0, 1): _diag_sum(kin, idx, dps)}
    for term in _monomial_terms(potential):
        p = term.power
        for q in range(0, p + 1, 2):
            key = (p - q, -(q // 2))
            c = term.coefficient * math.comb(p, q) * _pow2(-q // 2, dps) * _diag_sum(powers[q], idx, dps)
            coeffs[key] = coeffs.get(key, _zero(dps)) + c
    return TraceFunction("laurent2", M, basis, potential, dps, coeffs=coeffs)


def _trace_radial_ho(basis, potential, M, dps):
    qmax = potential.max_monomial_power() // 2
    n = M + qmax
    powers = _radial_band_powers(n, basis.lam, qmax, dps)
    kin = _radial_kinetic_band(n, basis.lam, dps)
    idx = np.arange(M)
    coeffs = {1: _diag_sum(kin, idx, dps)}
    for term in _monomial_terms(potential):
        q = term.power // 2
        c = term.coefficient * _diag_sum(powers[q], idx, dps)
        coeffs[-q] = coeffs.get(-q, _zero(dps)) + c
    return TraceFunction("laurent", M, basis, potential, dps, coeffs=coeffs)


def _diag_sum(matrix, idx, dps):
    if dps is None:
        return complex(sum(matrix[int(k), int(k)] for k in idx))
    with mpmath.workdps(dps):
        return mpmath.mpc(mpmath.fsum(matrix[int(k), int(k)] for k in idx))


def _pow2(q: int, dps):
    if dps is None:
        return 2.0**q
    return mpmath.mpf(2) ** q


def _trace_trig(basis, potential, M, dps):
    gap = _trig_diag_gap(basis)
    sign = 1.0 if basis.family == TRIG_EVEN else -1.0
    nodes = 4 * (M + 8)
    diag_n = [2 * j + gap for j in range(M)]
    nmax = diag_n[-1]
    k = _trig_wavenumbers(basis, M, dps)
    if dps is None:
        ksq = float(np.sum(np.asarray(k) ** 2))
    else:
        ksq = mpmath.fsum(v * v for v in k)
    # L-independent pieces of the monomial sums
    mono = []
    for term in _monomial_terms(potential):
        tab = poly_cos_moments(term.power, nmax, False, dps)
        s = 0.5 * (M * tab[0] + sign * _sum_at(tab, diag_n, dps))
        mono.append((term.coefficient, term.power, s))
    gauss = [(t.coefficient, t.decay) for t in potential.terms if t.kind == GAUSSIAN]

    def raw(L):
        T = ksq / (2 * L * L)
        dT = -ksq / (L * L * L)
        d2T = 3 * ksq / (L * L * L * L)
        for c, p, s in mono:
            T = T + c * L**p * s
            dT = dT + c * p * L ** (p - 1) * s
            d2T = d2T + c * p * (p - 1) * L ** (p - 2) * s
        for c, beta in gauss:
            g = gaussian_cos_moments(beta * L * L, (0, 2, 4), nmax, nodes, dps)
            s0 = 0.5 * (M * g[0][0] + sign * _sum_at(g[0], diag_n, dps))
            s2 = 0.5 * (M * g[2][0] + sign * _sum_at(g[2], diag_n, dps))
            s4 = 0.5 * (M * g[4][0] + sign * _sum_at(g[4], diag_n, dps))
            T = T + c * s0
            dT = dT + c * (-2 * beta * L) * s2
            d2T = d2T + c * (-2 * beta * s2 + 4 * beta * beta * L * L * s4)
        return T, dT, d2T

    return TraceFunction("evaluator", M, basis, potential, dps, _raw=raw)


def _sum_at(tab, positions, dps):
    if dps is None:
        return complex(np.sum(np.asarray(tab)[positions]))
    with mpmath.workdps(dps):
        return mpmath.fsum(tab[n] for n in positions)


def _trace_radial_trig(basis, potential, M, dps):
    diag_n = [2 * j + 2 for j in range(M)]
    nmax = diag_n[-1]
    k = _trig_wavenumbers(basis, M, dps)
    if dps is None:
        ksq = float(np.sum(np.asarray(k) ** 2))
    else:
        ksq = mpmath.fsum(v * v for v in k)
    mono = []
    for t in potential.terms:
        if t.kind == MONOMIAL:
            tab = poly_cos_moments(t.power, nmax, True, dps)
            s = M * tab[0] - _sum_at(tab, diag_n, dps)
            mono.append((t.coefficient, t.power, s))
    exps = [(t.coefficient, t.power, t.decay) for t in potential.terms if t.kind == EXP_POLY]

    def raw(L):
        T = ksq / (2 * L * L)
        dT = -ksq / (L * L * L)
        d2T = 3 * ksq / (L * L * L * L)
        for c, p, s in mono:
            T = T + c * L**p * s
            dT = dT + c * p * L ** (p - 1) * s
            d2T = d2T + c * p * (p - 1) * L ** (p - 2) * s
        for c, p, a in exps:
            z = a * L
            e0 = exp_cos_moments(z, p, nmax, dps)
            e1 = exp_cos_moments(z, p + 1, nmax, dps)
            e2 = exp_cos_moments(z, p + 2, nmax, dps)
            s0 = M * e0[0] - _sum_at(e0, diag_n, dps)
            s1 = M * e1[0] - _sum_at(e1, diag_n, dps)
            s2 = M * e2[0] - _sum_at(e2, diag_n, dps)
            T = T + c * L**p * s0
            dT = dT + c * (p * L ** (p - 1) * s0 - a * L**p * s1)
            d2T = d2T + c * (p * (p - 1) * L ** (p - 2) * s0
                             - 2 * a * p * L ** (p - 1) * s1 + a * a * L**p * s2)
        return T, dT, d2T

    return TraceFunction("evaluator", M, basis, potential, dps, _raw=raw)
