"""Complex stationary points of the trace and root continuation over M.

The nonlinear basis parameters are fixed where Tr H is stationary.  For
Laurent traces every stationary point is enumerated by clearing denominators
and taking companion-matrix roots, then each is polished by Newton on the
gradient.  Trig traces only expose an evaluator, so a multi-start Newton grid
stands in for enumeration.  Selection among candidates is continuation when a
previous rung exists and a resonance-side preference on the first rung.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import ParamPoint, RADIAL_TRIG, SHIFTED_HO, TRIG_FAMILIES, validity_region
from .matelem import TraceFunction
from .potentials import PotentialSpec

NEWTON_TOL = 1e-13
NEWTON_MAXITER = 60
DEDUP = 1e-8
RESIDUAL_GATE = 1e-10


@dataclass
class RootCandidate:
    """One polished stationary point of the trace."""

    params: ParamPoint
    residual: float
    valid: bool


@dataclass
class LadderPlan:
    """Increasing M values to walk, with optional per-rung seed overrides."""

    M_list: list
    seeds: dict | None = None

    def __post_init__(self):
        ms = list(self.M_list)
        if not ms or any(int(m) <= 0 for m in ms):
            raise ValueError("M_list must hold positive integers")
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("M_list must be strictly increasing")
        self.M_list = [int(m) for m in ms]


def length_scale(potential: PotentialSpec) -> float:
    """Rough distance over which the potential lives, for start grids."""
    best = 1.0
    for t in potential.terms:
        if t.kind == "exp_poly":
            best = max(best, (t.power + 8.0) / t.decay)
        elif t.kind == "gaussian":
            best = max(best, 3.0 / np.sqrt(t.decay))
        elif t.kind == "monomial" and t.power > 2 and t.coefficient != 0:
            best = max(best, float(abs(t.coefficient)) ** (-1.0 / t.power))
    return best


def _newton1(tf: TraceFunction, x0: complex):
    x = complex(x0)
    for _ in range(NEWTON_MAXITER):
        g = tf.gradient(x)[0]
        h = tf.second(x)
        if h == 0 or not np.isfinite(abs(g)) or not np.isfinite(abs(h)):
            return None
        step = complex(g / h)
        x -= step
        if not np.isfinite(abs(x)):
            return None
        if abs(step) <= NEWTON_TOL * max(1.0, abs(x)):
            return (x,)
    return None


def _newton2(tf: TraceFunction, w0: complex, t0: complex):
    w, t = complex(w0), complex(t0)
    for _ in range(NEWTON_MAXITER):
        gw, gt = tf.gradient(w, t)
        (hww, hwt), (_, htt) = tf.second(w, t)
        det = hww * htt - hwt * hwt
        if det == 0:
            return None
        dw = (gw * htt - gt * hwt) / det
        dt = (gt * hww - gw * hwt) / det
        w -= dw
        t -= dt
        if not (np.isfinite(abs(w)) and np.isfinite(abs(t))):
            return None
        if abs(dw) + abs(dt) <= NEWTON_TOL * max(1.0, abs(w) + abs(t)):
            return (w, t)
    return None


def _residual(tf: TraceFunction, vals) -> float:
    g = tf.gradient(*vals)
    return float(sum(abs(complex(gi)) for gi in g))


def _residual_scale(tf: TraceFunction, vals) -> float:
    return max(1.0, abs(complex(tf.value(*vals))))


def _vals(point: ParamPoint) -> tuple:
    return tuple(v for v in (point.omega, point.t, point.L) if v is not None)


def _point(tf: TraceFunction, vals) -> ParamPoint:
    fam = tf.basis.family
    if fam in TRIG_FAMILIES:
        return ParamPoint(L=vals[0])
    if fam == SHIFTED_HO:
        return ParamPoint(omega=vals[0], t=vals[1])
    return ParamPoint(omega=vals[0])


def _snap_real(v: complex) -> complex:
    # Newton noise of ~1e-30 in Im would flip strict-inequality validity
    # checks on genuinely real roots, so tiny imaginary parts are dropped.
    v = complex(v)
    if abs(v.imag) < 1e-12 * max(1.0, abs(v)):
        return complex(v.real, 0.0)
    return v


def _collect(tf: TraceFunction, solutions) -> list:
    ok = validity_region(tf.basis.family)
    out = []
    for vals in solutions:
        if vals is None:
            continue
        vals = tuple(_snap_real(v) for v in vals)
        dup = False
        for cand in out:
            prev = _vals(cand.params)
            if sum(abs(complex(a) - complex(b)) for a, b in zip(prev, vals)) < DEDUP:
                dup = True
                break
        if dup:
            continue
        res = _residual(tf, vals)
        if res > RESIDUAL_GATE * _residual_scale(tf, vals):
            continue
        try:
            point = _point(tf, vals)
        except ValueError:
            continue
        out.append(RootCandidate(params=point, residual=res,
                                 valid=ok([complex(v) for v in vals])))
    return out


def _laurent_roots(tf: TraceFunction):
    kmin = min(tf.coeffs)
    kmax = max(tf.coeffs)
    # d/dw of sum c_k w^k, multiplied by w^(1-kmin): plain polynomial
    deg = kmax - kmin
    poly = np.zeros(deg + 1, dtype=complex)
    for k, c in tf.coeffs.items():
        if k:
            poly[kmax - k] = k * complex(c)
    roots = np.roots(poly)
    return [_newton1(tf, r) for r in roots if r != 0]


def _grid_starts(tf: TraceFunction):
    scale = length_scale(tf.potential)
    res = np.geomspace(0.2, 5.0, 8) * scale
    ims = np.geomspace(0.05, 5.0, 8) * scale
    starts = [complex(a, b) for a in res for b in ims]
    if tf.basis.family in TRIG_FAMILIES:
        # the optimal box sometimes sits at negative real part (the branch
        # swaps sides as M grows), so mirror the grid
        starts += [complex(-a, b) for a in res for b in ims]
    return starts


def _shifted_starts(tf: TraceFunction):
    scale = length_scale(tf.potential)
    ws = [complex(a, -b) for a in (0.6, 1.0, 1.4) for b in (0.2, 0.7, 1.4)]
    toff = [0j]
    for a in (0.35, 0.8):
        for b in (0.4, 1.1, 1.8):
            toff += [complex(-a * scale, -b * scale), complex(-a * scale, b * scale),
                     complex(a * scale, -b * scale)]
    return [(w, t) for w in ws for t in toff]


def _as_starts(extra_starts, nparams):
    out = []
    for s in extra_starts:
        if isinstance(s, ParamPoint):
            vals = [complex(v) for v in _vals(s)]
        elif isinstance(s, (tuple, list)):
            vals = [complex(v) for v in s]
        else:
            vals = [complex(s)]
        out.append(vals[0] if nparams == 1 else tuple(vals[:nparams]))
    return out


def stationary_points(tf: TraceFunction, extra_starts=None) -> list:
    """All polished stationary points of the trace, deduplicated.

    Laurent traces are enumerated exactly through companion-matrix roots;
    evaluator and two-parameter traces run Newton from a start grid (plus
    extra_starts, e.g. the previous rung's root).  Candidates keep their
    validity flag so audit tooling can show discarded roots.
    """
    if tf.kind == "laurent":
        sols = _laurent_roots(tf)
        if extra_starts:
            sols += [_newton1(tf, s) for s in _as_starts(extra_starts, 1)]
    elif tf.kind == "laurent2":
        starts = _shifted_starts(tf)
        if extra_starts:
            starts = list(starts) + _as_starts(extra_starts, 2)
        sols = [_newton2(tf, w, t) for w, t in starts]
    else:
        starts = _grid_starts(tf)
        if extra_starts:
            starts = list(starts) + _as_starts(extra_starts, 1)
        sols = [_newton1(tf, s) for s in starts]
    cands = _collect(tf, sols)
    if not any(c.valid for c in cands):
        raise RuntimeError(f"no valid stationary point found for M={tf.M}")
    return cands


def _resonance_side(cand: RootCandidate, family: str) -> bool:
    lead = complex(_vals(cand.params)[0])
    floor = 1e-8 * max(1.0, abs(lead))
    if family in TRIG_FAMILIES:
        return lead.imag > floor
    return lead.imag < -floor


def _lead(cand: RootCandidate) -> complex:
    return complex(_vals(cand.params)[0])


def select_root(candidates, history: ParamPoint | None = None,
                family: str | None = None, probe=None) -> ParamPoint:
    """Pick one stationary point: continuation if possible, else first rung.

    With history the nearest valid candidate wins.  On the first rung the
    resonance-side roots (rotating the contour the right way) are preferred.
    A stationary trace says nothing about how much of the spectrum a branch
    resolves, so when a probe is supplied (see exposure_probe) candidates
    that fail to stabilize a single eigenvalue are discarded; among the
    survivors the box bases take the smallest box that works, since tighter
    boxes expose broad states better, and the oscillator bases take the
    most-rotated contour.  Without a probe, residual ties go to the
    most-rotated root: shallow roots tend to be spurious near-real
    artifacts of the truncation.
    """
    valid = [c for c in candidates if c.valid]
    if not valid:
        raise ValueError("no valid root candidates")
    if family is None:
        family = RADIAL_TRIG if valid[0].params.L is not None else "ho"
    if history is not None:
        prev = [complex(v) for v in _vals(history)]

        def dist(c):
            vals = [complex(v) for v in _vals(c.params)]
            return sum(abs(a - b) for a, b in zip(vals, prev))

        return min(valid, key=dist).params
    side = [c for c in valid if _resonance_side(c, family)]
    if not side:
        return min(valid, key=lambda c: c.residual).params
    if probe is not None and len(side) > 1:
        short = sorted(side, key=lambda c: abs(_lead(c).imag))[:6]
        survivors = [c for c in short if probe(c) > 0]
        if survivors:
            if family in TRIG_FAMILIES:
                # quantized Im so exact mirror twins tie, then prefer +Re
                return min(survivors, key=lambda c: (
                    round(_lead(c).imag / 1e-9),
                    0 if _lead(c).real >= 0 else 1)).params
            return max(survivors, key=lambda c: abs(_lead(c).imag)).params
    rmin = min(c.residual for c in side)
    band = [c for c in side if c.residual <= max(10.0 * rmin, rmin + 1e-12)]
    return max(band, key=lambda c: abs(_lead(c).imag)).params


def exposure_probe(tf: TraceFunction, tier=None, frac: float = 0.75,
                   drift_tol: float = 1e-3, window: float = 0.5):
    """Two-size stabilization probe for first-rung branch selection.

    Returns a callable scoring a RootCandidate by the number of eigenvalues
    that stay put (relative drift below drift_tol, not pushed above the real
    axis) when the candidate's branch is continued down to a smaller basis
    of frac * M functions.  Probing must run at the tier the ladder will
    use: a branch whose spectrum only resolves beyond double precision
    scores zero under a double-precision probe.
    """
    from . import spectrum
    from .matelem import build_matrix, trace_fn

    M0 = tf.M
    M_small = max(8, int(frac * M0))
    small = trace_fn(tf.basis, tf.potential, M_small, None)
    state: dict = {}

    def dps_for(M):
        return spectrum.build_dps(tier, M)

    def probe(cand: RootCandidate) -> int:
        if "grid" not in state:
            try:
                state["grid"] = stationary_points(small)
            except RuntimeError:
                state["grid"] = []
        if small.kind == "laurent2":
            sol = _newton2(small, *(complex(v) for v in _vals(cand.params)))
        else:
            sol = _newton1(small, complex(_vals(cand.params)[0]))
        extra = _collect(small, [sol]) if sol is not None else []
        pcands = state["grid"] + extra
        try:
            pbest = select_root(pcands, history=cand.params)
        except ValueError:
            return 0
        sets = []
        for M, pt in ((M_small, pbest), (M0, cand.params)):
            m = build_matrix(tf.basis, tf.potential, pt, M, dps=dps_for(M))
            sets.append(spectrum.eigenvalues(m, tier=tier))
        pairing = spectrum.match_ladder(sets[0], sets[1], window=window)
        n = 0
        for i, j in pairing.pairs:
            a, b = sets[0].values[i], sets[1].values[j]
            if abs(a - b) < drift_tol * max(1.0, abs(b)) and b.imag <= 1e-10:
                n += 1
        return n

    return probe


def optimize_shifted(tf: TraceFunction) -> ParamPoint:
    """First-rung (omega, t) for the shifted oscillator family."""
    if tf.basis.family != SHIFTED_HO:
        raise ValueError("optimize_shifted needs a shifted_ho trace")
    return select_root(stationary_points(tf), family=SHIFTED_HO)
