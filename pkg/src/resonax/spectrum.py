"""Eigenvalues of the Rayleigh-Ritz block and stabilization across a ladder.

The block is complex symmetric, never Hermitian, so eigenvalues come from a
general dense solver with no conjugation anywhere.  Resonances are the
eigenvalues that stop moving when M grows; everything else (rotated
continuum) keeps drifting and is filtered out by the inter-rung drift test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ddmath, precision
from .basis import ParamPoint
from .matelem import RRMatrix

DOUBLE = "double"
DD = "dd"


def tier_digits(tier) -> float:
    if tier is None or tier == DOUBLE:
        return 15.9
    if tier == DD:
        return 31.0
    return float(tier)


def build_dps(tier, M: int):
    """Assembly precision for a rung: entry rounding must stay below the
    eigensolver's working precision, and the compensated splits feeding the
    dd solver need headroom that grows with the matrix size."""
    if tier is None or tier == DOUBLE:
        return None
    if tier == DD:
        return 50 + M // 4
    return int(tier)


@dataclass
class EigenSet:
    """All eigenvalues of one rung, sorted by real part."""

    M: int
    params: ParamPoint
    values: np.ndarray
    tier: object = DOUBLE
    sector: str = "all"
    matrix: RRMatrix | None = field(default=None, repr=False)


@dataclass
class ResonanceResult:
    """One stabilized eigenvalue, reported as energy and width."""

    E: float
    Gamma: float
    sector: str
    n: int
    converged_digits: float
    history: list = field(repr=False, default_factory=list)

    @property
    def eps(self) -> complex:
        return complex(self.E, -0.5 * self.Gamma)


def _entries_complex(entries) -> np.ndarray:
    if isinstance(entries, np.ndarray):
        return np.ascontiguousarray(entries, dtype=complex)
    n = entries.rows
    a = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            a[i, j] = complex(entries[i, j])
    return a


def eigenvalues(matrix: RRMatrix, tier=None) -> EigenSet:
    """Diagonalize one rung at the requested precision tier.

    tier: None or "double" for numpy, "dd" for the double-double QR kernel,
    an integer for an mpmath solve at that many digits (results are still
    returned as complex128; the extra digits buy a smaller solver floor, not
    a wider return type).
    """
    if tier is None or tier == DOUBLE:
        vals = np.linalg.eigvals(_entries_complex(matrix.entries))
        tier = DOUBLE
    elif tier == DD:
        vals = ddmath.eigvals_dd(matrix.entries)
    else:
        dps = precision.check_digits(int(tier))
        vals = np.asarray(precision.eig_general(matrix.entries, dps), dtype=complex)
    order = np.argsort(vals.real, kind="stable")
    return EigenSet(M=matrix.M, params=matrix.params, values=vals[order],
                    tier=tier, sector=matrix.sector, matrix=matrix)


@dataclass
class Pairing:
    """Greedy nearest-neighbor match between consecutive rungs."""

    pairs: list          # (prev_index, curr_index)
    new: list            # curr indices with no partner within the window


def match_ladder(prev: EigenSet, curr: EigenSet, window: float = 0.5) -> Pairing:
    """Pair eigenvalues of consecutive rungs by complex distance.

    Greedy on ascending distance, each index used once, pairs farther than
    window rejected.  Unpaired current eigenvalues are new states or rotated
    continuum points; the caller decides which by watching their drift.
    """
    pv, cv = prev.values, curr.values
    dist = np.abs(cv[None, :] - pv[:, None])
    order = np.argsort(dist, axis=None, kind="stable")
    used_p = np.zeros(len(pv), dtype=bool)
    used_c = np.zeros(len(cv), dtype=bool)
    pairs = []
    for flat in order:
        i, j = divmod(int(flat), len(cv))
        if dist[i, j] >= window:
            break
        if used_p[i] or used_c[j]:
            continue
        used_p[i] = True
        used_c[j] = True
        pairs.append((i, j))
    pairs.sort()
    new = [j for j in range(len(cv)) if not used_c[j]]
    return Pairing(pairs=pairs, new=new)


def _chain_histories(ladder, window):
    chains = {i: [(ladder[0].M, ladder[0].values[i], ladder[0].params)]
              for i in range(len(ladder[0].values))}
    for prev, curr in zip(ladder, ladder[1:]):
        pairing = match_ladder(prev, curr, window)
        nxt = {}
        for i, j in pairing.pairs:
            nxt[j] = chains[i] + [(curr.M, curr.values[j], curr.params)]
        for j in pairing.new:
            nxt[j] = [(curr.M, curr.values[j], curr.params)]
        chains = nxt
    return chains


def resonances(ladder, tol: float = 1e-8, window: float = 0.5,
               refine: bool = False) -> list[ResonanceResult]:
    """Stabilized eigenvalues of a ladder, as energies and widths.

    An eigenvalue qualifies if its chain reaches the final rung, its last
    inter-rung drift is below tol, and it sits on or below the real axis
    (positive imaginary dust up to 1e-12 is clamped to a bound state).

    refine=True polishes each reported eigenvalue of a double-double final
    rung through the mixed-precision resolvent step; worthwhile only when
    the basis is ill-conditioned enough that the QR fuzz exceeds the target
    accuracy, so it is off by default.
    """
    if len(ladder) < 2:
        raise ValueError("stabilization needs at least two rungs")
    final = ladder[-1]
    chains = _chain_histories(ladder, window)
    cap = tier_digits(final.tier)
    # solver floor for imaginary parts: u_tier * ||H||; dust below it is a
    # bound state, genuine positive imag beyond it disqualifies the chain
    scale = 1.0
    if final.matrix is not None:
        ent = final.matrix.entries
        if isinstance(ent, np.ndarray):
            scale = max(scale, float(np.abs(ent).max()))
        else:
            scale = max(scale, max(abs(complex(ent[i, i])) for i in range(ent.rows)))
    dust = 10.0 ** (-cap) * scale

    refiner = None
    if refine and final.tier == DD and final.matrix is not None:
        entries = final.matrix.entries
        if not isinstance(entries, np.ndarray):
            comp = ddmath.to_components(entries)

            def refiner(val):
                return ddmath.refine_eigenvalue_mixed(comp, entries, val)

    out = []
    for hist in chains.values():
        if len(hist) < 2:
            continue
        eps = complex(hist[-1][1])
        drift = abs(eps - complex(hist[-2][1]))
        if not drift < tol:
            continue
        if eps.imag > dust:
            continue
        if refiner is not None:
            eps = refiner(eps)
            hist = hist[:-1] + [(hist[-1][0], eps, hist[-1][2])]
        im = min(eps.imag, 0.0)
        if im > -dust:
            im = 0.0
        digits = cap if drift == 0.0 else min(cap, -math.log10(drift))
        out.append(ResonanceResult(E=eps.real, Gamma=abs(2.0 * im),
                                   sector=final.sector, n=0,
                                   converged_digits=digits, history=hist))
    out.sort(key=lambda r: r.E)
    for k, r in enumerate(out):
        r.n = k
    return out
