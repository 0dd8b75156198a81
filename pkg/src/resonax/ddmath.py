"""Double-double eigensolver for dense complex matrices.

Complex-scaled bases can be exponentially ill conditioned: the basis is
exactly c-orthonormal, yet the similarity that diagonalizes H(M) carries
factors like exp(2 M Im L / |L|) between its columns.  Once kappa * ||H||
passes 1/eps the resonance eigenvalues computed in double precision are
noise even though every matrix entry is correct to the last bit.  The fix
is a wider working precision, not a better double algorithm.

This module runs the dense eigenproblem in double-double arithmetic
(hi + lo float pairs, about 31 significant digits) built from error-free
transformations, compiled with numba.  The algorithm is a unitary
Householder reduction to Hessenberg form followed by an explicit
single-shift QR with Wilkinson shifts, eigenvalues only.

Unitary transforms are used deliberately.  A complex-orthogonal
(conjugation-free) tridiagonalization would preserve the complex
symmetry of H, but its reflectors can become quasi-null, v.v ~ 0 while
||v|| ~ 1, and the accumulated element growth eats the extra digits.
Unitary reflectors have real positive v*.v and no such failure mode; the
computed eigenvalues carry a backward error of order 1e-31 * ||H||.

Matrices travel as (n, n, 4) float64 component arrays laid out as
[re_hi, re_lo, im_hi, im_lo].
"""

from __future__ import annotations

import numpy as np
from numba import njit

import mpmath

_SPLIT = 134217729.0  # 2**27 + 1, Dekker splitter


class ConvergenceError(RuntimeError):
    """QR iteration failed to deflate within the sweep budget."""


# --------------------------------------------------------------------------
# error-free transformations and real double-double scalars
# --------------------------------------------------------------------------

@njit(inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(inline="always")
def _qsum(a, b):
    # assumes |a| >= |b| or a == 0
    s = a + b
    return s, b - (s - a)


@njit(inline="always")
def _two_prod(a, b):
    p = a * b
    ta = _SPLIT * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLIT * b
    bh = tb - (tb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(inline="always")
def _add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e += al + bl
    return _qsum(s, e)


@njit(inline="always")
def _sub(ah, al, bh, bl):
    s, e = _two_sum(ah, -bh)
    e += al - bl
    return _qsum(s, e)


@njit(inline="always")
def _mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _qsum(p, e)


@njit(inline="always")
def _div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _mul(q1, 0.0, bh, bl)
    rh, rl = _sub(ah, al, ph, pl)
    q2 = rh / bh
    ph, pl = _mul(q2, 0.0, bh, bl)
    rh, rl = _sub(rh, rl, ph, pl)
    q3 = rh / bh
    sh, sl = _qsum(q1, q2)
    return _add(sh, sl, q3, 0.0)


@njit(inline="always")
def _sqrt_dd(ah, al):
    # ah >= 0 assumed
    if ah <= 0.0:
        return 0.0, 0.0
    s = np.sqrt(ah)
    ph, pl = _two_prod(s, s)
    dh, dl = _sub(ah, al, ph, pl)
    return _qsum(s, dh / (2.0 * s))


# --------------------------------------------------------------------------
# complex double-double quadruples (re_hi, re_lo, im_hi, im_lo)
# --------------------------------------------------------------------------

@njit(inline="always")
def _cadd(xr, xe, xi, xf, yr, ye, yi, yf):
    rh, rl = _add(xr, xe, yr, ye)
    ih, il = _add(xi, xf, yi, yf)
    return rh, rl, ih, il


@njit(inline="always")
def _csub(xr, xe, xi, xf, yr, ye, yi, yf):
    rh, rl = _sub(xr, xe, yr, ye)
    ih, il = _sub(xi, xf, yi, yf)
    return rh, rl, ih, il


@njit(inline="always")
def _cmul(xr, xe, xi, xf, yr, ye, yi, yf):
    ph, pl = _mul(xr, xe, yr, ye)
    qh, ql = _mul(xi, xf, yi, yf)
    rh, rl = _sub(ph, pl, qh, ql)
    ph, pl = _mul(xr, xe, yi, yf)
    qh, ql = _mul(xi, xf, yr, ye)
    ih, il = _add(ph, pl, qh, ql)
    return rh, rl, ih, il


@njit(inline="always")
def _cabs2(xr, xe, xi, xf):
    ph, pl = _mul(xr, xe, xr, xe)
    qh, ql = _mul(xi, xf, xi, xf)
    return _add(ph, pl, qh, ql)


@njit(inline="always")
def _cdiv_real(xr, xe, xi, xf, dh, dl):
    rh, rl = _div(xr, xe, dh, dl)
    ih, il = _div(xi, xf, dh, dl)
    return rh, rl, ih, il


@njit(inline="always")
def _csqrt(xr, xe, xi, xf):
    # principal branch
    mh, ml = _cabs2(xr, xe, xi, xf)
    mh, ml = _sqrt_dd(mh, ml)
    if mh == 0.0:
        return 0.0, 0.0, 0.0, 0.0
    if xr >= 0.0:
        th, tl = _add(mh, ml, xr, xe)
        wh, wl = _sqrt_dd(0.5 * th, 0.5 * tl)
        ih, il = _div(xi, xf, 2.0 * wh, 2.0 * wl)
        return wh, wl, ih, il
    th, tl = _sub(mh, ml, xr, xe)
    wh, wl = _sqrt_dd(0.5 * th, 0.5 * tl)
    rh, rl = _div(xi, xf, 2.0 * wh, 2.0 * wl)
    if xi < 0.0 or (xi == 0.0 and xf < 0.0):
        return -rh, -rl, -wh, -wl
    return rh, rl, wh, wl


@njit(inline="always")
def _abs_est(xr, xi):
    return abs(xr) + abs(xi)


# --------------------------------------------------------------------------
# unitary Householder reduction to Hessenberg form, in place
# --------------------------------------------------------------------------

@njit(cache=True)
def _hessenberg(h):
    n = h.shape[0]
    v = np.empty((n, 4))
    for k in range(n - 2):
        n2h = 0.0
        n2l = 0.0
        for i in range(k + 1, n):
            ah, al = _cabs2(h[i, k, 0], h[i, k, 1], h[i, k, 2], h[i, k, 3])
            n2h, n2l = _add(n2h, n2l, ah, al)
        if n2h <= 0.0:
            continue
        nrh, nrl = _sqrt_dd(n2h, n2l)
        x0r, x0e, x0i, x0f = h[k + 1, k, 0], h[k + 1, k, 1], h[k + 1, k, 2], h[k + 1, k, 3]
        a2h, a2l = _cabs2(x0r, x0e, x0i, x0f)
        axh, axl = _sqrt_dd(a2h, a2l)
        if axh > 0.0:
            phr, phe, phi, phf = _cdiv_real(x0r, x0e, x0i, x0f, axh, axl)
        else:
            phr, phe, phi, phf = 1.0, 0.0, 0.0, 0.0
        # alpha = -phase*nrm, v = x - alpha e1: |v0| = |x0| + nrm, no cancellation
        alr, ale, ali, alf = _cmul(phr, phe, phi, phf, -nrh, -nrl, 0.0, 0.0)
        v[k + 1, 0], v[k + 1, 1], v[k + 1, 2], v[k + 1, 3] = _csub(
            x0r, x0e, x0i, x0f, alr, ale, ali, alf)
        for i in range(k + 2, n):
            v[i, 0], v[i, 1], v[i, 2], v[i, 3] = h[i, k, 0], h[i, k, 1], h[i, k, 2], h[i, k, 3]
        # v*.v = 2 (nrm^2 + nrm |x0|), real positive; beta = 2 / v*.v
        th, tl = _mul(nrh, nrl, axh, axl)
        th, tl = _add(th, tl, n2h, n2l)
        bh, bl = _div(1.0, 0.0, th, tl)
        # left update: rows k+1.., columns k..
        for j in range(k, n):
            wr, we, wi, wf = 0.0, 0.0, 0.0, 0.0
            for i in range(k + 1, n):
                tr, te, ti, tf = _cmul(v[i, 0], v[i, 1], -v[i, 2], -v[i, 3],
                                       h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3])
                wr, we, wi, wf = _cadd(wr, we, wi, wf, tr, te, ti, tf)
            wr, we = _mul(wr, we, bh, bl)
            wi, wf = _mul(wi, wf, bh, bl)
            for i in range(k + 1, n):
                tr, te, ti, tf = _cmul(v[i, 0], v[i, 1], v[i, 2], v[i, 3], wr, we, wi, wf)
                h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3] = _csub(
                    h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3], tr, te, ti, tf)
        # right update: all rows, columns k+1..
        for i in range(n):
            wr, we, wi, wf = 0.0, 0.0, 0.0, 0.0
            for j in range(k + 1, n):
                tr, te, ti, tf = _cmul(h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3],
                                       v[j, 0], v[j, 1], v[j, 2], v[j, 3])
                wr, we, wi, wf = _cadd(wr, we, wi, wf, tr, te, ti, tf)
            wr, we = _mul(wr, we, bh, bl)
            wi, wf = _mul(wi, wf, bh, bl)
            for j in range(k + 1, n):
                tr, te, ti, tf = _cmul(wr, we, wi, wf, v[j, 0], v[j, 1], -v[j, 2], -v[j, 3])
                h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3] = _csub(
                    h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3], tr, te, ti, tf)
        h[k + 1, k, 0], h[k + 1, k, 1] = alr, ale
        h[k + 1, k, 2], h[k + 1, k, 3] = ali, alf
        for i in range(k + 2, n):
            h[i, k, 0] = h[i, k, 1] = h[i, k, 2] = h[i, k, 3] = 0.0


# --------------------------------------------------------------------------
# explicit single-shift QR on the Hessenberg form, eigenvalues only
# --------------------------------------------------------------------------

@njit(inline="always")
def _two_by_two(a11r, a11e, a11i, a11f, a12r, a12e, a12i, a12f,
                a21r, a21e, a21i, a21f, a22r, a22e, a22i, a22f):
    # mean +- sqrt(((a11 - a22)/2)^2 + a12 a21)
    pr, pe, pi, pf = _csub(a11r, a11e, a11i, a11f, a22r, a22e, a22i, a22f)
    pr, pe, pi, pf = 0.5 * pr, 0.5 * pe, 0.5 * pi, 0.5 * pf
    dr, de, di, df = _cmul(pr, pe, pi, pf, pr, pe, pi, pf)
    br, be, bi, bf = _cmul(a12r, a12e, a12i, a12f, a21r, a21e, a21i, a21f)
    dr, de, di, df = _cadd(dr, de, di, df, br, be, bi, bf)
    sr, se, si, sf = _csqrt(dr, de, di, df)
    mr, me = _add(a11r, a11e, a22r, a22e)
    mi, mf = _add(a11i, a11f, a22i, a22f)
    mr, me, mi, mf = 0.5 * mr, 0.5 * me, 0.5 * mi, 0.5 * mf
    l1r, l1e, l1i, l1f = _cadd(mr, me, mi, mf, sr, se, si, sf)
    l2r, l2e, l2i, l2f = _csub(mr, me, mi, mf, sr, se, si, sf)
    return l1r, l1e, l1i, l1f, l2r, l2e, l2i, l2f


@njit(cache=True)
def _qr_eigvals(h, tol, maxiter):
    n = h.shape[0]
    out = np.empty((n, 4))
    cw = np.empty((n, 4))
    sw = np.empty((n, 4))
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            out[0, 0], out[0, 1] = h[0, 0, 0], h[0, 0, 1]
            out[0, 2], out[0, 3] = h[0, 0, 2], h[0, 0, 3]
            break
        lo = hi
        while lo > 0:
            sub = _abs_est(h[lo, lo - 1, 0], h[lo, lo - 1, 2])
            diag = (_abs_est(h[lo - 1, lo - 1, 0], h[lo - 1, lo - 1, 2])
                    + _abs_est(h[lo, lo, 0], h[lo, lo, 2]))
            if sub <= tol * diag + 1e-300:
                h[lo, lo - 1, 0] = h[lo, lo - 1, 1] = 0.0
                h[lo, lo - 1, 2] = h[lo, lo - 1, 3] = 0.0
                break
            lo -= 1
        if lo == hi:
            out[hi, 0], out[hi, 1] = h[hi, hi, 0], h[hi, hi, 1]
            out[hi, 2], out[hi, 3] = h[hi, hi, 2], h[hi, hi, 3]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            (l1r, l1e, l1i, l1f, l2r, l2e, l2i, l2f) = _two_by_two(
                h[lo, lo, 0], h[lo, lo, 1], h[lo, lo, 2], h[lo, lo, 3],
                h[lo, hi, 0], h[lo, hi, 1], h[lo, hi, 2], h[lo, hi, 3],
                h[hi, lo, 0], h[hi, lo, 1], h[hi, lo, 2], h[hi, lo, 3],
                h[hi, hi, 0], h[hi, hi, 1], h[hi, hi, 2], h[hi, hi, 3])
            out[hi, 0], out[hi, 1], out[hi, 2], out[hi, 3] = l1r, l1e, l1i, l1f
            out[hi - 1, 0], out[hi - 1, 1], out[hi - 1, 2], out[hi - 1, 3] = l2r, l2e, l2i, l2f
            hi -= 2
            its = 0
            continue
        its += 1
        if its > maxiter:
            return out, hi + 1
        if its % 14 == 0:
            # exceptional shift built from the trailing subdiagonals
            pert = (_abs_est(h[hi, hi - 1, 0], h[hi, hi - 1, 2])
                    + _abs_est(h[hi - 1, hi - 2, 0], h[hi - 1, hi - 2, 2]))
            shr, she = _add(h[hi, hi, 0], h[hi, hi, 1], 0.75 * pert, 0.0)
            shi, shf = h[hi, hi, 2], h[hi, hi, 3]
        else:
            (l1r, l1e, l1i, l1f, l2r, l2e, l2i, l2f) = _two_by_two(
                h[hi - 1, hi - 1, 0], h[hi - 1, hi - 1, 1], h[hi - 1, hi - 1, 2], h[hi - 1, hi - 1, 3],
                h[hi - 1, hi, 0], h[hi - 1, hi, 1], h[hi - 1, hi, 2], h[hi - 1, hi, 3],
                h[hi, hi - 1, 0], h[hi, hi - 1, 1], h[hi, hi - 1, 2], h[hi, hi - 1, 3],
                h[hi, hi, 0], h[hi, hi, 1], h[hi, hi, 2], h[hi, hi, 3])
            d1 = _abs_est(l1r - h[hi, hi, 0], l1i - h[hi, hi, 2])
            d2 = _abs_est(l2r - h[hi, hi, 0], l2i - h[hi, hi, 2])
            if d1 <= d2:
                shr, she, shi, shf = l1r, l1e, l1i, l1f
            else:
                shr, she, shi, shf = l2r, l2e, l2i, l2f
        for i in range(lo, hi + 1):
            h[i, i, 0], h[i, i, 1], h[i, i, 2], h[i, i, 3] = _csub(
                h[i, i, 0], h[i, i, 1], h[i, i, 2], h[i, i, 3], shr, she, shi, shf)
        # left Givens pass eliminating the subdiagonal of H - shift
        for i in range(lo, hi):
            ar, ae, ai, af = h[i, i, 0], h[i, i, 1], h[i, i, 2], h[i, i, 3]
            br, be, bi, bf = h[i + 1, i, 0], h[i + 1, i, 1], h[i + 1, i, 2], h[i + 1, i, 3]
            m2h, m2l = _cabs2(ar, ae, ai, af)
            n2h, n2l = _cabs2(br, be, bi, bf)
            r2h, r2l = _add(m2h, m2l, n2h, n2l)
            rh, rl = _sqrt_dd(r2h, r2l)
            if rh == 0.0:
                cw[i, 0], cw[i, 1], cw[i, 2], cw[i, 3] = 1.0, 0.0, 0.0, 0.0
                sw[i, 0], sw[i, 1], sw[i, 2], sw[i, 3] = 0.0, 0.0, 0.0, 0.0
                continue
            cr, ce, ci, cf = _cdiv_real(ar, ae, ai, af, rh, rl)
            gr, ge, gi, gf = _cdiv_real(br, be, bi, bf, rh, rl)
            cw[i, 0], cw[i, 1], cw[i, 2], cw[i, 3] = cr, ce, ci, cf
            sw[i, 0], sw[i, 1], sw[i, 2], sw[i, 3] = gr, ge, gi, gf
            for j in range(i, hi + 1):
                t1r, t1e, t1i, t1f = h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3]
                t2r, t2e, t2i, t2f = h[i + 1, j, 0], h[i + 1, j, 1], h[i + 1, j, 2], h[i + 1, j, 3]
                ur, ue, ui, uf = _cmul(cr, ce, -ci, -cf, t1r, t1e, t1i, t1f)
                vr, ve, vi, vf = _cmul(gr, ge, -gi, -gf, t2r, t2e, t2i, t2f)
                h[i, j, 0], h[i, j, 1], h[i, j, 2], h[i, j, 3] = _cadd(
                    ur, ue, ui, uf, vr, ve, vi, vf)
                ur, ue, ui, uf = _cmul(cr, ce, ci, cf, t2r, t2e, t2i, t2f)
                vr, ve, vi, vf = _cmul(gr, ge, gi, gf, t1r, t1e, t1i, t1f)
                h[i + 1, j, 0], h[i + 1, j, 1], h[i + 1, j, 2], h[i + 1, j, 3] = _csub(
                    ur, ue, ui, uf, vr, ve, vi, vf)
        # right pass H <- H G^H, refilling the subdiagonal
        for i in range(lo, hi):
            cr, ce, ci, cf = cw[i, 0], cw[i, 1], cw[i, 2], cw[i, 3]
            gr, ge, gi, gf = sw[i, 0], sw[i, 1], sw[i, 2], sw[i, 3]
            for r in range(lo, i + 2):
                t1r, t1e, t1i, t1f = h[r, i, 0], h[r, i, 1], h[r, i, 2], h[r, i, 3]
                t2r, t2e, t2i, t2f = h[r, i + 1, 0], h[r, i + 1, 1], h[r, i + 1, 2], h[r, i + 1, 3]
                ur, ue, ui, uf = _cmul(t1r, t1e, t1i, t1f, cr, ce, ci, cf)
                vr, ve, vi, vf = _cmul(t2r, t2e, t2i, t2f, gr, ge, gi, gf)
                h[r, i, 0], h[r, i, 1], h[r, i, 2], h[r, i, 3] = _cadd(
                    ur, ue, ui, uf, vr, ve, vi, vf)
                ur, ue, ui, uf = _cmul(t2r, t2e, t2i, t2f, cr, ce, -ci, -cf)
                vr, ve, vi, vf = _cmul(t1r, t1e, t1i, t1f, gr, ge, -gi, -gf)
                h[r, i + 1, 0], h[r, i + 1, 1], h[r, i + 1, 2], h[r, i + 1, 3] = _csub(
                    ur, ue, ui, uf, vr, ve, vi, vf)
        for i in range(lo, hi + 1):
            h[i, i, 0], h[i, i, 1], h[i, i, 2], h[i, i, 3] = _cadd(
                h[i, i, 0], h[i, i, 1], h[i, i, 2], h[i, i, 3], shr, she, shi, shf)
    return out, 0


@njit(cache=True)
def _eig_kernel(h, tol, maxiter):
    _hessenberg(h)
    return _qr_eigvals(h, tol, maxiter)


# --------------------------------------------------------------------------
# LU with partial pivoting and inverse-iteration refinement
#
# The QR eigenvalues above carry a forward error of order n^2 * 1e-31
# amplified by the eigenvalue condition number; for the largest ladders
# that can reach 1e-9.  One shifted LU solve plus a two-sided Rayleigh
# quotient (left = right eigenvector transposed, since H is complex
# symmetric) brings a tracked eigenvalue down to the arithmetic floor.
# --------------------------------------------------------------------------

@njit(cache=True)
def _lu_decompose(b, piv):
    n = b.shape[0]
    for k in range(n):
        p = k
        best = _abs_est(b[k, k, 0], b[k, k, 2])
        for i in range(k + 1, n):
            m = _abs_est(b[i, k, 0], b[i, k, 2])
            if m > best:
                best = m
                p = i
        piv[k] = p
        if p != k:
            for j in range(n):
                for c in range(4):
                    t = b[k, j, c]
                    b[k, j, c] = b[p, j, c]
                    b[p, j, c] = t
        if best == 0.0:
            return False
        dr, de, di, df = b[k, k, 0], b[k, k, 1], b[k, k, 2], b[k, k, 3]
        d2h, d2l = _cabs2(dr, de, di, df)
        for i in range(k + 1, n):
            # m = b[i,k] / b[k,k] = b[i,k] * conj(d) / |d|^2
            mr, me, mi, mf = _cmul(b[i, k, 0], b[i, k, 1], b[i, k, 2], b[i, k, 3],
                                   dr, de, -di, -df)
            mr, me = _div(mr, me, d2h, d2l)
            mi, mf = _div(mi, mf, d2h, d2l)
            b[i, k, 0], b[i, k, 1], b[i, k, 2], b[i, k, 3] = mr, me, mi, mf
            for j in range(k + 1, n):
                tr, te, ti, tf = _cmul(mr, me, mi, mf,
                                       b[k, j, 0], b[k, j, 1], b[k, j, 2], b[k, j, 3])
                b[i, j, 0], b[i, j, 1], b[i, j, 2], b[i, j, 3] = _csub(
                    b[i, j, 0], b[i, j, 1], b[i, j, 2], b[i, j, 3], tr, te, ti, tf)
    return True


@njit(cache=True)
def _lu_solve(b, piv, x):
    n = b.shape[0]
    # getrf storage: rows of L are fully swapped during factorization, so
    # the permutation must be applied to the rhs in full before substitution
    for k in range(n):
        p = piv[k]
        if p != k:
            for c in range(4):
                t = x[k, c]
                x[k, c] = x[p, c]
                x[p, c] = t
    for k in range(n):
        for i in range(k + 1, n):
            tr, te, ti, tf = _cmul(b[i, k, 0], b[i, k, 1], b[i, k, 2], b[i, k, 3],
                                   x[k, 0], x[k, 1], x[k, 2], x[k, 3])
            x[i, 0], x[i, 1], x[i, 2], x[i, 3] = _csub(
                x[i, 0], x[i, 1], x[i, 2], x[i, 3], tr, te, ti, tf)
    for k in range(n - 1, -1, -1):
        for j in range(k + 1, n):
            tr, te, ti, tf = _cmul(b[k, j, 0], b[k, j, 1], b[k, j, 2], b[k, j, 3],
                                   x[j, 0], x[j, 1], x[j, 2], x[j, 3])
            x[k, 0], x[k, 1], x[k, 2], x[k, 3] = _csub(
                x[k, 0], x[k, 1], x[k, 2], x[k, 3], tr, te, ti, tf)
        dr, de, di, df = b[k, k, 0], b[k, k, 1], b[k, k, 2], b[k, k, 3]
        d2h, d2l = _cabs2(dr, de, di, df)
        nr, ne, ni, nf = _cmul(x[k, 0], x[k, 1], x[k, 2], x[k, 3], dr, de, -di, -df)
        x[k, 0], x[k, 1] = _div(nr, ne, d2h, d2l)
        x[k, 2], x[k, 3] = _div(ni, nf, d2h, d2l)


@njit(cache=True)
def _resolvent_step(a, sr, se, si, sf):
    # one Newton step for the resolvent pole nearest sigma:
    # mu(sigma) = u.(A - sigma)^-1 w has a simple pole at each eigenvalue,
    # so sigma + mu/mu' lands on the nearest pole with quadratic error.
    # u, w fixed c-random probes; no cancellation-prone Rayleigh quotient.
    n = a.shape[0]
    b = a.copy()
    for i in range(n):
        b[i, i, 0], b[i, i, 1], b[i, i, 2], b[i, i, 3] = _csub(
            b[i, i, 0], b[i, i, 1], b[i, i, 2], b[i, i, 3], sr, se, si, sf)
    piv = np.empty(n, np.int64)
    ok = _lu_decompose(b, piv)
    if not ok:
        return sr, se, si, sf, False
    u = np.zeros((n, 4))
    y = np.zeros((n, 4))
    for i in range(n):
        u[i, 0] = np.sin(2.3 + 1.3 * i)
        u[i, 2] = np.cos(0.9 + 0.4 * i)
        y[i, 0] = np.cos(1.1 + 0.8 * i)
        y[i, 2] = np.sin(0.5 + 1.7 * i)
    _lu_solve(b, piv, y)
    m1r, m1e, m1i, m1f = 0.0, 0.0, 0.0, 0.0
    for i in range(n):
        tr, te, ti, tf = _cmul(u[i, 0], u[i, 1], u[i, 2], u[i, 3],
                               y[i, 0], y[i, 1], y[i, 2], y[i, 3])
        m1r, m1e, m1i, m1f = _cadd(m1r, m1e, m1i, m1f, tr, te, ti, tf)
    _lu_solve(b, piv, y)
    m2r, m2e, m2i, m2f = 0.0, 0.0, 0.0, 0.0
    for i in range(n):
        tr, te, ti, tf = _cmul(u[i, 0], u[i, 1], u[i, 2], u[i, 3],
                               y[i, 0], y[i, 1], y[i, 2], y[i, 3])
        m2r, m2e, m2i, m2f = _cadd(m2r, m2e, m2i, m2f, tr, te, ti, tf)
    d2h, d2l = _cabs2(m2r, m2e, m2i, m2f)
    if d2h == 0.0:
        return sr, se, si, sf, False
    pr, pe, pi, pf = _cmul(m1r, m1e, m1i, m1f, m2r, m2e, -m2i, -m2f)
    dr, de = _div(pr, pe, d2h, d2l)
    di, df = _div(pi, pf, d2h, d2l)
    rr, re_ = _add(sr, se, dr, de)
    ri, rf = _add(si, sf, di, df)
    return rr, re_, ri, rf, True


# --------------------------------------------------------------------------
# conversion and drivers
# --------------------------------------------------------------------------

def to_components(entries):
    """Split a matrix into an (n, n, 4) float64 double-double component array.

    Accepts a numpy array (lo parts zero) or an mpmath matrix, whose entries
    are split exactly into hi + lo pairs; precision beyond the ~31 digits a
    double-double can hold is rounded.
    """
    if isinstance(entries, np.ndarray):
        a = np.ascontiguousarray(entries, dtype=complex)
        n = a.shape[0]
        comp = np.zeros((n, n, 4))
        comp[:, :, 0] = a.real
        comp[:, :, 2] = a.imag
        return comp
    n = entries.rows
    comp = np.zeros((n, n, 4))
    zero = mpmath.mpf(0)
    for i in range(n):
        for j in range(n):
            z = entries[i, j]
            re = z.real if isinstance(z, mpmath.mpc) else mpmath.mpf(z)
            im = z.imag if isinstance(z, mpmath.mpc) else zero
            rh = float(re)
            ih = float(im)
            comp[i, j, 0] = rh
            comp[i, j, 1] = float(re - rh)
            comp[i, j, 2] = ih
            comp[i, j, 3] = float(im - ih)
    return comp


def eigvals_dd(entries, tol=2.0 ** -100, maxiter=80):
    """Eigenvalues of a dense complex matrix in double-double precision.

    Returns a complex128 array in no particular order.  The internal result
    is accurate to roughly kappa * ||H|| * 1e-31, so for the matrices this
    package builds the leading doubles returned here are correct in every
    bit double can hold.
    """
    out = eigvals_dd_pairs(entries, tol=tol, maxiter=maxiter)
    return (out[:, 0] + out[:, 1]) + 1j * (out[:, 2] + out[:, 3])


def eigvals_dd_pairs(entries, tol=2.0 ** -100, maxiter=80):
    """Like eigvals_dd but returns the raw (n, 4) hi/lo component array."""
    comp = to_components(entries)
    n = comp.shape[0]
    if n == 0:
        return np.empty((0, 4))
    if n == 1:
        return comp[0, 0, :].reshape(1, 4).copy()
    out, fail = _eig_kernel(comp, float(tol), int(maxiter))
    if fail:
        raise ConvergenceError("QR failed to deflate %d eigenvalue(s)" % fail)
    return out


def refine_eigenvalue(components, sigma, steps=2, cap=0.1):
    """Polish one eigenvalue estimate by resolvent Newton steps.

    components is the (n, n, 4) array from to_components (reusable across
    calls), sigma an estimate good to a few digits.  Each step does one
    shifted LU and two solves; the error is squared per step down to the
    arithmetic floor.  A step moving farther than cap is rejected (the
    estimate was not inside the pole's basin) and sigma is returned.
    """
    sr = float(complex(sigma).real)
    si = float(complex(sigma).imag)
    se = sf = 0.0
    for _ in range(int(steps)):
        rr, re_, ri, rf, ok = _resolvent_step(components, sr, se, si, sf)
        if not ok or abs(complex(rr - sr, ri - si)) > cap:
            return complex(sr + se, si + sf)
        sr, se, si, sf = rr, re_, ri, rf
    return complex(sr + se, si + sf)


def _split4(z):
    rh = float(z.real)
    ih = float(z.imag)
    return rh, float(z.real - rh), ih, float(z.imag - ih)


def _ir_solve(bcomp, piv, rows, sigma, rhs, passes):
    # y ~= (rows - sigma)^-1 rhs; the double-double factorization is only
    # a preconditioner, residuals are computed at working mp precision, so
    # the limit point is the solution for the mp matrix.  Converges while
    # kappa(B) * n * u_dd < 1, which the caller ensures by not placing sigma
    # closer to a pole than its backoff.
    n = bcomp.shape[0]
    y = [mpmath.mpc(0)] * n
    r = list(rhs)
    best = None
    prev = mpmath.inf
    for _ in range(int(passes)):
        x = np.zeros((n, 4))
        for i in range(n):
            x[i] = _split4(r[i])
        _lu_solve(bcomp, piv, x)
        cand = [y[i] + mpmath.mpc(x[i, 0], x[i, 2]) + mpmath.mpc(x[i, 1], x[i, 3])
                for i in range(n)]
        r = [rhs[i] - mpmath.fsum(row[j] * cand[j] for j in range(n))
             + sigma * cand[i] for i, row in enumerate(rows)]
        rn = max(abs(v) for v in r)
        if rn >= prev:
            return y if best is not None else cand
        best, prev, y = cand, rn, cand
    return y


def _newton_landing(components, rows, shifted, off, passes):
    """One resolvent Newton step evaluated at the (backed-off) shift."""
    n = components.shape[0]
    bcomp = components.copy()
    for i in range(n):
        bcomp[i, i] = _split4(rows[i][i] - shifted)
    piv = np.empty(n, np.int64)
    if not _lu_decompose(bcomp, piv):
        return None
    u = [mpmath.mpc(np.sin(2.3 + 1.3 * i), np.cos(0.9 + 0.4 * i))
         for i in range(n)]
    w = [mpmath.mpc(np.cos(1.1 + 0.8 * i), np.sin(0.5 + 1.7 * i))
         for i in range(n)]
    y = _ir_solve(bcomp, piv, rows, shifted, w, passes)
    z = _ir_solve(bcomp, piv, rows, shifted, y, passes)
    mu1 = mpmath.fsum(u[i] * y[i] for i in range(n))
    mu2 = mpmath.fsum(u[i] * z[i] for i in range(n))
    if mu2 == 0:
        return None
    move = mu1 / mu2
    if abs(move) > 50.0 * off:
        return None
    return shifted + move


def refine_eigenvalue_mixed(components, entries, sigma, dps=60, backoff=1e-7,
                            passes=3, attempts=4):
    """Polish one eigenvalue past the double-double floor.

    A resolvent Newton step evaluated at sigma +/- backoff.  The shifted
    matrix is factorized in double-double, but iterative refinement against
    the mp-precision entries makes the two solves accurate for the mp matrix
    itself, so the step lands on its eigenvalue: neither entry rounding nor
    the O(n u_dd kappa ||H||) factorization noise is a floor any more.

    The refinement only contracts while n u_dd ||H|| / (off * s) < 1, where
    s is the eigenvector self-orthogonality |v^T v| / ||v||^2; broad states
    can push s to ~1e-20, stalling the solves at small backoff.  Each pass
    therefore evaluates the step from both sides of sigma and accepts only
    when the two landings agree, escalating the backoff tenfold otherwise.

    A single step from distance off lands with a quadratic bias K off^2
    whose sign is the same from both sides, so the two-sided difference
    cannot see it and the mean keeps it.  A second two-sided pass from the
    improved center at off/2 stays inside the proven contraction region and
    quarters the bias, and extrapolating the two centers removes K exactly,
    leaving O(off^3).  If the second pass fails its agreement gate the
    first center is returned unchanged.

    components: (n, n, 4) array from to_components.
    entries: the same matrix as an mpmath matrix, or a sequence of row
    sequences of mpc values.
    Returns a complex, or sigma unchanged if no attempt is trustworthy.
    """
    with mpmath.workdps(dps):
        n = components.shape[0]
        if isinstance(entries, (list, tuple)):
            rows = entries
        else:
            # one flat copy rounded to working precision; element access on
            # an mpmath matrix inside the residual loops dominates otherwise
            rows = [[+entries[i, j] for j in range(n)] for i in range(n)]
        target = mpmath.mpc(complex(sigma))
        for attempt in range(attempts):
            off = backoff * 10.0 ** attempt
            s1 = _newton_landing(components, rows, target + off, off, passes)
            s2 = _newton_landing(components, rows, target - off, off, passes)
            if s1 is None or s2 is None:
                continue
            if abs(s1 - s2) <= 0.01 * off:
                c1 = (s1 + s2) / 2
                half = 0.5 * off
                s3 = _newton_landing(components, rows, c1 + half, half, passes)
                s4 = _newton_landing(components, rows, c1 - half, half, passes)
                if s3 is None or s4 is None:
                    return complex(c1)
                if abs(s3 - s4) > 0.01 * half:
                    return complex(c1)
                c2 = (s3 + s4) / 2
                return complex(c2 + (c2 - c1) / 3)
        return complex(sigma)