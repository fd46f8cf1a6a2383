"""Singular values of bidiagonal matrices to high relative accuracy.

The lower (k+1) x k bidiagonal produced by Golub-Kahan is first rotated
to a k x k upper bidiagonal with Givens rotations, then diagonalized by
implicit QR sweeps. Sweeps use the zero shift of Demmel and Kahan
whenever a standard shift would spoil relative accuracy, and the mu
recurrence decides when an off-diagonal entry is negligible. The
structure follows LAPACK ``dbdsqr`` (values only, top-to-bottom chasing).
"""

import math

import numpy as np

from .errors import NumericalError

_EPS = np.finfo(float).eps
_UNFL = np.finfo(float).tiny
_TOL = max(10.0, min(100.0, _EPS ** -0.125)) * _EPS


def rotg(f, g):
    """Plane rotation with ``[c s; -s c] [f; g] = [r; 0]``."""
    if g == 0.0:
        return 1.0, 0.0, f
    if f == 0.0:
        return 0.0, 1.0, g
    r = math.hypot(f, g)
    return f / r, g / r, r


def lower_to_upper(alphas, betas):
    """QR of the lower bidiagonal with diagonal ``alphas`` (length k) and
    subdiagonal ``betas[1:k+1]``.

    Returns the diagonal ``d`` (k), superdiagonal ``e`` (k-1) of the upper
    bidiagonal factor and the rotation pairs ``(c_j, s_j)``.
    """
    k = len(alphas)
    d = np.empty(k)
    e = np.empty(max(k - 1, 0))
    cs = np.empty(k)
    sn = np.empty(k)
    rbar = float(alphas[0])
    for j in range(k):
        c, s, r = rotg(rbar, float(betas[j + 1]))
        d[j] = r
        cs[j], sn[j] = c, s
        if j + 1 < k:
            e[j] = s * alphas[j + 1]
            rbar = c * alphas[j + 1]
    return d, e, cs, sn


def _las2(f, g, h):
    """Smallest and largest singular values of [[f, g], [0, h]] (dlas2)."""
    fa, ga, ha = abs(f), abs(g), abs(h)
    fhmn, fhmx = min(fa, ha), max(fa, ha)
    if fhmn == 0.0:
        if fhmx == 0.0:
            return 0.0, ga
        mx, mn = max(fhmx, ga), min(fhmx, ga)
        return 0.0, mx * math.sqrt(1.0 + (mn / mx) ** 2)
    if ga < fhmx:
        as_ = 1.0 + fhmn / fhmx
        at = (fhmx - fhmn) / fhmx
        au = (ga / fhmx) ** 2
        c = 2.0 / (math.sqrt(as_ * as_ + au) + math.sqrt(at * at + au))
        return fhmn * c, fhmx / c
    au = fhmx / ga
    if au == 0.0:
        return (fhmn * fhmx) / ga, ga
    as_ = 1.0 + fhmn / fhmx
    at = (fhmx - fhmn) / fhmx
    c = 1.0 / (math.sqrt(1.0 + (as_ * au) ** 2) + math.sqrt(1.0 + (at * au) ** 2))
    ssmin = (fhmn * c) * au
    ssmin += ssmin
    return ssmin, ga / (c + c)


def _zero_shift_sweep(d, e, lo, hi):
    cs, oldcs, oldsn = 1.0, 1.0, 0.0
    for i in range(lo, hi):
        cs, sn, r = rotg(d[i] * cs, e[i])
        if i > lo:
            e[i - 1] = oldsn * r
        oldcs, oldsn, d[i] = rotg(oldcs * r, d[i + 1] * sn)
    h = d[hi] * cs
    d[hi] = h * oldcs
    e[hi - 1] = h * oldsn


def _shifted_sweep(d, e, lo, hi, shift):
    f = (abs(d[lo]) - shift) * (math.copysign(1.0, d[lo]) + shift / d[lo])
    g = e[lo]
    for i in range(lo, hi):
        cosr, sinr, r = rotg(f, g)
        if i > lo:
            e[i - 1] = r
        f = cosr * d[i] + sinr * e[i]
        e[i] = cosr * e[i] - sinr * d[i]
        g = sinr * d[i + 1]
        d[i + 1] = cosr * d[i + 1]
        cosl, sinl, r = rotg(f, g)
        d[i] = r
        f = cosl * e[i] + sinl * d[i + 1]
        d[i + 1] = cosl * d[i + 1] - sinl * e[i]
        if i < hi - 1:
            g = sinl * e[i + 1]
            e[i + 1] = cosl * e[i + 1]
    e[hi - 1] = f


def upper_bidiag_svdvals(d, e):
    """Singular values (descending) of the upper bidiagonal ``(d, e)``."""
    d = np.array(d, dtype=float)
    e = np.array(e, dtype=float)
    n = d.shape[0]
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
        raise NumericalError("bidiagonal has non-finite entries", "non-finite")
    if n == 0:
        return d
    if n == 1:
        return np.abs(d)
    if np.any(d == 0.0):
        # exact zero pivots never arise from Golub-Kahan data with positive
        # coefficients; hand them to LAPACK rather than deflating here
        B = np.diag(d) + np.diag(e, 1)
        return np.linalg.svd(B, compute_uv=False)

    # smallest singular value estimate and absolute threshold
    mu = abs(d[0])
    sminoa = mu
    for i in range(1, n):
        mu = abs(d[i]) * (mu / (mu + abs(e[i - 1])))
        sminoa = min(sminoa, mu)
        if sminoa == 0.0:
            break
    sminoa /= math.sqrt(n)
    maxit = 6 * n * n
    thresh = max(_TOL * sminoa, maxit * _UNFL)

    hi = n - 1
    it = 0
    while hi > 0:
        if it > maxit:
            raise NumericalError("bidiagonal QR failed to converge", "no-convergence")
        # locate the unreduced block [lo, hi]
        if abs(e[hi - 1]) <= thresh:
            e[hi - 1] = 0.0
            hi -= 1
            continue
        lo = hi - 1
        smax = max(abs(d[hi]), abs(e[hi - 1]))
        while lo > 0:
            if abs(e[lo - 1]) <= thresh:
                e[lo - 1] = 0.0
                break
            smax = max(smax, abs(d[lo]), abs(e[lo - 1]))
            lo -= 1
        smax = max(smax, abs(d[lo]))

        if hi == lo + 1:
            # 2 x 2 block: closed form
            smin, smx = _las2(d[lo], e[lo], d[hi])
            d[lo], d[hi], e[lo] = smx, smin, 0.0
            hi -= 1
            continue

        # relative convergence tests, forward direction
        if abs(e[hi - 1]) <= _TOL * abs(d[hi]):
            e[hi - 1] = 0.0
            continue
        mu = abs(d[lo])
        sminl = mu
        split = False
        for j in range(lo, hi):
            if abs(e[j]) <= _TOL * mu:
                e[j] = 0.0
                split = True
                break
            mu = abs(d[j + 1]) * (mu / (mu + abs(e[j])))
            sminl = min(sminl, mu)
        if split:
            continue

        # shift from the trailing 2 x 2, dropped when it endangers relative accuracy
        if (hi - lo + 1) * _TOL * (sminl / smax) <= max(_EPS, 0.01 * _TOL):
            shift = 0.0
        else:
            shift, _ = _las2(d[hi - 1], e[hi - 1], d[hi])
            if abs(d[lo]) > 0 and (shift / abs(d[lo])) ** 2 < _EPS:
                shift = 0.0

        it += hi - lo
        if shift == 0.0:
            _zero_shift_sweep(d, e, lo, hi)
        else:
            _shifted_sweep(d, e, lo, hi, shift)
        if abs(e[hi - 1]) <= thresh:
            e[hi - 1] = 0.0

    return np.sort(np.abs(d))[::-1]


def lower_bidiag_svdvals(alphas, betas):
    """Singular values of the (k+1) x k lower bidiagonal with diagonal
    ``alphas[:k]`` and subdiagonal ``betas[1:k+1]``."""
    d, e, _, _ = lower_to_upper(alphas, betas)
    return upper_bidiag_svdvals(d, e)
