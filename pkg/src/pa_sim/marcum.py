"""First-order Marcum Q-function.

Series in exponentially scaled Bessel functions:

    a < b:   Q1(a, b) = exp(-(a-b)^2/2) * sum_{k>=0} (a/b)^k  Ive_k(ab)
    a >= b:  Q1(a, b) = 1 - exp(-(a-b)^2/2) * sum_{k>=1} (b/a)^k  Ive_k(ab)

The Bessel terms come from Miller's backward recurrence
I_{k-1} = I_{k+1} + (2k/x) I_k, normalized with Ive_0, and the series is
summed in the same sweep with a Horner scheme.
"""

from __future__ import annotations

import numpy as np
from scipy import special

_TOL = 1e-16
_MAX_TERMS = 20000
_MILLER_MARGIN = 30
_RESCALE = 1e200


def _n_terms(r, x):
    logtol = -np.log(_TOL)
    with np.errstate(divide="ignore"):
        # ratio bound r^k
        geo = np.where(r < 1.0, logtol / -np.log(np.maximum(r, 1e-300)), np.inf)
        # I_k/I_0 <~ exp(-k^2 / 2x) for k < x; (x/2)^k / k! for small x
        gauss = 1.1 * np.sqrt(2.0 * logtol * x) + 10.0
    return np.minimum(np.minimum(geo, gauss), _MAX_TERMS).astype(int)


def _series(r, x, start):
    """sum_{k>=start} r^k Ive_k(x) for arrays r, x (x > 0)."""
    out = np.zeros_like(x)
    if x.size == 0:
        return out
    tiny = x < 1e-3
    if tiny.any():
        # few terms matter; the recurrence would overflow through 2/x
        k = np.arange(start, 20, dtype=float)[:, None]
        out[tiny] = np.sum(r[tiny] ** k * special.ive(k, x[tiny]), axis=0)
    big = np.flatnonzero(~tiny)
    if big.size:
        out[big] = _bucketed(r[big], x[big], start)
    return out


def _bucketed(r, x, start):
    out = np.zeros_like(x)
    terms = _n_terms(r, x)
    bucket = np.ceil(np.log2(np.maximum(terms, 2))).astype(int)
    for b in np.unique(bucket):
        idx = np.flatnonzero(bucket == b)
        out[idx] = _miller_sum(r[idx], x[idx], start, 2**b)
    return out


def _miller_sum(r, x, start, k_max):
    top = k_max + _MILLER_MARGIN
    i_next = np.zeros_like(x)  # I_{k+1}
    i_cur = np.full_like(x, 1e-30)  # I_k, arbitrary scale
    horner = np.zeros_like(x)
    two_over_x = 2.0 / x
    for k in range(top, 0, -1):
        if start <= k <= k_max:
            horner = i_cur + r * horner
        i_prev = i_next + k * two_over_x * i_cur
        i_next, i_cur = i_cur, i_prev
        big = i_cur > _RESCALE
        if big.any():
            s = np.where(big, 1.0 / _RESCALE, 1.0)
            i_cur *= s
            i_next *= s
            horner *= s
    # i_cur now holds I_0 on the arbitrary scale
    if start == 0:
        horner = i_cur + r * horner
        scale = special.i0e(x) / i_cur
        return scale * horner
    scale = special.i0e(x) / i_cur
    return scale * r * horner


def marcum_q1(a, b):
    """Q1(a, b) = P(|X| > b) for X ~ N2((a, 0), I); broadcasts over inputs."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("marcum_q1 requires a, b >= 0")
    out = np.empty(a.shape, dtype=float)
    af, bf, of = a.ravel(), b.ravel(), out.ravel()

    zero_b = bf == 0.0
    zero_a = (af == 0.0) & ~zero_b
    of[zero_b] = 1.0
    of[zero_a] = np.exp(-0.5 * bf[zero_a] ** 2)

    rest = ~(zero_a | zero_b)
    lower = rest & (af < bf)
    upper = rest & (af >= bf)

    with np.errstate(under="ignore"):
        if lower.any():
            al, bl = af[lower], bf[lower]
            s = _series(al / bl, al * bl, 0)
            of[lower] = np.exp(-0.5 * (al - bl) ** 2) * s
        if upper.any():
            au, bu = af[upper], bf[upper]
            s = _series(bu / au, au * bu, 1)
            of[upper] = 1.0 - np.exp(-0.5 * (au - bu) ** 2) * s

    np.clip(of, 0.0, 1.0, out=of)
    return out.reshape(a.shape)[()]
