"""Wigner d-functions at colatitude pi/2.

The harmonic transforms factor rotations through the equator, so they only
ever need d^l(pi/2).  These are built by a half-integer-step recursion over
degree that composes each matrix with a spin-1/2 block using Clebsch-Gordan
coefficients; every step is a convex-normalised combination, so the values
stay bounded and no renormalisation is required at any band-limit.

`wigner_d_exact` provides an independent route (matrix exponential of the
angular-momentum generator) used as the test oracle and for the dense
rotation-group transform matrices.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

__all__ = ["delta_half", "delta_full", "wigner_d_exact"]

_SQRT_HALF = np.sqrt(0.5)

# Per-L cache of Delta[l, mp, m] for mp >= 0 only; the mp < 0 half follows
# from Delta^l_{-mp, m} = (-1)^{l+m} Delta^l_{mp, m}.
_DELTA_CACHE: dict[int, np.ndarray] = {}


def _half_step(prev: np.ndarray, cos_hb: float, sin_hb: float) -> np.ndarray:
    """Raise the representation degree by 1/2.

    `prev` is the (j, j) matrix d^{(j-1)/2}; returns the (j+1, j+1) matrix
    d^{j/2}, both indexed with row/column 0 at m = -spin.
    """
    j = prev.shape[0]
    sq = np.sqrt(np.arange(j + 1))
    sqr = sq[::-1]  # sqrt(j - i)
    out = np.zeros((j + 1, j + 1))
    out[1:, 1:] = np.outer(sq[1:], sq[1:]) * (cos_hb * prev)
    out[1:, :-1] -= np.outer(sq[1:], sqr[:-1]) * (sin_hb * prev)
    out[:-1, 1:] += np.outer(sqr[:-1], sq[1:]) * (sin_hb * prev)
    out[:-1, :-1] += np.outer(sqr[:-1], sqr[:-1]) * (cos_hb * prev)
    out /= j
    return out


def delta_full(L: int) -> list[np.ndarray]:
    """d^l(pi/2) for l = 0 .. L-1 as full (2l+1, 2l+1) matrices.

    Entry [i, k] is d^l_{m' m} with m' = i - l, m = k - l.
    """
    mats = []
    d = np.ones((1, 1))
    mats.append(d.copy())
    for ell in range(1, L):
        d = _half_step(d, _SQRT_HALF, _SQRT_HALF)
        d = _half_step(d, _SQRT_HALF, _SQRT_HALF)
        mats.append(d.copy())
    return mats


def delta_half(L: int) -> np.ndarray:
    """Padded stack Delta[l, mp, m] for mp = 0 .. L-1, m = -(L-1) .. L-1.

    Zero outside |m| <= l and mp <= l.  The negative-mp half is recovered
    through Delta^l_{-mp, m} = (-1)^{l+m} Delta^l_{mp, m}.
    """
    stack = _DELTA_CACHE.get(L)
    if stack is None:
        stack = np.zeros((L, L, 2 * L - 1))
        for ell, d in enumerate(delta_full(L)):
            stack[ell, : ell + 1, L - 1 - ell : L + ell] = d[ell:, :]
        stack.setflags(write=False)
        _DELTA_CACHE[L] = stack
    return stack


def wigner_d_exact(ell: int, beta: float) -> np.ndarray:
    """d^l(beta) via expm(-i beta J_y); rows/columns run m = -l .. l.

    Independent of the recursion above; intended as oracle and for building
    dense transform matrices at small band-limits.
    """
    m = np.arange(-ell, ell + 1)
    jp = np.zeros((2 * ell + 1, 2 * ell + 1))
    for k in range(2 * ell):  # J+ |l m> = sqrt(l(l+1) - m(m+1)) |l m+1>
        jp[k + 1, k] = np.sqrt(ell * (ell + 1) - m[k] * (m[k] + 1))
    jy = (jp - jp.T) / 2j
    d = expm(-1j * beta * jy)
    return np.real(d)
