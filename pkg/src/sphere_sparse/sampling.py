"""Sample grids and index conventions for the sphere and the rotation group.

The sphere is sampled on an equiangular grid of L rings by 2L-1 longitudes,

    theta_t = (2t + 1) pi / (2L - 1),   t = 0 .. L-1,
    phi_p   = 2 pi p / (2L - 1),        p = 0 .. 2L-2,

so theta lies strictly in (0, pi] and the last ring sits at the south pole.
The rotation group uses zyz Euler angles (alpha, beta, gamma) with alpha on
the phi grid, beta on the theta grid and gamma on a 2N-1 point azimuthal
grid, giving (2L-1) * L * (2N-1) samples.

Harmonic coefficients are stored flat with index i = l^2 + l + m; Wigner
coefficients are stored scale-major (l, then m, then n) with the n range
truncated per l to |n| <= min(N-1, l).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "thetas",
    "phis",
    "alphas",
    "betas",
    "gammas",
    "n_sphere_samples",
    "n_so3_samples",
    "n_wigner_coeffs",
    "flm_index",
    "flm_size",
    "quadrature_weight",
    "quadrature_weights",
    "weight_matrix",
    "HarmonicCoeffs",
    "SphericalMap",
    "WignerCoeffs",
    "RotationMap",
]


def thetas(L: int) -> np.ndarray:
    """Colatitudes of the L sample rings, in (0, pi]."""
    t = np.arange(L)
    return (2 * t + 1) * np.pi / (2 * L - 1)


def phis(L: int) -> np.ndarray:
    """Longitudes of the 2L-1 samples per ring, in [0, 2 pi)."""
    p = np.arange(2 * L - 1)
    return 2 * np.pi * p / (2 * L - 1)


def alphas(L: int) -> np.ndarray:
    """First Euler angle grid on the rotation group (same as phis)."""
    return phis(L)


def betas(L: int) -> np.ndarray:
    """Second Euler angle grid on the rotation group (same as thetas)."""
    return thetas(L)


def gammas(N: int) -> np.ndarray:
    """Third Euler angle grid, 2N-1 equispaced points in [0, 2 pi)."""
    g = np.arange(2 * N - 1)
    return 2 * np.pi * g / (2 * N - 1)


def n_sphere_samples(L: int) -> int:
    return L * (2 * L - 1)


def n_so3_samples(L: int, N: int) -> int:
    return (2 * L - 1) * L * (2 * N - 1)


def n_max(L: int, N: int, ell: int) -> int:
    """Largest |n| stored for degree ell at directional band-limit N."""
    return min(N - 1, ell)


def n_wigner_coeffs(L: int, N: int) -> int:
    """Flat length of a Wigner coefficient vector at band-limits (L, N)."""
    return sum((2 * ell + 1) * (2 * n_max(L, N, ell) + 1) for ell in range(L))


def flm_index(ell: int, m: int) -> int:
    return ell * ell + ell + m


def flm_size(L: int) -> int:
    return L * L


def _check_band_limits(L: int, N: int | None = None) -> None:
    if L < 1:
        raise ValueError(f"band-limit L must be >= 1, got {L}")
    if N is not None and not (1 <= N <= L):
        raise ValueError(f"directional band-limit N must satisfy 1 <= N <= L, got N={N}, L={L}")


# ---------------------------------------------------------------------------
# Quadrature weights
# ---------------------------------------------------------------------------


def quadrature_weight(m: int) -> complex:
    """Fourier weight w(m) = int_0^pi e^{i m theta} sin(theta) dtheta.

    Evaluates to 2 at m=0, -2/(m^2-1) for even m, +-i pi/2 at m = +-1 and
    zero for odd |m| >= 3.
    """
    if m % 2 == 0:
        return complex(-2.0 / (m * m - 1)) if m != 0 else complex(2.0)
    if m == 1:
        return 1j * np.pi / 2
    if m == -1:
        return -1j * np.pi / 2
    return complex(0.0)


def quadrature_weights(mmax: int) -> np.ndarray:
    """w(m) for m = -mmax .. mmax as a complex vector of length 2*mmax+1."""
    return np.array([quadrature_weight(m) for m in range(-mmax, mmax + 1)])


_WEIGHT_MATRIX_CACHE: dict[int, np.ndarray] = {}


def weight_matrix(L: int) -> np.ndarray:
    """Matrix W[k, k'] = w(k' - k) over frequencies k, k' in [-(L-1), L-1].

    This is the convolution kernel that turns sampled theta-Fourier
    coefficients into exact integrals against sin(theta); it appears in the
    forward transforms and (transposed) in the adjoints of the inverses.
    """
    W = _WEIGHT_MATRIX_CACHE.get(L)
    if W is None:
        k = np.arange(-(L - 1), L)
        W = np.array([[quadrature_weight(k2 - k1) for k2 in k] for k1 in k])
        W.setflags(write=False)
        _WEIGHT_MATRIX_CACHE[L] = W
    return W


# ---------------------------------------------------------------------------
# Data containers
# ---------------------------------------------------------------------------


@dataclass
class HarmonicCoeffs:
    """Spherical harmonic coefficients, flat layout i = l^2 + l + m."""

    L: int
    values: np.ndarray
    real: bool = False

    def __post_init__(self) -> None:
        _check_band_limits(self.L)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (flm_size(self.L),):
            raise ValueError(
                f"expected {flm_size(self.L)} coefficients for L={self.L}, "
                f"got shape {self.values.shape}"
            )

    @classmethod
    def zeros(cls, L: int, real: bool = False) -> "HarmonicCoeffs":
        return cls(L, np.zeros(flm_size(L), dtype=complex), real=real)

    def to_matrix(self) -> np.ndarray:
        """Padded (L, 2L-1) matrix with m at column offset L-1."""
        L = self.L
        mat = np.zeros((L, 2 * L - 1), dtype=complex)
        for ell in range(L):
            mat[ell, L - 1 - ell : L + ell] = self.values[ell * ell : (ell + 1) * (ell + 1)]
        return mat

    @classmethod
    def from_matrix(cls, mat: np.ndarray, real: bool = False) -> "HarmonicCoeffs":
        L = mat.shape[0]
        vals = np.concatenate(
            [mat[ell, L - 1 - ell : L + ell] for ell in range(L)]
        )
        return cls(L, vals, real=real)

    def truncated(self, L_new: int) -> "HarmonicCoeffs":
        """Restrict to degrees l < L_new (L_new <= L)."""
        if L_new > self.L:
            raise ValueError("cannot truncate to a larger band-limit")
        return HarmonicCoeffs(L_new, self.values[: flm_size(L_new)].copy(), real=self.real)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass
class SphericalMap:
    """Samples on the sphere grid, stored (theta ring, phi) row-major."""

    L: int
    values: np.ndarray
    real: bool = False

    def __post_init__(self) -> None:
        _check_band_limits(self.L)
        self.values = np.asarray(self.values, dtype=complex)
        expected = (self.L, 2 * self.L - 1)
        if self.values.shape == (n_sphere_samples(self.L),):
            self.values = self.values.reshape(expected)
        if self.values.shape != expected:
            raise ValueError(
                f"expected sphere samples of shape {expected} for L={self.L}, "
                f"got {self.values.shape}"
            )

    @classmethod
    def zeros(cls, L: int, real: bool = False) -> "SphericalMap":
        return cls(L, np.zeros((L, 2 * L - 1), dtype=complex), real=real)

    def vector(self) -> np.ndarray:
        return self.values.ravel()

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass
class WignerCoeffs:
    """Wigner coefficients at band-limits (L, N), flat scale-major layout."""

    L: int
    N: int
    values: np.ndarray
    real: bool = False

    def __post_init__(self) -> None:
        _check_band_limits(self.L, self.N)
        self.values = np.asarray(self.values, dtype=complex)
        expected = n_wigner_coeffs(self.L, self.N)
        if self.values.shape != (expected,):
            raise ValueError(
                f"expected {expected} Wigner coefficients for (L, N)=({self.L}, {self.N}), "
                f"got shape {self.values.shape}"
            )

    @classmethod
    def zeros(cls, L: int, N: int) -> "WignerCoeffs":
        return cls(L, N, np.zeros(n_wigner_coeffs(L, N), dtype=complex))

    def to_array(self) -> np.ndarray:
        """Padded (L, 2L-1, 2N-1) array, m at offset L-1 and n at offset N-1."""
        L, N = self.L, self.N
        arr = np.zeros((L, 2 * L - 1, 2 * N - 1), dtype=complex)
        pos = 0
        for ell in range(L):
            nm = n_max(L, N, ell)
            block = (2 * ell + 1) * (2 * nm + 1)
            arr[ell, L - 1 - ell : L + ell, N - 1 - nm : N + nm] = self.values[
                pos : pos + block
            ].reshape(2 * ell + 1, 2 * nm + 1)
            pos += block
        return arr

    @classmethod
    def from_array(cls, arr: np.ndarray, N: int) -> "WignerCoeffs":
        L = arr.shape[0]
        chunks = []
        for ell in range(L):
            nm = n_max(L, N, ell)
            chunks.append(
                arr[ell, L - 1 - ell : L + ell, N - 1 - nm : N + nm].ravel()
            )
        return cls(L, N, np.concatenate(chunks))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


@dataclass
class RotationMap:
    """Samples on the rotation group grid, stored (alpha, beta, gamma)."""

    L: int
    N: int
    values: np.ndarray

    def __post_init__(self) -> None:
        _check_band_limits(self.L, self.N)
        self.values = np.asarray(self.values, dtype=complex)
        expected = (2 * self.L - 1, self.L, 2 * self.N - 1)
        if self.values.shape == (n_so3_samples(self.L, self.N),):
            self.values = self.values.reshape(expected)
        if self.values.shape != expected:
            raise ValueError(
                f"expected rotation samples of shape {expected} for "
                f"(L, N)=({self.L}, {self.N}), got {self.values.shape}"
            )

    @classmethod
    def zeros(cls, L: int, N: int) -> "RotationMap":
        return cls(L, N, np.zeros((2 * L - 1, L, 2 * N - 1), dtype=complex))

    def vector(self) -> np.ndarray:
        return self.values.ravel()

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))
