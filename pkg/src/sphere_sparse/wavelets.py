"""Scale-discretised wavelet analysis and synthesis on the sphere.

Wavelet kernels tile harmonic space with smooth bump-derived profiles: the
kernel for scale j is supported on degrees in (lam^(j-1), lam^(j+1)) and the
axisymmetric scaling kernel captures degrees below lam^J_min.  The squared
profiles telescope to one on [0, L), which is what makes analysis followed
by synthesis the identity; `make_kernels` verifies that numerically rather
than assuming it.  For N > 1 the directional profile spreads each scale over
azimuthal orders n of a single parity (matching N-1), normalised per degree.

Analysis maps a sphere map to one scaling map plus one rotation-group map
per scale, each stored at its own band-limits (L^j, N^j); synthesis inverts
that, and both have exact adjoints assembled from the adjoint harmonic
transforms (which differ from the inverses on these grids).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import so3, sphere
from .sampling import RotationMap, SphericalMap, n_so3_samples, n_sphere_samples

__all__ = [
    "WaveletConfig",
    "WaveletKernels",
    "WaveletCoeffs",
    "make_kernels",
    "wavelet_forward",
    "wavelet_inverse",
    "wavelet_forward_adjoint",
    "wavelet_inverse_adjoint",
]


def _iceil(x: float) -> int:
    """Ceiling robust to values that are integers up to roundoff."""
    r = round(x)
    if abs(x - r) < 1e-9:
        return int(r)
    return int(math.ceil(x))


@dataclass(frozen=True)
class WaveletConfig:
    """Band-limits and scale layout of a wavelet dictionary."""

    L: int
    N: int = 1
    lam: float = 2.0
    J_min: int = 0

    def __post_init__(self) -> None:
        if self.L < 2:
            raise ValueError("wavelet transforms need a band-limit L >= 2")
        if not (1 <= self.N <= self.L):
            raise ValueError(f"need 1 <= N <= L, got N={self.N}, L={self.L}")
        if self.lam <= 1:
            raise ValueError("scaling parameter lam must exceed 1")
        if self.J_min < 0:
            raise ValueError("J_min must be >= 0")
        if self.lam**self.J_min > self.L:
            raise ValueError(
                f"lam^J_min = {self.lam**self.J_min:g} exceeds L = {self.L}; "
                "no degrees left for the wavelet scales"
            )
        if self.J_min > self.J_max:
            raise ValueError(f"J_min={self.J_min} exceeds J_max={self.J_max}")

    @property
    def J_max(self) -> int:
        return max(0, _iceil(math.log(self.L - 1) / math.log(self.lam)))

    @property
    def scales(self) -> range:
        return range(self.J_min, self.J_max + 1)

    def band_limit(self, j: int) -> int:
        """Per-scale harmonic band-limit L^j."""
        return min(_iceil(self.lam ** (j + 1)), self.L)

    def azimuthal_band_limit(self, j: int) -> int:
        """Per-scale directional band-limit N^j."""
        return min(self.N, self.band_limit(j))

    @property
    def scaling_band_limit(self) -> int:
        return min(max(_iceil(self.lam**self.J_min), 1), self.L)

    @property
    def n_coeffs(self) -> int:
        total = n_sphere_samples(self.scaling_band_limit)
        for j in self.scales:
            total += n_so3_samples(self.band_limit(j), self.azimuthal_band_limit(j))
        return total


# ---------------------------------------------------------------------------
# Harmonic tiling
# ---------------------------------------------------------------------------


def _bump(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def _bump_arg(u: float, lam: float) -> float:
    return 2 * lam * (u - 1 / lam) / (lam - 1) - 1


@lru_cache(maxsize=None)
def _tiling_normaliser(lam: float) -> float:
    val, _ = quad(lambda u: _bump(np.array([_bump_arg(u, lam)]))[0] ** 2 / u, 1 / lam, 1)
    return val


@lru_cache(maxsize=None)
def _k_transition(t: float, lam: float) -> float:
    """k(t): 1 below 1/lam, 0 above 1, smooth monotone in between."""
    if t <= 1 / lam:
        return 1.0
    if t >= 1.0:
        return 0.0
    val, _ = quad(lambda u: _bump(np.array([_bump_arg(u, lam)]))[0] ** 2 / u, t, 1)
    return val / _tiling_normaliser(lam)


def _k_values(ts: np.ndarray, lam: float) -> np.ndarray:
    return np.array([_k_transition(float(t), lam) for t in ts])


def _directional_profile(L: int, N: int) -> np.ndarray:
    """zeta[l, n+N-1] with sum_n zeta^2 = 1 per degree (l >= 1).

    Orders carry the parity of N-1 (even or odd azimuthal symmetry) and are
    weighted binomially, tapering smoothly toward |n| = N-1.
    """
    zeta = np.zeros((L, 2 * N - 1))
    if N == 1:
        zeta[:, 0] = 1.0
        return zeta
    g = N - 1
    for ell in range(L):
        nmax = min(g, ell)
        ns = [n for n in range(-nmax, nmax + 1) if (n - g) % 2 == 0]
        if not ns:
            continue
        chi = np.array([math.comb(g, (g + n) // 2) for n in ns], dtype=float)
        chi /= chi.sum()
        for n, c in zip(ns, chi):
            zeta[ell, n + N - 1] = math.sqrt(c)
    return zeta


@dataclass
class WaveletKernels:
    """Harmonic kernels: psi[j_idx, l, n] for the wavelets (already including
    the sqrt((2l+1)/8 pi^2) normalisation) and upsilon[l] for the scaling
    function (including sqrt((2l+1)/4 pi)).  Both are real."""

    config: WaveletConfig
    psi: np.ndarray
    upsilon: np.ndarray
    kappa: np.ndarray
    eta: np.ndarray

    def psi_block(self, j: int) -> np.ndarray:
        """Kernel of scale j restricted to its own (L^j, N^j) window."""
        cfg = self.config
        Lj, Nj = cfg.band_limit(j), cfg.azimuthal_band_limit(j)
        N = cfg.N
        return self.psi[j - cfg.J_min, :Lj, N - Nj : N + Nj - 1]

    def wavelet_energy(self, j: int) -> float:
        """sum_{l n} |Psi^j_{l n}|^2 for scale j."""
        return float((self.psi[j - self.config.J_min] ** 2).sum())

    def scaling_energy(self) -> float:
        return float((self.upsilon**2).sum())

    def admissibility_residual(self) -> float:
        """max_l |sum_j kappa_j^2 + eta^2 - 1| over l < L."""
        total = (self.kappa**2).sum(axis=0) + self.eta**2
        return float(np.abs(total - 1.0).max())


def make_kernels(config: WaveletConfig) -> WaveletKernels:
    """Build the tiling kernels and check the reconstruction identity."""
    L, N, lam = config.L, config.N, config.lam
    ells = np.arange(L, dtype=float)
    n_scales = config.J_max - config.J_min + 1

    kappa = np.zeros((n_scales, L))
    for idx, j in enumerate(config.scales):
        hi = _k_values(ells / lam ** (j + 1), lam)
        lo = _k_values(ells / lam**j, lam)
        kappa[idx] = np.sqrt(np.clip(hi - lo, 0.0, None))
    eta = np.sqrt(np.clip(_k_values(ells / lam**config.J_min, lam), 0.0, None))

    zeta = _directional_profile(L, N)
    norm_w = np.sqrt((2 * ells + 1) / (8 * np.pi**2))
    norm_s = np.sqrt((2 * ells + 1) / (4 * np.pi))
    psi = kappa[:, :, None] * zeta[None, :, :] * norm_w[None, :, None]
    upsilon = eta * norm_s

    kernels = WaveletKernels(config, psi, upsilon, kappa, eta)
    resid = kernels.admissibility_residual()
    if resid > 1e-10:
        raise ValueError(f"kernel tiling failed the reconstruction identity (residual {resid:g})")
    return kernels


# ---------------------------------------------------------------------------
# Coefficient container
# ---------------------------------------------------------------------------


@dataclass
class WaveletCoeffs:
    """One scaling map plus one rotation-group map per scale."""

    config: WaveletConfig
    scaling: SphericalMap
    wavelets: list[RotationMap]

    def __post_init__(self) -> None:
        cfg = self.config
        if self.scaling.L != cfg.scaling_band_limit:
            raise ValueError("scaling map resolution does not match the configuration")
        if len(self.wavelets) != len(list(cfg.scales)):
            raise ValueError("wrong number of wavelet scales")
        for j, w in zip(cfg.scales, self.wavelets):
            if (w.L, w.N) != (cfg.band_limit(j), cfg.azimuthal_band_limit(j)):
                raise ValueError(f"scale {j} stored at ({w.L}, {w.N}), expected "
                                 f"({cfg.band_limit(j)}, {cfg.azimuthal_band_limit(j)})")

    @classmethod
    def zeros(cls, config: WaveletConfig) -> "WaveletCoeffs":
        return cls(
            config,
            SphericalMap.zeros(config.scaling_band_limit),
            [
                RotationMap.zeros(config.band_limit(j), config.azimuthal_band_limit(j))
                for j in config.scales
            ],
        )

    def vector(self) -> np.ndarray:
        return np.concatenate([self.scaling.vector()] + [w.vector() for w in self.wavelets])

    @classmethod
    def from_vector(cls, config: WaveletConfig, vec: np.ndarray) -> "WaveletCoeffs":
        if vec.shape != (config.n_coeffs,):
            raise ValueError(f"expected coefficient vector of length {config.n_coeffs}")
        Ls = config.scaling_band_limit
        pos = n_sphere_samples(Ls)
        scaling = SphericalMap(Ls, vec[:pos].copy())
        wavelets = []
        for j in config.scales:
            Lj, Nj = config.band_limit(j), config.azimuthal_band_limit(j)
            size = n_so3_samples(Lj, Nj)
            wavelets.append(RotationMap(Lj, Nj, vec[pos : pos + size].copy()))
            pos += size
        return cls(config, scaling, wavelets)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))


# ---------------------------------------------------------------------------
# Transform backends (fast by default; dense oracle on request)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _dense_sphere(L: int) -> tuple[np.ndarray, np.ndarray]:
    Y = sphere.dense_synthesis_matrix(L)
    return Y, np.linalg.pinv(Y)


@lru_cache(maxsize=None)
def _dense_so3(L: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    D = so3.dense_synthesis_matrix(L, N)
    return D, np.linalg.pinv(D)


class _FastBackend:
    sht_forward = staticmethod(sphere._forward_mat)
    sht_inverse = staticmethod(sphere._inverse_mat)
    sht_forward_adjoint = staticmethod(sphere._forward_adjoint_mat)
    sht_inverse_adjoint = staticmethod(sphere._inverse_adjoint_mat)
    wig_forward = staticmethod(so3._forward_arr)
    wig_inverse = staticmethod(so3._inverse_arr)
    wig_forward_adjoint = staticmethod(so3._forward_adjoint_arr)
    wig_inverse_adjoint = staticmethod(so3._inverse_adjoint_arr)


class _DenseBackend:
    """Dense-matrix transform path; the forward transforms are least-squares
    left inverses, suitable as an oracle at small band-limits."""

    @staticmethod
    def _flm_mat(vec: np.ndarray, L: int) -> np.ndarray:
        from .sampling import HarmonicCoeffs

        return HarmonicCoeffs(L, vec).to_matrix()

    @staticmethod
    def sht_forward(f: np.ndarray, L: int) -> np.ndarray:
        _, P = _dense_sphere(L)
        from .sampling import HarmonicCoeffs

        return HarmonicCoeffs(L, P @ f.ravel()).to_matrix()

    @staticmethod
    def sht_inverse(flm_mat: np.ndarray, L: int) -> np.ndarray:
        from .sampling import HarmonicCoeffs

        Y, _ = _dense_sphere(L)
        return (Y @ HarmonicCoeffs.from_matrix(flm_mat).values).reshape(L, 2 * L - 1)

    @staticmethod
    def sht_forward_adjoint(flm_mat: np.ndarray, L: int) -> np.ndarray:
        from .sampling import HarmonicCoeffs

        _, P = _dense_sphere(L)
        return (P.conj().T @ HarmonicCoeffs.from_matrix(flm_mat).values).reshape(L, 2 * L - 1)

    @staticmethod
    def sht_inverse_adjoint(f: np.ndarray, L: int) -> np.ndarray:
        from .sampling import HarmonicCoeffs

        Y, _ = _dense_sphere(L)
        return HarmonicCoeffs(L, Y.conj().T @ f.ravel()).to_matrix()

    @staticmethod
    def wig_forward(f: np.ndarray, L: int, N: int) -> np.ndarray:
        from .sampling import WignerCoeffs

        _, P = _dense_so3(L, N)
        return WignerCoeffs(L, N, P @ f.ravel()).to_array()

    @staticmethod
    def wig_inverse(arr: np.ndarray, L: int, N: int) -> np.ndarray:
        from .sampling import WignerCoeffs

        D, _ = _dense_so3(L, N)
        return (D @ WignerCoeffs.from_array(arr, N).values).reshape(2 * L - 1, L, 2 * N - 1)

    @staticmethod
    def wig_forward_adjoint(arr: np.ndarray, L: int, N: int) -> np.ndarray:
        from .sampling import WignerCoeffs

        _, P = _dense_so3(L, N)
        return (P.conj().T @ WignerCoeffs.from_array(arr, N).values).reshape(
            2 * L - 1, L, 2 * N - 1
        )

    @staticmethod
    def wig_inverse_adjoint(f: np.ndarray, L: int, N: int) -> np.ndarray:
        from .sampling import WignerCoeffs

        D, _ = _dense_so3(L, N)
        return WignerCoeffs(L, N, D.conj().T @ f.ravel()).to_array()


def _backend(oracle: bool):
    return _DenseBackend if oracle else _FastBackend


# ---------------------------------------------------------------------------
# Wavelet operators
# ---------------------------------------------------------------------------


def _mwin(L_full: int, L_sub: int) -> slice:
    """Column window of azimuthal orders |m| < L_sub inside a padded L_full matrix."""
    return slice(L_full - L_sub, L_full + L_sub - 1)


def wavelet_forward(
    x: SphericalMap, kernels: WaveletKernels, oracle: bool = False
) -> WaveletCoeffs:
    """Analysis: harmonic transform, per-scale kernel products, then inverse
    transforms at each scale's own resolution."""
    cfg = kernels.config
    if x.L != cfg.L:
        raise ValueError(f"map band-limit {x.L} does not match kernel configuration {cfg.L}")
    be = _backend(oracle)
    L, N = cfg.L, cfg.N
    flm = be.sht_forward(x.values, L)

    Ls = cfg.scaling_band_limit
    ells = np.arange(Ls)
    s_mat = flm[:Ls, _mwin(L, Ls)] * (
        np.sqrt(4 * np.pi / (2 * ells + 1)) * kernels.upsilon[:Ls]
    )[:, None]
    scaling = SphericalMap(Ls, be.sht_inverse(s_mat, Ls))

    wavelets = []
    for j in cfg.scales:
        Lj, Nj = cfg.band_limit(j), cfg.azimuthal_band_limit(j)
        psi = kernels.psi_block(j)
        norm = 8 * np.pi**2 / (2 * np.arange(Lj) + 1)
        warr = (
            norm[:, None, None]
            * flm[:Lj, _mwin(L, Lj)][:, :, None]
            * psi[:, None, :]
        )
        wavelets.append(RotationMap(Lj, Nj, be.wig_inverse(warr, Lj, Nj)))
    return WaveletCoeffs(cfg, scaling, wavelets)


def wavelet_inverse(
    alpha: WaveletCoeffs, kernels: WaveletKernels, oracle: bool = False
) -> SphericalMap:
    """Synthesis: forward transforms of every coefficient set, kernel
    multiply-and-sum in harmonic space, then one inverse harmonic transform."""
    cfg = kernels.config
    if alpha.config != cfg:
        raise ValueError("coefficient layout does not match kernel configuration")
    be = _backend(oracle)
    L = cfg.L
    acc = np.zeros((L, 2 * L - 1), dtype=complex)

    Ls = cfg.scaling_band_limit
    s_hat = be.sht_forward(alpha.scaling.values, Ls)
    ells = np.arange(Ls)
    acc[:Ls, _mwin(L, Ls)] += s_hat * (
        np.sqrt(4 * np.pi / (2 * ells + 1)) * kernels.upsilon[:Ls]
    )[:, None]

    for j, w in zip(cfg.scales, alpha.wavelets):
        Lj = cfg.band_limit(j)
        w_hat = be.wig_forward(w.values, w.L, w.N)
        psi = kernels.psi_block(j)
        acc[:Lj, _mwin(L, Lj)] += np.einsum("lmn,ln->lm", w_hat, psi)
    return SphericalMap(L, be.sht_inverse(acc, L))


def wavelet_forward_adjoint(
    alpha: WaveletCoeffs, kernels: WaveletKernels, oracle: bool = False
) -> SphericalMap:
    """Adjoint of the analysis operator (not the synthesis operator)."""
    cfg = kernels.config
    if alpha.config != cfg:
        raise ValueError("coefficient layout does not match kernel configuration")
    be = _backend(oracle)
    L = cfg.L
    acc = np.zeros((L, 2 * L - 1), dtype=complex)

    Ls = cfg.scaling_band_limit
    s_hat = be.sht_inverse_adjoint(alpha.scaling.values, Ls)
    ells = np.arange(Ls)
    acc[:Ls, _mwin(L, Ls)] += s_hat * (
        np.sqrt(4 * np.pi / (2 * ells + 1)) * kernels.upsilon[:Ls]
    )[:, None]

    for j, w in zip(cfg.scales, alpha.wavelets):
        Lj = cfg.band_limit(j)
        w_hat = be.wig_inverse_adjoint(w.values, w.L, w.N)
        w_hat = w_hat * (8 * np.pi**2 / (2 * np.arange(Lj) + 1))[:, None, None]
        psi = kernels.psi_block(j)
        acc[:Lj, _mwin(L, Lj)] += np.einsum("lmn,ln->lm", w_hat, psi)
    return SphericalMap(L, be.sht_forward_adjoint(acc, L))


def wavelet_inverse_adjoint(
    x: SphericalMap, kernels: WaveletKernels, oracle: bool = False
) -> WaveletCoeffs:
    """Adjoint of the synthesis operator (not the analysis operator)."""
    cfg = kernels.config
    if x.L != cfg.L:
        raise ValueError(f"map band-limit {x.L} does not match kernel configuration {cfg.L}")
    be = _backend(oracle)
    L = cfg.L
    flm = be.sht_inverse_adjoint(x.values, L)

    Ls = cfg.scaling_band_limit
    ells = np.arange(Ls)
    s_mat = flm[:Ls, _mwin(L, Ls)] * (
        np.sqrt(4 * np.pi / (2 * ells + 1)) * kernels.upsilon[:Ls]
    )[:, None]
    scaling = SphericalMap(Ls, be.sht_forward_adjoint(s_mat, Ls))

    wavelets = []
    for j in cfg.scales:
        Lj, Nj = cfg.band_limit(j), cfg.azimuthal_band_limit(j)
        psi = kernels.psi_block(j)
        warr = flm[:Lj, _mwin(L, Lj)][:, :, None] * psi[:, None, :]
        wavelets.append(RotationMap(Lj, Nj, be.wig_forward_adjoint(warr, Lj, Nj)))
    return WaveletCoeffs(cfg, scaling, wavelets)
