"""Wigner transforms on the rotation group and their fast adjoints.

Signals live on the (2L-1, L, 2N-1) Euler-angle grid (zyz convention); the
inverse transform evaluates the truncated Wigner expansion and the forward
transform recovers coefficients exactly for band-limited input.  Both
adjoints are computed stage-by-stage in reverse: a degree contraction
against d^l(pi/2) pairs, a sin(beta) quadrature-weight convolution, offset
FFTs in beta and plain FFTs in alpha/gamma, and a parity fold that is the
transpose of the periodic beta extension.  The chain costs O(N L^3).

The dense oracle assembles the synthesis matrix from `wigner_d_exact` and is
entirely independent of the fast path.
"""

from __future__ import annotations

import numpy as np
import numpy.fft as fft

from .dmatrix import delta_half, wigner_d_exact
from .sampling import (
    RotationMap,
    WignerCoeffs,
    alphas,
    betas,
    gammas,
    n_max,
    n_so3_samples,
    n_wigner_coeffs,
    weight_matrix,
)

__all__ = [
    "wigner_forward",
    "wigner_inverse",
    "wigner_forward_adjoint",
    "wigner_inverse_adjoint",
    "dense_synthesis_matrix",
    "dense_forward_matrix",
    "random_wigner_coeffs",
]

_IPOW = np.array([1, 1j, -1, -1j])

_CONST_CACHE: dict[tuple[int, int], dict] = {}


def _constants(L: int, N: int) -> dict:
    c = _CONST_CACHE.get((L, N))
    if c is None:
        dh = delta_half(L)
        m = np.arange(-(L - 1), L)
        n = np.arange(-(N - 1), N)
        ell = np.arange(L)
        dhn = np.ascontiguousarray(dh[:, :, L - 1 - (N - 1) : L + N - 1])
        xdum = np.zeros((L, 2 * L - 1, 2 * N - 1))
        fdum = np.zeros((2 * L - 1, L, 2 * N - 1))
        c = {
            "dh": dh,
            "dhn": dhn,
            "path_c2f": np.einsum_path("lpm,lpn,lmn->mpn", dh, dhn, xdum, optimize="optimal")[0],
            "path_f2c": np.einsum_path("lpm,lpn,mpn->lmn", dh, dhn, fdum, optimize="optimal")[0],
            "i_nm": np.outer(_IPOW[np.mod(-m, 4)], _IPOW[np.mod(n, 4)]),  # i^{n-m}
            "i_mn": np.outer(_IPOW[np.mod(m, 4)], _IPOW[np.mod(-n, 4)]),  # i^{m-n}
            "parity": np.outer((-1.0) ** np.abs(m), (-1.0) ** np.abs(n)),
            "theta_phase": np.exp(1j * m * np.pi / (2 * L - 1)),
            "ell_norm": (2 * ell + 1) / (8 * np.pi**2),
        }
        _CONST_CACHE[(L, N)] = c
    return c


def _einsum3(spec: str, a, b, x, path) -> np.ndarray:
    """Real/imaginary split keeps the big contractions in float64."""
    return np.einsum(spec, a, b, x.real, optimize=path) + 1j * np.einsum(
        spec, a, b, x.imag, optimize=path
    )


def _coeff_to_freq3(X: np.ndarray, L: int, N: int, ell_norm: bool) -> np.ndarray:
    """F[m, m', n] = i^{n-m} sum_l [c_l] D^l_{m'm} D^l_{m'n} X[l, m, n]."""
    c = _constants(L, N)
    if ell_norm:
        X = X * c["ell_norm"][:, None, None]
    Fh = _einsum3("lpm,lpn,lmn->mpn", c["dh"], c["dhn"], X, c["path_c2f"])  # m' = 0 .. L-1
    F = np.empty((2 * L - 1, 2 * L - 1, 2 * N - 1), dtype=complex)
    F[:, L - 1 :, :] = Fh
    F[:, : L - 1, :] = Fh[:, 1:, :][:, ::-1, :] * c["parity"][:, None, :]
    return F * c["i_nm"][:, None, :]


def _freq_to_coeff3(F: np.ndarray, L: int, N: int, ell_norm: bool) -> np.ndarray:
    """X[l, m, n] = i^{m-n} [c_l] sum_{m'} D^l_{m'm} D^l_{m'n} F[m, m', n]."""
    c = _constants(L, N)
    F = F * c["i_mn"][:, None, :]
    Ff = F[:, L - 1 :, :].copy()
    Ff[:, 1:, :] += F[:, : L - 1, :][:, ::-1, :] * c["parity"][:, None, :]
    X = _einsum3("lpm,lpn,mpn->lmn", c["dh"], c["dhn"], Ff, c["path_f2c"])
    if ell_norm:
        X = X * c["ell_norm"][:, None, None]
    return X


def _apply_weights3(G: np.ndarray, L: int) -> np.ndarray:
    """(2 pi)^2-scaled sin(beta) weight convolution over the beta-frequency
    axis (axis 1); self-adjoint because w(-m) = conj(w(m))."""
    return (2 * np.pi) ** 2 * np.tensordot(weight_matrix(L), G, axes=([1], [1])).transpose(
        1, 0, 2
    )


def _inverse_arr(X: np.ndarray, L: int, N: int) -> np.ndarray:
    c = _constants(L, N)
    F = _coeff_to_freq3(X, L, N, ell_norm=True)
    F = F * c["theta_phase"][None, :, None]
    f = fft.ifft(fft.ifftshift(F, axes=0), axis=0) * (2 * L - 1)
    f = fft.ifft(fft.ifftshift(f, axes=1), axis=1) * (2 * L - 1)
    f = fft.ifft(fft.ifftshift(f, axes=2), axis=2) * (2 * N - 1)
    return f[:, :L, :]


def _forward_arr(f: np.ndarray, L: int, N: int) -> np.ndarray:
    c = _constants(L, N)
    G = fft.fftshift(fft.fft(f, axis=0), axes=0) / (2 * L - 1)
    G = fft.fftshift(fft.fft(G, axis=2), axes=2) / (2 * N - 1)
    ext = np.concatenate([G, G[:, : L - 1, :][:, ::-1, :] * c["parity"][:, None, :]], axis=1)
    G = fft.fftshift(fft.fft(ext, axis=1), axes=1) / (2 * L - 1)
    G = G * np.conj(c["theta_phase"])[None, :, None]
    G = _apply_weights3(G, L)
    return _freq_to_coeff3(G, L, N, ell_norm=False)


def _forward_adjoint_arr(X: np.ndarray, L: int, N: int) -> np.ndarray:
    c = _constants(L, N)
    G = _coeff_to_freq3(X, L, N, ell_norm=False)
    G = _apply_weights3(G, L)
    G = G * c["theta_phase"][None, :, None]
    rows = fft.ifft(fft.ifftshift(G, axes=1), axis=1)  # carries 1/(2L-1)
    folded = rows[:, :L, :].copy()
    folded[:, : L - 1, :] += rows[:, 2 * L - 2 : L - 1 : -1, :] * c["parity"][:, None, :]
    out = fft.ifft(fft.ifftshift(folded, axes=0), axis=0)
    out = fft.ifft(fft.ifftshift(out, axes=2), axis=2)
    return out


def _inverse_adjoint_arr(f: np.ndarray, L: int, N: int) -> np.ndarray:
    c = _constants(L, N)
    padded = np.zeros((2 * L - 1, 2 * L - 1, 2 * N - 1), dtype=complex)
    padded[:, :L, :] = f
    F = fft.fftshift(fft.fft(padded, axis=0), axes=0)
    F = fft.fftshift(fft.fft(F, axis=1), axes=1)
    F = F * np.conj(c["theta_phase"])[None, :, None]
    F = fft.fftshift(fft.fft(F, axis=2), axes=2)
    return _freq_to_coeff3(F, L, N, ell_norm=True)


# ---------------------------------------------------------------------------
# Public, typed API
# ---------------------------------------------------------------------------


def wigner_forward(rmap: RotationMap) -> WignerCoeffs:
    """Analyse rotation-group samples into Wigner coefficients."""
    return WignerCoeffs.from_array(_forward_arr(rmap.values, rmap.L, rmap.N), rmap.N)


def wigner_inverse(coeffs: WignerCoeffs) -> RotationMap:
    """Synthesise rotation-group samples from Wigner coefficients."""
    return RotationMap(coeffs.L, coeffs.N, _inverse_arr(coeffs.to_array(), coeffs.L, coeffs.N))


def wigner_forward_adjoint(coeffs: WignerCoeffs) -> RotationMap:
    """Adjoint of `wigner_forward`."""
    return RotationMap(
        coeffs.L, coeffs.N, _forward_adjoint_arr(coeffs.to_array(), coeffs.L, coeffs.N)
    )


def wigner_inverse_adjoint(rmap: RotationMap) -> WignerCoeffs:
    """Adjoint of `wigner_inverse`."""
    return WignerCoeffs.from_array(_inverse_adjoint_arr(rmap.values, rmap.L, rmap.N), rmap.N)


# ---------------------------------------------------------------------------
# Dense oracle
# ---------------------------------------------------------------------------


def dense_synthesis_matrix(L: int, N: int) -> np.ndarray:
    """Synthesis matrix built from conjugate Wigner D-functions, shape
    (N_so3, n_coeffs); columns follow the flat scale-major layout."""
    al, be, ga = alphas(L), betas(L), gammas(N)
    n_rows = n_so3_samples(L, N)
    M = np.empty((n_rows, n_wigner_coeffs(L, N)), dtype=complex)
    col = 0
    for ell in range(L):
        nm = n_max(L, N, ell)
        dls = np.array([wigner_d_exact(ell, b) for b in be])  # (L, 2l+1, 2l+1)
        for m in range(-ell, ell + 1):
            for n in range(-nm, nm + 1):
                block = (
                    (2 * ell + 1)
                    / (8 * np.pi**2)
                    * np.exp(1j * m * al)[:, None, None]
                    * dls[:, m + ell, n + ell][None, :, None]
                    * np.exp(1j * n * ga)[None, None, :]
                )
                M[:, col] = block.ravel()
                col += 1
    return M


def dense_forward_matrix(L: int, N: int) -> np.ndarray:
    """Least-squares left inverse of the dense synthesis matrix."""
    return np.linalg.pinv(dense_synthesis_matrix(L, N))


def random_wigner_coeffs(L: int, N: int, rng: np.random.Generator) -> WignerCoeffs:
    size = n_wigner_coeffs(L, N)
    return WignerCoeffs(L, N, rng.standard_normal(size) + 1j * rng.standard_normal(size))
