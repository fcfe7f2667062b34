"""Uniform linear-operator handles, measurement operators, and norms.

Every transform and measurement model used by the solver is wrapped as an
apply/adjoint pair with explicit dimensions so compositions and dot-tests
are mechanical.  Measurement operators cover uniformly random masking
(inpainting), a harmonic-space Gaussian beam (deconvolution), and their
composition.  Operator norms come from the power method on A^dagger A.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import so3, sphere, wavelets
from .sampling import (
    HarmonicCoeffs,
    RotationMap,
    SphericalMap,
    WignerCoeffs,
    flm_size,
    n_so3_samples,
    n_sphere_samples,
    n_wigner_coeffs,
)

__all__ = [
    "LinearOperator",
    "MaskSpec",
    "BeamSpec",
    "identity_op",
    "op_inpaint",
    "op_beam",
    "op_compose",
    "sht_op",
    "wigner_op",
    "wavelet_analysis_op",
    "wavelet_synthesis_op",
    "dot_test",
    "power_method",
    "PowerMethodEstimate",
]


@dataclass
class LinearOperator:
    """Pairing of apply/adjoint maps between flat complex vectors."""

    apply: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    in_dim: int
    out_dim: int
    kind: str | None = None
    meta: dict = field(default_factory=dict)


def dot_test(op: LinearOperator, n_probes: int = 10, seed: int = 0) -> float:
    """Largest relative defect of <Ax, y> = <x, A'y> over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        x = rng.standard_normal(op.in_dim) + 1j * rng.standard_normal(op.in_dim)
        y = rng.standard_normal(op.out_dim) + 1j * rng.standard_normal(op.out_dim)
        ax = op.apply(x)
        aty = op.adjoint(y)
        gap = abs(np.vdot(ax, y) - np.vdot(x, aty))
        worst = max(worst, gap / (np.linalg.norm(ax) * np.linalg.norm(y)))
    return worst


def identity_op(n: int) -> LinearOperator:
    return LinearOperator(lambda v: v.copy(), lambda v: v.copy(), n, n, kind="identity")


# ---------------------------------------------------------------------------
# Measurement operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaskSpec:
    """Uniformly random selection of M grid samples; reproducible from
    (seed, M, L) alone, which is also how it serialises."""

    L: int
    M: int
    seed: int

    def __post_init__(self) -> None:
        if not (1 <= self.M <= n_sphere_samples(self.L)):
            raise ValueError(
                f"mask needs 1 <= M <= {n_sphere_samples(self.L)} for L={self.L}, got {self.M}"
            )

    @property
    def indices(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.choice(n_sphere_samples(self.L), size=self.M, replace=False)


def op_select(indices: np.ndarray, L: int) -> LinearOperator:
    """Selection of explicit grid samples; the adjoint scatters measurements
    back onto a zero map."""
    n = n_sphere_samples(L)
    idx = np.asarray(indices)
    if len(np.unique(idx)) != idx.size:
        raise ValueError("selection indices must be unique")
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError("selection indices out of range")

    def apply(v: np.ndarray) -> np.ndarray:
        return v[idx]

    def adjoint(w: np.ndarray) -> np.ndarray:
        out = np.zeros(n, dtype=complex)
        out[idx] = w
        return out

    return LinearOperator(apply, adjoint, n, idx.size, kind="select", meta={"indices": idx})


def op_inpaint(mask: MaskSpec) -> LinearOperator:
    """Uniformly random masking drawn from the mask specification."""
    return op_select(mask.indices, mask.L)


@dataclass(frozen=True)
class BeamSpec:
    """Gaussian harmonic beam, diagonal with entries exp(-l^2 sigma^2)."""

    L: int
    sigma: float | None = None

    @property
    def sigma_value(self) -> float:
        return np.pi / self.L if self.sigma is None else self.sigma

    @property
    def gl(self) -> np.ndarray:
        ell = np.arange(self.L)
        return np.exp(-(ell.astype(float) ** 2) * self.sigma_value**2)


def op_beam(beam: BeamSpec) -> LinearOperator:
    """Convolution with the beam: synthesis o diag(G) o analysis.

    The adjoint uses the adjoint transforms (analysis-adjoint o diag(G) o
    inverse-adjoint); G is real so it is self-adjoint.
    """
    L = beam.L
    n = n_sphere_samples(L)
    g_flat = np.repeat(beam.gl, 2 * np.arange(L) + 1)

    def apply(v: np.ndarray) -> np.ndarray:
        flm = sphere.sht_forward(SphericalMap(L, v.reshape(L, 2 * L - 1)))
        return sphere.sht_inverse(HarmonicCoeffs(L, flm.values * g_flat)).vector()

    def adjoint(w: np.ndarray) -> np.ndarray:
        flm = sphere.sht_inverse_adjoint(SphericalMap(L, w.reshape(L, 2 * L - 1)))
        return sphere.sht_forward_adjoint(HarmonicCoeffs(L, flm.values * g_flat)).vector()

    return LinearOperator(apply, adjoint, n, n, kind="beam", meta={"gl": beam.gl})


def op_compose(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    """Composition a o b (apply b first)."""
    if b.out_dim != a.in_dim:
        raise ValueError(
            f"cannot compose: inner output dimension {b.out_dim} != outer input {a.in_dim}"
        )
    return LinearOperator(
        lambda v: a.apply(b.apply(v)),
        lambda w: b.adjoint(a.adjoint(w)),
        b.in_dim,
        a.out_dim,
        kind="compose",
        meta={"parts": (a, b)},
    )


# ---------------------------------------------------------------------------
# Transform wrappers
# ---------------------------------------------------------------------------


def sht_op(L: int, direction: str = "forward") -> LinearOperator:
    """Spherical harmonic transform as an operator handle.

    direction 'forward' maps samples to coefficients; 'inverse' maps
    coefficients to samples.  Adjoints are the fast adjoint transforms.
    """
    n_s, n_c = n_sphere_samples(L), flm_size(L)
    if direction == "forward":
        return LinearOperator(
            lambda v: sphere.sht_forward(SphericalMap(L, v.reshape(L, 2 * L - 1))).values,
            lambda w: sphere.sht_forward_adjoint(HarmonicCoeffs(L, w)).vector(),
            n_s,
            n_c,
        )
    if direction == "inverse":
        return LinearOperator(
            lambda v: sphere.sht_inverse(HarmonicCoeffs(L, v)).vector(),
            lambda w: sphere.sht_inverse_adjoint(SphericalMap(L, w.reshape(L, 2 * L - 1))).values,
            n_c,
            n_s,
        )
    raise ValueError(f"unknown direction {direction!r}")


def wigner_op(L: int, N: int, direction: str = "forward") -> LinearOperator:
    n_s, n_c = n_so3_samples(L, N), n_wigner_coeffs(L, N)
    shape = (2 * L - 1, L, 2 * N - 1)
    if direction == "forward":
        return LinearOperator(
            lambda v: so3.wigner_forward(RotationMap(L, N, v.reshape(shape))).values,
            lambda w: so3.wigner_forward_adjoint(WignerCoeffs(L, N, w)).vector(),
            n_s,
            n_c,
        )
    if direction == "inverse":
        return LinearOperator(
            lambda v: so3.wigner_inverse(WignerCoeffs(L, N, v)).vector(),
            lambda w: so3.wigner_inverse_adjoint(RotationMap(L, N, w.reshape(shape))).values,
            n_c,
            n_s,
        )
    raise ValueError(f"unknown direction {direction!r}")


def wavelet_analysis_op(kernels: wavelets.WaveletKernels, oracle: bool = False) -> LinearOperator:
    """Wavelet analysis (map -> coefficients) with its exact adjoint."""
    cfg = kernels.config
    n_map = n_sphere_samples(cfg.L)

    def apply(v: np.ndarray) -> np.ndarray:
        smap = SphericalMap(cfg.L, v.reshape(cfg.L, 2 * cfg.L - 1))
        return wavelets.wavelet_forward(smap, kernels, oracle=oracle).vector()

    def adjoint(w: np.ndarray) -> np.ndarray:
        alpha = wavelets.WaveletCoeffs.from_vector(cfg, w)
        return wavelets.wavelet_forward_adjoint(alpha, kernels, oracle=oracle).vector()

    return LinearOperator(apply, adjoint, n_map, cfg.n_coeffs, kind="wavelet-analysis")


def wavelet_synthesis_op(kernels: wavelets.WaveletKernels, oracle: bool = False) -> LinearOperator:
    """Wavelet synthesis (coefficients -> map) with its exact adjoint."""
    cfg = kernels.config
    n_map = n_sphere_samples(cfg.L)

    def apply(v: np.ndarray) -> np.ndarray:
        alpha = wavelets.WaveletCoeffs.from_vector(cfg, v)
        return wavelets.wavelet_inverse(alpha, kernels, oracle=oracle).vector()

    def adjoint(w: np.ndarray) -> np.ndarray:
        smap = SphericalMap(cfg.L, w.reshape(cfg.L, 2 * cfg.L - 1))
        return wavelets.wavelet_inverse_adjoint(smap, kernels, oracle=oracle).vector()

    return LinearOperator(apply, adjoint, cfg.n_coeffs, n_map, kind="wavelet-synthesis")


# ---------------------------------------------------------------------------
# Operator norm estimation
# ---------------------------------------------------------------------------


class PowerMethodEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int
    history: tuple[float, ...]


def power_method(
    op: LinearOperator,
    tol: float = 1e-6,
    max_iter: int = 200,
    seed: int = 0,
) -> PowerMethodEstimate:
    """Estimate ||op||_2 by power iteration on op^dagger op.

    The estimate sqrt(||A'A v||) with v normalised is monotone
    non-decreasing; iteration stops once the relative change drops below
    tol.  Non-convergence warns and returns the last estimate.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.in_dim) + 1j * rng.standard_normal(op.in_dim)
    v /= np.linalg.norm(v)
    estimate = 0.0
    history = []
    for it in range(1, max_iter + 1):
        bv = op.adjoint(op.apply(v))
        nrm = np.linalg.norm(bv)
        if nrm == 0.0:
            return PowerMethodEstimate(0.0, True, it, tuple(history))
        new_estimate = float(np.sqrt(nrm))
        history.append(new_estimate)
        v = bv / nrm
        if estimate > 0 and abs(new_estimate - estimate) < tol * new_estimate:
            return PowerMethodEstimate(new_estimate, True, it, tuple(history))
        estimate = new_estimate
    warnings.warn(
        f"power method did not converge in {max_iter} iterations "
        f"(last estimate {estimate:.6e})",
        RuntimeWarning,
    )
    return PowerMethodEstimate(estimate, False, max_iter, tuple(history))
