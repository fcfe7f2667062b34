import numpy as np
import pytest

from sphere_sparse.operators import LinearOperator


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def dot_gap(op: LinearOperator, n_probes: int = 10, seed: int = 0) -> float:
    """Worst relative adjoint defect over random complex probe pairs."""
    r = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        x = r.standard_normal(op.in_dim) + 1j * r.standard_normal(op.in_dim)
        y = r.standard_normal(op.out_dim) + 1j * r.standard_normal(op.out_dim)
        ax = op.apply(x)
        aty = op.adjoint(y)
        worst = max(
            worst,
            abs(np.vdot(ax, y) - np.vdot(x, aty)) / (np.linalg.norm(ax) * np.linalg.norm(y)),
        )
    return worst


def materialize(apply, in_dim: int, out_dim: int) -> np.ndarray:
    """Dense matrix of a linear map, built column by column."""
    mat = np.zeros((out_dim, in_dim), dtype=complex)
    e = np.zeros(in_dim, dtype=complex)
    for i in range(in_dim):
        e[:] = 0
        e[i] = 1.0
        mat[:, i] = apply(e)
    return mat
