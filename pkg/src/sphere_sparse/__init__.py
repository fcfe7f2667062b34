"""Sparse regularisation of linear inverse problems on the sphere.

Exact harmonic transforms on efficient equiangular samplings of the sphere
and the rotation group, scale-discretised wavelet analysis/synthesis with
fast adjoints, measurement operators (masking, beam convolution), and a
Douglas-Rachford solver for weighted-l1 recovery in the synthesis and
analysis settings, plus an experiment harness and CLI.
"""

from .sampling import (
    HarmonicCoeffs,
    RotationMap,
    SphericalMap,
    WignerCoeffs,
    quadrature_weight,
)
from .sphere import sht_forward, sht_forward_adjoint, sht_inverse, sht_inverse_adjoint
from .so3 import (
    wigner_forward,
    wigner_forward_adjoint,
    wigner_inverse,
    wigner_inverse_adjoint,
)
from .wavelets import (
    WaveletCoeffs,
    WaveletConfig,
    WaveletKernels,
    make_kernels,
    wavelet_forward,
    wavelet_forward_adjoint,
    wavelet_inverse,
    wavelet_inverse_adjoint,
)
from .operators import (
    BeamSpec,
    LinearOperator,
    MaskSpec,
    dot_test,
    identity_op,
    op_beam,
    op_compose,
    op_inpaint,
    power_method,
    sht_op,
    wavelet_analysis_op,
    wavelet_synthesis_op,
    wigner_op,
)
from .solver import (
    ProblemSpec,
    SolutionReport,
    SolverOptions,
    WeightVector,
    compute_weights,
    project_l2_ball,
    prox_weighted_l1,
    select_epsilon,
    solve,
)
from .harness import (
    ExperimentSpec,
    ExperimentReport,
    SnrReport,
    add_noise,
    best_smoothing_snr,
    compute_snr,
    gaussian_smooth,
    make_testmap,
    run_experiment,
)
from .mapio import read_ssmap, read_wavelet_coeffs, write_ssmap, write_wavelet_coeffs

__version__ = "0.1.0"
