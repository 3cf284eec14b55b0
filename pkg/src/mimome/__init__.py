"""Secrecy-rate maximization for MIMO wiretap channels with finite-alphabet
inputs: GSVD-based channel diagonalization, mutual-information/MMSE evaluation
for discrete constellations, dual-decomposition power allocation, closed-form
Gaussian/low-SNR/high-SNR baselines, and Monte Carlo ergodic evaluation with
optional eavesdropper CSI uncertainty.
"""

__version__ = "0.1.0"

from .allocate import (
    ChannelRate,
    PowerAllocation,
    SecrecyProblem,
    SecrecyRateResult,
    SolverConfig,
    SolverError,
    dual_decomposition,
    dual_value,
    precoder_powers,
    secrecy_rate,
    solve_subproblem1,
    solve_subproblem2,
    uniform_allocation,
)
from .channels import (
    ChannelPair,
    load_channel_pair,
    load_matrix,
    matrix_from_json,
    matrix_to_json,
    save_matrix,
)
from .closed_forms import (
    HighSnrParams,
    fit_high_snr_constant,
    gaussian_allocate,
    gaussian_rate,
    high_snr_allocate,
    high_snr_rate,
    low_snr_allocate,
    low_snr_rate,
)
from .constellations import (
    Constellation,
    MiTable,
    as_input_model,
    constellation,
    g_function,
    mmse_difference,
    mmse_inverse,
)
from .ergodic import (
    METHODS,
    EnsembleSpec,
    PartialCsiResult,
    SweepRecord,
    UncertaintyModel,
    allocate_by_method,
    draw_channel_pair,
    ergodic_sweep,
    partial_csi_rate,
    partial_csi_sweep,
    rate_by_method,
)
from .gsvd import (
    GsvdResult,
    ParallelChannel,
    ParallelChannelBank,
    build_precoder,
    default_rank_tol,
    gsvd,
    reduce_to_parallel,
)
from .scenario import Scenario, ScenarioError, parse_scenario

__all__ = [
    "__version__",
    "ChannelPair", "load_channel_pair", "load_matrix", "save_matrix",
    "matrix_to_json", "matrix_from_json",
    "GsvdResult", "gsvd", "default_rank_tol", "build_precoder",
    "ParallelChannel", "ParallelChannelBank", "reduce_to_parallel",
    "Constellation", "constellation", "MiTable", "as_input_model",
    "mmse_inverse", "g_function", "mmse_difference",
    "SolverConfig", "SecrecyProblem", "PowerAllocation", "SolverError",
    "solve_subproblem1", "solve_subproblem2", "dual_decomposition",
    "dual_value", "secrecy_rate", "SecrecyRateResult", "ChannelRate",
    "uniform_allocation", "precoder_powers",
    "gaussian_allocate", "gaussian_rate", "low_snr_allocate", "low_snr_rate",
    "high_snr_allocate", "high_snr_rate", "HighSnrParams",
    "fit_high_snr_constant",
    "EnsembleSpec", "draw_channel_pair", "METHODS", "allocate_by_method",
    "rate_by_method", "SweepRecord", "ergodic_sweep", "UncertaintyModel",
    "PartialCsiResult", "partial_csi_rate", "partial_csi_sweep",
    "Scenario", "ScenarioError", "parse_scenario",
]
