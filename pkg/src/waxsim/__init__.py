"""Decentralized multi-antenna receive processing with unitary constraints.

Per-panel unitary filters feed a fixed semi-unitary combining module that
reduces M antenna streams to T; this package constructs the family of
information-lossless reductions, minimizes the information-loss distance
to it by alternating closed-form Procrustes updates, and benchmarks the
result against unconstrained, projected, and random filters in seeded
Monte Carlo capacity-ratio sweeps.
"""

from .linalg import (
    RankDeficientError,
    SvdResult,
    haar_semi_unitary,
    haar_unitary,
    polar_factor,
    procrustes,
    qr_split,
    svd,
)
from .model import (
    ChannelMatrix,
    SystemConfig,
    capacity_ratio,
    mutual_information_full,
    mutual_information_processed,
    sample_channel,
)
from .wax import (
    BlockDiagonalFilter,
    CombiningModule,
    LosslessParams,
    WaxSolution,
    assemble_lossless_transform,
    effective_transform,
    empirical_t_min,
    expand_filter,
    t_min,
    tradeoff_satisfied,
    tradeoff_threshold,
)
from .optim import OptimOptions, OptimResult, objective_j, optimize, step_q, step_q0, step_w
from .baseline import (
    UnconstrainedSolution,
    build_constraint_operator,
    project_to_unitary_blocks,
    random_isotropic_filter,
    solve_unconstrained,
    unconstrained_transform,
)
from .harness import (
    METHODS,
    ExperimentSpec,
    SweepResult,
    SweepRow,
    TrialOutcome,
    emit,
    render,
    run_sweep,
    run_trial,
)

__version__ = "0.1.0"

__all__ = [
    "BlockDiagonalFilter",
    "ChannelMatrix",
    "CombiningModule",
    "ExperimentSpec",
    "LosslessParams",
    "METHODS",
    "OptimOptions",
    "OptimResult",
    "RankDeficientError",
    "SvdResult",
    "SweepResult",
    "SweepRow",
    "SystemConfig",
    "TrialOutcome",
    "UnconstrainedSolution",
    "WaxSolution",
    "assemble_lossless_transform",
    "build_constraint_operator",
    "capacity_ratio",
    "effective_transform",
    "emit",
    "empirical_t_min",
    "expand_filter",
    "haar_semi_unitary",
    "haar_unitary",
    "mutual_information_full",
    "mutual_information_processed",
    "objective_j",
    "optimize",
    "polar_factor",
    "procrustes",
    "project_to_unitary_blocks",
    "qr_split",
    "random_isotropic_filter",
    "render",
    "run_sweep",
    "run_trial",
    "sample_channel",
    "solve_unconstrained",
    "step_q",
    "step_q0",
    "step_w",
    "svd",
    "t_min",
    "tradeoff_satisfied",
    "tradeoff_threshold",
    "unconstrained_transform",
]
