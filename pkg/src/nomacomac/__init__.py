"""Wideband NOMA computation over multi-access channels.

Receive/transmit filter design for over-the-air function computation on
diagonal (per-subcarrier) OFDM channels, a noiseless feedback protocol,
and a seeded Monte-Carlo harness for MSE-vs-Eb/N0 experiments.
"""

from .diag import (
    CDiag,
    DimensionMismatch,
    NearSingular,
    SvdTriple,
    count_ops,
    dadd,
    dinv,
    dmul,
    eig_diag,
    fro_norm_sq,
    min_singular_sq,
    svd_diag,
    trace,
)
from .channel import (
    ChannelConfig,
    ChannelSet,
    NoiseModel,
    ebno_to_noise_var,
    effective_channel_g,
    sample_channels,
    sample_noise,
    sum_channel,
)
from .scheduling import (
    IndivisiblePlan,
    SubcarrierAssignment,
    SubfunctionPlan,
    assemble_combined,
    assign_subcarriers,
    make_plan,
    select_nodes,
)
from .filters import (
    METHODS,
    FeedbackRecord,
    FilterSolution,
    design,
    design_from_feedback,
    eta_star,
    feedback_aggregate,
    feedback_postprocess,
    feedback_signal,
    transmit_filters,
    unitary_a1,
    unitary_a2,
    unitary_a3,
)
from .sim import (
    MseEstimate,
    NomographicSpec,
    TransmissionRecord,
    analytic_mse,
    arithmetic_mean,
    compute_function,
    compute_function_planned,
    geometric_mean,
    monte_carlo_mse,
    simulate,
    reconstruct_desired,
    transmit_round,
)

__version__ = "0.1.0"
