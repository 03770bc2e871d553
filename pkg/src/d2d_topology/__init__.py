"""
d2d-topology - topology learning for decentralized federated learning over
unreliable device-to-device links.

This package simulates clients that exchange gradients over erasure channels,
learns a mixing matrix that balances data heterogeneity against link
reliability with Frank-Wolfe over the Birkhoff polytope, and runs
method x degree x seed experiment sweeps.
"""

from .channel import (
    build_success_matrix,
    field_channel_params,
    place_clients,
    round_latency,
    sample_mask,
    success_probability,
    toy_channel_params,
)
from .mixing import birkhoff_decomposition, fully_connected, identity, random_regular, validate
from .objective import aggregates, g_gradient, g_objective, h_hat_k
from .solver import frank_wolfe, lmo
from .discrepancy import h_bar_exact, h_bar_monte_carlo, theorem1_bound, theorem2_bound
from .network import evaluate, local_gradient
from .engine import TrainingRun, masked_aggregate, run_training
from .data import dirichlet_partition, rotation_partition
from .baselines import stl_fw_baseline
from .config_loader import config_from_dict, parse_config
from .sweep import SweepPool, run_sweep
from .checks import run_checks
from .errors import (
    D2DTopologyError,
    ChannelError,
    DegenerateLinkError,
    MixingMatrixError,
    RegularGraphError,
    ObjectiveError,
    ZeroDenominatorError,
    StepsizeError,
    DivergenceError,
    DataError,
    ConfigError,
)
from .models import (
    ChannelParams,
    ExperimentConfig,
    FwConfig,
    ObjectiveParams,
    MixingMatrix,
    PermutationAtom,
    AtomicDecomposition,
    FwResult,
    RepStats,
    RoundRecord,
    SummaryTable,
)

__all__ = [
    # Channel
    "success_probability",
    "build_success_matrix",
    "place_clients",
    "sample_mask",
    "round_latency",
    "field_channel_params",
    "toy_channel_params",
    # Mixing matrices
    "validate",
    "identity",
    "fully_connected",
    "random_regular",
    "birkhoff_decomposition",
    # Topology learning
    "aggregates",
    "h_hat_k",
    "g_objective",
    "g_gradient",
    "lmo",
    "frank_wolfe",
    "stl_fw_baseline",
    # Training
    "local_gradient",
    "evaluate",
    "masked_aggregate",
    "TrainingRun",
    "run_training",
    "h_bar_exact",
    "h_bar_monte_carlo",
    "theorem1_bound",
    "theorem2_bound",
    # Data
    "dirichlet_partition",
    "rotation_partition",
    # Experiments
    "parse_config",
    "config_from_dict",
    "SweepPool",
    "run_sweep",
    "run_checks",
    # Errors
    "D2DTopologyError",
    "ChannelError",
    "DegenerateLinkError",
    "MixingMatrixError",
    "RegularGraphError",
    "ObjectiveError",
    "ZeroDenominatorError",
    "StepsizeError",
    "DivergenceError",
    "DataError",
    "ConfigError",
    # Models
    "ChannelParams",
    "ExperimentConfig",
    "FwConfig",
    "ObjectiveParams",
    "MixingMatrix",
    "PermutationAtom",
    "AtomicDecomposition",
    "FwResult",
    "RepStats",
    "RoundRecord",
    "SummaryTable",
]
