"""
Data models for the d2d-topology simulator.

This package contains the immutable data structures shared by the channel,
topology, learning and experiment layers.
"""

from .config import (
    ChannelParams,
    ObjectiveParams,
    FwConfig,
    ModelConfig,
    DataConfig,
    DiagnosticsConfig,
    LoggingConfig,
    ExperimentConfig,
)
from .channel import Placement, SuccessMatrix, FadingDraw, Mask
from .topology import MixingMatrix, PermutationAtom, AtomicDecomposition, FwResult
from .learning import (
    RepStats,
    ModelLayout,
    LayerParams,
    ClientModel,
    GradientBundle,
    Dataset,
    DatasetSplits,
    Partition,
)
from .records import RoundRecord, CellKey, CellResult, RunSummary, SummaryRow, SummaryTable

__all__ = [
    # Configuration
    "ChannelParams",
    "ObjectiveParams",
    "FwConfig",
    "ModelConfig",
    "DataConfig",
    "DiagnosticsConfig",
    "LoggingConfig",
    "ExperimentConfig",
    # Channel
    "Placement",
    "SuccessMatrix",
    "FadingDraw",
    "Mask",
    # Topology
    "MixingMatrix",
    "PermutationAtom",
    "AtomicDecomposition",
    "FwResult",
    # Learning
    "RepStats",
    "ModelLayout",
    "LayerParams",
    "ClientModel",
    "GradientBundle",
    "Dataset",
    "DatasetSplits",
    "Partition",
    # Records
    "RoundRecord",
    "CellKey",
    "CellResult",
    "RunSummary",
    "SummaryRow",
    "SummaryTable",
]
