"""
Configuration models for the d2d-topology simulator.

Immutable configuration structures; every value is validated on creation.
Channel quantities are stored in linear units (watts, ratios, hertz, bits,
meters); dB/dBm conversion happens in config_loader before these are built.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

from ..constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EXCHANGE_PERIOD,
    DEFAULT_FW_GRID_POINTS,
    DEFAULT_FW_TOL,
    DEFAULT_LAMBDA,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MC_SAMPLES,
    METHODS,
    TOY_BANDWIDTH_HZ,
    TOY_DECODE_THRESHOLD,
    TOY_NOISE_POWER_W,
    TOY_PACKAGE_BITS,
    TOY_REGION_SIDE_M,
    TOY_TX_POWER_W,
)

STEP_RULES = ("line_search", "classic")
STEP_SCHEDULES = ("constant", "scaled")
DATASETS = ("digits", "synthetic", "idx")
PARTITIONERS = ("dirichlet", "rotation")


@dataclass(frozen=True)
class ChannelParams:
    """D2D transmission parameters in linear units."""
    tx_power: float = TOY_TX_POWER_W  # watts
    noise_power: float = TOY_NOISE_POWER_W  # watts
    decode_threshold: float = TOY_DECODE_THRESHOLD  # linear SNR
    bandwidth: float = TOY_BANDWIDTH_HZ  # hertz
    package_bits: float = TOY_PACKAGE_BITS
    region_side: float = TOY_REGION_SIDE_M  # meters

    def __post_init__(self):
        """Validate that every field is strictly positive."""
        for name in ("tx_power", "noise_power", "decode_threshold", "bandwidth",
                     "package_bits", "region_side"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"Channel parameter {name} must be positive, got {value}")


@dataclass(frozen=True)
class ObjectiveParams:
    """Weights of the topology-learning objective."""
    lam: float = DEFAULT_LAMBDA
    model_dim: int = 1
    rep_dim: int = 1

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if self.rep_dim < 1:
            raise ValueError(f"rep_dim must be at least 1, got {self.rep_dim}")
        if self.model_dim < self.rep_dim:
            raise ValueError(
                f"model_dim ({self.model_dim}) must be at least rep_dim ({self.rep_dim})"
            )


@dataclass(frozen=True)
class FwConfig:
    """Frank-Wolfe solver settings."""
    max_iters: int = 1
    step_rule: str = "line_search"
    grid_points: int = DEFAULT_FW_GRID_POINTS
    tol: float = DEFAULT_FW_TOL

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}, got {self.step_rule!r}")
        if self.step_rule == "line_search" and self.grid_points < 2:
            raise ValueError(f"grid_points must be at least 2, got {self.grid_points}")
        if self.tol < 0:
            raise ValueError(f"tol must be non-negative, got {self.tol}")

    def with_max_iters(self, max_iters: int) -> "FwConfig":
        return replace(self, max_iters=max_iters)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FwConfig":
        return cls(
            max_iters=int(data.get("max_iters", 1)),
            step_rule=str(data.get("step_rule", "line_search")),
            grid_points=int(data.get("grid_points", DEFAULT_FW_GRID_POINTS)),
            tol=float(data.get("tol", DEFAULT_FW_TOL)),
        )


@dataclass(frozen=True)
class ModelConfig:
    """Hidden sizes of the tiny probabilistic network."""
    hidden_dim: int = 16
    rep_dim: int = 4

    def __post_init__(self):
        if self.hidden_dim < 1 or self.rep_dim < 1:
            raise ValueError("hidden_dim and rep_dim must be at least 1")


@dataclass(frozen=True)
class DataConfig:
    """Dataset and heterogeneity settings."""
    dataset: str = "digits"
    partition: str = "dirichlet"
    dirichlet_alpha: float = 0.1
    test_fraction: float = 0.2
    synthetic_dim: int = 64
    synthetic_classes: int = 10
    synthetic_examples: int = 2000
    synthetic_separation: float = 3.0
    idx_train_images: Optional[str] = None
    idx_train_labels: Optional[str] = None
    idx_test_images: Optional[str] = None
    idx_test_labels: Optional[str] = None

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ValueError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if self.partition not in PARTITIONERS:
            raise ValueError(f"partition must be one of {PARTITIONERS}, got {self.partition!r}")
        if not self.dirichlet_alpha > 0:
            raise ValueError(f"dirichlet_alpha must be positive, got {self.dirichlet_alpha}")
        if not 0 < self.test_fraction < 1:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.synthetic_classes < 2:
            raise ValueError("synthetic_classes must be at least 2")
        if self.dataset == "idx":
            missing = [
                name for name in ("idx_train_images", "idx_train_labels",
                                  "idx_test_images", "idx_test_labels")
                if getattr(self, name) is None
            ]
            if missing:
                raise ValueError(f"idx dataset requires {', '.join(missing)}")


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Optional per-round diagnostics."""
    h_bar: bool = False
    mc_samples: int = DEFAULT_MC_SAMPLES
    g_value: bool = False

    def __post_init__(self):
        if self.mc_samples < 1:
            raise ValueError(f"mc_samples must be at least 1, got {self.mc_samples}")


@dataclass(frozen=True)
class LoggingConfig:
    """Logging configuration."""
    level: str = "INFO"
    log_dir: str = "logs"


@dataclass(frozen=True)
class ExperimentConfig:
    """One DFL experiment: topology method, channel, model, data, schedule."""
    seed: int = 0
    num_clients: int = 16
    rounds: int = 300
    exchange_period: int = DEFAULT_EXCHANGE_PERIOD
    degree: int = 2
    method: str = "tolrdul"
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    step_schedule: str = "constant"
    relearn_at_start: bool = False
    lam: float = DEFAULT_LAMBDA
    channel: ChannelParams = field(default_factory=ChannelParams)
    solver: FwConfig = field(default_factory=FwConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    data: DataConfig = field(default_factory=DataConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    def __post_init__(self):
        """Validate cross-field constraints."""
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.num_clients < 1:
            raise ValueError(f"num_clients must be at least 1, got {self.num_clients}")
        if self.rounds < 1:
            raise ValueError(f"rounds must be at least 1, got {self.rounds}")
        if self.exchange_period < 1:
            raise ValueError(f"exchange_period must be at least 1, got {self.exchange_period}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.method != "fully_connected":
            if self.degree < 1:
                raise ValueError(f"degree must be at least 1, got {self.degree}")
            if self.degree >= self.num_clients:
                raise ValueError(
                    f"degree ({self.degree}) must be below num_clients ({self.num_clients})"
                )
        if self.method == "random_regular" and (self.num_clients * self.degree) % 2:
            raise ValueError(
                f"random_regular requires num_clients * degree even, "
                f"got {self.num_clients} * {self.degree}"
            )
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.step_schedule not in STEP_SCHEDULES:
            raise ValueError(
                f"step_schedule must be one of {STEP_SCHEDULES}, got {self.step_schedule!r}"
            )
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    @property
    def step_size(self) -> float:
        """Per-round learning rate: constant, or eta / sqrt(T) for bound tracking."""
        if self.step_schedule == "scaled":
            return self.learning_rate / self.rounds ** 0.5
        return self.learning_rate

    def with_cell(self, method: str, degree: int, seed: int) -> "ExperimentConfig":
        """Copy of this config for one sweep cell."""
        return replace(self, method=method, degree=degree, seed=seed)
