"""
Experiment configuration loading.

A sectioned YAML file is deep-merged over the built-in defaults, unit
suffixes are converted to linear units, and the result is validated into an
ExperimentConfig. Every failure is reported as a ConfigError with the dotted
key path.
"""

import logging
import re
from pathlib import Path
from typing import Any, Callable, Dict, Tuple, Union

import yaml

from .channel import field_channel_params, toy_channel_params
from .constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EXCHANGE_PERIOD,
    DEFAULT_FW_GRID_POINTS,
    DEFAULT_FW_TOL,
    DEFAULT_LAMBDA,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MC_SAMPLES,
)
from .errors import ConfigError
from .models.config import (
    ChannelParams,
    DataConfig,
    DiagnosticsConfig,
    ExperimentConfig,
    FwConfig,
    LoggingConfig,
    ModelConfig,
)
from .utils import dbm_to_watts, db_to_linear, deep_merge_dicts, parse_quantity

logger = logging.getLogger(__name__)

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "experiment": {
        "seed": 0,
        "num_clients": 16,
        "rounds": 300,
        "exchange_period": DEFAULT_EXCHANGE_PERIOD,
        "degree": 2,
        "method": "tolrdul",
        "learning_rate": DEFAULT_LEARNING_RATE,
        "batch_size": DEFAULT_BATCH_SIZE,
        "step_schedule": "constant",
        "relearn_at_start": False,
    },
    "objective": {"lambda": DEFAULT_LAMBDA},
    "channel": {"preset": "toy"},
    "solver": {
        "max_iters": 1,
        "step_rule": "line_search",
        "grid_points": DEFAULT_FW_GRID_POINTS,
        "tol": DEFAULT_FW_TOL,
    },
    "model": {"hidden_dim": 16, "rep_dim": 4},
    "data": {
        "dataset": "digits",
        "partition": "dirichlet",
        "dirichlet_alpha": 0.1,
        "test_fraction": 0.2,
        "synthetic_dim": 64,
        "synthetic_classes": 10,
        "synthetic_examples": 2000,
        "synthetic_separation": 3.0,
        "idx_train_images": None,
        "idx_train_labels": None,
        "idx_test_images": None,
        "idx_test_labels": None,
    },
    "diagnostics": {"h_bar": False, "mc_samples": DEFAULT_MC_SAMPLES, "g_value": False},
    "logging": {"level": "INFO", "log_dir": "logs"},
}

# channel key -> (ChannelParams field, converter)
_CHANNEL_KEYS: Dict[str, Tuple[str, Callable[[Any], float]]] = {
    "tx_power_dbm": ("tx_power", lambda v: dbm_to_watts(_number(v))),
    "tx_power_w": ("tx_power", lambda v: _number(v)),
    "tx_power": ("tx_power", lambda v: parse_quantity(v, "power")),
    "noise_power_dbm": ("noise_power", lambda v: dbm_to_watts(_number(v))),
    "noise_power_w": ("noise_power", lambda v: _number(v)),
    "noise_power": ("noise_power", lambda v: parse_quantity(v, "power")),
    "decode_threshold_db": ("decode_threshold", lambda v: db_to_linear(_number(v))),
    "decode_threshold": ("decode_threshold", lambda v: parse_quantity(v, "ratio")),
    "bandwidth_hz": ("bandwidth", lambda v: _number(v)),
    "bandwidth": ("bandwidth", lambda v: parse_quantity(v, "frequency")),
    "package_bits": ("package_bits", lambda v: _number(v)),
    "package_size": ("package_bits", lambda v: parse_quantity(v, "size")),
    "region_side_m": ("region_side", lambda v: _number(v)),
    "region_side": ("region_side", lambda v: parse_quantity(v, "length")),
}

_CHANNEL_PRESETS = {"toy": toy_channel_params, "field": field_channel_params}
_OPTIONAL_KEYS = {"idx_train_images", "idx_train_labels", "idx_test_images", "idx_test_labels"}


def _number(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected a number, got {value!r}")
    return float(value)


def _expect(value: Any, kind: type, path: str) -> Any:
    """Type-check one scalar; ints are accepted where floats are expected."""
    if value is None and path.split(".")[-1] in _OPTIONAL_KEYS:
        return None
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected a boolean, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(path, f"expected a string, got {value!r}")
    return value


def _check_keys(section: str, values: Dict[str, Any], allowed) -> None:
    for key in values:
        if key not in allowed:
            raise ConfigError(f"{section}.{key}", "unknown key")


def _typed_section(section: str, values: Dict[str, Any], types: Dict[str, type]) -> Dict[str, Any]:
    _check_keys(section, values, types)
    return {key: _expect(values[key], types[key], f"{section}.{key}") for key in values}


def _error_path(section: str, factory: Callable[..., Any], message: str) -> str:
    """Dotted path of the first field named in a validation message."""
    fields = getattr(factory, "__dataclass_fields__", {})
    for word in re.findall(r"[a-z_]+", message):
        if word == "lambda":
            return "objective.lambda"
        if word in fields:
            return f"{section}.{word}"
    return section


def _build(section: str, factory: Callable[..., Any], **kwargs: Any) -> Any:
    """Construct a config dataclass, mapping its ValueError to a key path."""
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise ConfigError(_error_path(section, factory, str(exc)), str(exc)) from exc


def _channel(values: Dict[str, Any]) -> ChannelParams:
    allowed = set(_CHANNEL_KEYS) | {"preset"}
    _check_keys("channel", values, allowed)
    preset = values.get("preset", "toy")
    if preset not in _CHANNEL_PRESETS:
        raise ConfigError("channel.preset", f"must be one of {sorted(_CHANNEL_PRESETS)}, got {preset!r}")
    base = _CHANNEL_PRESETS[preset]()
    fields: Dict[str, float] = {}
    sources: Dict[str, str] = {}
    for key, raw in values.items():
        if key == "preset":
            continue
        field_name, convert = _CHANNEL_KEYS[key]
        if field_name in sources:
            raise ConfigError(f"channel.{key}", f"conflicts with channel.{sources[field_name]}")
        try:
            fields[field_name] = convert(raw)
        except ValueError as exc:
            raise ConfigError(f"channel.{key}", str(exc)) from exc
        sources[field_name] = key
    merged = {name: getattr(base, name) for name in ChannelParams.__dataclass_fields__}
    merged.update(fields)
    return _build("channel", ChannelParams, **merged)


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    """Validate a parsed config mapping (sections over defaults) into an ExperimentConfig."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping of sections")
    for section, values in data.items():
        if section not in DEFAULT_CONFIG:
            raise ConfigError(section, "unknown section")
        if values is not None and not isinstance(values, dict):
            raise ConfigError(section, "section must be a mapping")

    user = {section: values or {} for section, values in data.items()}
    channel = _channel(user.get("channel", {}))
    user.pop("channel", None)
    merged = deep_merge_dicts({k: v for k, v in DEFAULT_CONFIG.items() if k != "channel"}, user)

    experiment = _typed_section("experiment", merged["experiment"], {
        "seed": int, "num_clients": int, "rounds": int, "exchange_period": int, "degree": int,
        "method": str, "learning_rate": float, "batch_size": int, "step_schedule": str,
        "relearn_at_start": bool,
    })
    objective = _typed_section("objective", merged["objective"], {"lambda": float})
    solver = _typed_section("solver", merged["solver"], {
        "max_iters": int, "step_rule": str, "grid_points": int, "tol": float,
    })
    model = _typed_section("model", merged["model"], {"hidden_dim": int, "rep_dim": int})
    data_section = _typed_section("data", merged["data"], {
        "dataset": str, "partition": str, "dirichlet_alpha": float, "test_fraction": float,
        "synthetic_dim": int, "synthetic_classes": int, "synthetic_examples": int,
        "synthetic_separation": float, "idx_train_images": str, "idx_train_labels": str,
        "idx_test_images": str, "idx_test_labels": str,
    })
    diagnostics = _typed_section("diagnostics", merged["diagnostics"], {
        "h_bar": bool, "mc_samples": int, "g_value": bool,
    })
    logging_section = _typed_section("logging", merged["logging"], {"level": str, "log_dir": str})

    return _build(
        "experiment",
        ExperimentConfig,
        **experiment,
        lam=objective["lambda"],
        channel=channel,
        solver=_build("solver", FwConfig, **solver),
        model=_build("model", ModelConfig, **model),
        data=_build("data", DataConfig, **data_section),
        diagnostics=_build("diagnostics", DiagnosticsConfig, **diagnostics),
        logging=_build("logging", LoggingConfig, **logging_section),
    )


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load and validate an experiment config file.

    Raises:
        ConfigError: On a missing or unreadable file, malformed YAML, unknown
            keys, type mismatches or constraint violations
    """
    path = Path(path)
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"malformed YAML: {exc}") from exc

    cfg = config_from_dict(data)
    logger.debug(f"Loaded config {path}: method={cfg.method}, N={cfg.num_clients}, T={cfg.rounds}")
    return cfg
