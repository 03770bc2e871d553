# -*- coding: utf-8 -*-
"""
Shared fixtures and utilities for testing the d2d-topology simulator.
"""

import numpy as np
import pytest

from d2d_topology.models import (
    ChannelParams,
    DataConfig,
    DiagnosticsConfig,
    ExperimentConfig,
    ModelConfig,
    ObjectiveParams,
    RepStats,
    SuccessMatrix,
)


# Randomness
@pytest.fixture
def rng() -> np.random.Generator:
    """Fresh generator with a fixed seed."""
    return np.random.default_rng(12345)


# Channel fixtures
@pytest.fixture
def hand_channel() -> ChannelParams:
    """gamma=1, sigma^2=0.1, P=1: distance 2 gives exp(-0.4)."""
    return ChannelParams(
        tx_power=1.0,
        noise_power=0.1,
        decode_threshold=1.0,
        bandwidth=1e6,
        package_bits=1e6,
        region_side=10.0,
    )


@pytest.fixture
def three_client_success() -> SuccessMatrix:
    """Symmetric success matrix of three clients with unit diagonal."""
    return SuccessMatrix(p=np.array([
        [1.0, 0.9, 0.6],
        [0.9, 1.0, 0.8],
        [0.6, 0.8, 1.0],
    ]))


# Topology-objective fixtures
@pytest.fixture
def hand_stats() -> RepStats:
    """Two clients, one dimension: mu=(0, 2), sigma=(1, 1)."""
    return RepStats(mu=np.array([[0.0], [2.0]]), sigma=np.array([[1.0], [1.0]]))


@pytest.fixture
def random_stats() -> RepStats:
    """Four clients, three representation dimensions."""
    gen = np.random.default_rng(7)
    return RepStats(mu=gen.normal(size=(4, 3)), sigma=gen.uniform(0.5, 1.5, size=(4, 3)))


@pytest.fixture
def objective_params() -> ObjectiveParams:
    """Small objective weights for four-client instances."""
    return ObjectiveParams(lam=0.01, model_dim=30, rep_dim=3)


# Experiment fixtures
@pytest.fixture
def tiny_config() -> ExperimentConfig:
    """Four clients on synthetic 4x4 data for a few rounds."""
    return ExperimentConfig(
        seed=3,
        num_clients=4,
        rounds=3,
        exchange_period=1,
        degree=2,
        method="tolrdul",
        learning_rate=0.1,
        batch_size=16,
        data=DataConfig(
            dataset="synthetic",
            partition="dirichlet",
            dirichlet_alpha=0.5,
            synthetic_dim=16,
            synthetic_classes=3,
            synthetic_examples=240,
        ),
        model=ModelConfig(hidden_dim=8, rep_dim=2),
        diagnostics=DiagnosticsConfig(h_bar=False, mc_samples=2, g_value=False),
    )


@pytest.fixture
def minimal_yaml(tmp_path):
    """Config file with a tiny synthetic experiment."""
    path = tmp_path / "config.yml"
    path.write_text(
        "experiment:\n"
        "  seed: 1\n"
        "  num_clients: 4\n"
        "  rounds: 2\n"
        "  exchange_period: 1\n"
        "  degree: 2\n"
        "  batch_size: 16\n"
        "data:\n"
        "  dataset: synthetic\n"
        "  dirichlet_alpha: 0.5\n"
        "  synthetic_dim: 16\n"
        "  synthetic_classes: 3\n"
        "  synthetic_examples: 200\n"
        "model:\n"
        "  hidden_dim: 8\n"
        "  rep_dim: 2\n"
        "logging:\n"
        f"  log_dir: \"{tmp_path / 'logs'}\"\n"
    )
    return path

