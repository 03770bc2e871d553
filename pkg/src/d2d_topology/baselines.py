"""
Baseline topologies and the per-method initial topology.

stl_fw_like is a label-only variant of the learned topology: the same
Frank-Wolfe machinery on the squared distance between aggregated and
global label histograms, with every link treated as reliable.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from .constants import METHOD_FULLY_CONNECTED, METHOD_RANDOM_REGULAR, METHOD_STL_FW
from .mixing import fully_connected, identity, random_regular
from .models.config import ExperimentConfig, FwConfig
from .models.topology import FwResult, MixingMatrix
from .solver import minimize_over_birkhoff, symmetrized_result

logger = logging.getLogger(__name__)


def degree_budget(degree: int) -> int:
    """FW iterations for a degree cap r: one new neighbor per iteration, pruned back to r after symmetrization."""
    return max(1, degree)


def label_surrogate(theta: np.ndarray, hist: np.ndarray) -> float:
    """(1/N) sum_i || sum_j theta_ij h_j - h_bar ||^2."""
    residual = theta @ hist - hist.mean(axis=0)
    return float(np.mean(np.sum(residual ** 2, axis=1)))


def label_surrogate_gradient(theta: np.ndarray, hist: np.ndarray) -> np.ndarray:
    n = hist.shape[0]
    residual = theta @ hist - hist.mean(axis=0)
    return 2.0 / n * residual @ hist.T


def stl_fw_result(label_hist: np.ndarray, degree: int, cfg: Optional[FwConfig] = None) -> FwResult:
    """Full Frank-Wolfe audit trail of the label-only topology."""
    hist = np.asarray(label_hist, dtype=float)
    if hist.ndim != 2:
        raise ValueError(f"label histograms must have shape (N, C), got {hist.shape}")
    if np.any(hist < 0) or not np.allclose(hist.sum(axis=1), 1.0):
        raise ValueError("label histogram rows must be non-negative and sum to 1")
    cfg = (cfg or FwConfig()).with_max_iters(degree_budget(degree))
    n = hist.shape[0]

    def value_fn(theta: np.ndarray) -> float:
        return label_surrogate(theta, hist)

    def gradient_fn(theta: np.ndarray) -> np.ndarray:
        return label_surrogate_gradient(theta, hist)

    raw, raw_decomposition, trace, gaps = minimize_over_birkhoff(np.eye(n), value_fn, gradient_fn, cfg)
    return symmetrized_result(raw, raw_decomposition, trace, gaps, value_fn, degree)


def stl_fw_baseline(label_hist: np.ndarray, degree: int, cfg: Optional[FwConfig] = None) -> MixingMatrix:
    """Label-distribution-only learned topology with the same degree cap as the main method."""
    return stl_fw_result(label_hist, degree, cfg).theta


def initial_topology(
    cfg: ExperimentConfig,
    label_hist: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[MixingMatrix, Optional[FwResult]]:
    """
    Topology a run starts from.

    The learned method starts at the identity and relearns during training;
    the baselines fix their topology here for the whole run.
    """
    n = cfg.num_clients
    if cfg.method == METHOD_FULLY_CONNECTED:
        return fully_connected(n), None
    if cfg.method == METHOD_RANDOM_REGULAR:
        return random_regular(n, cfg.degree, rng), None
    if cfg.method == METHOD_STL_FW:
        result = stl_fw_result(label_hist, cfg.degree, cfg.solver)
        logger.info(
            f"stl_fw_like topology: surrogate {result.objective_trace[0]:.4f} -> "
            f"{result.objective_trace[-1]:.4f} after {result.iterations} iteration(s)"
        )
        return result.theta, result
    return identity(n), None
