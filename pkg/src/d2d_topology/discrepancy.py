"""
Unreliable links-aware neighborhood discrepancy and convergence bounds.

H_bar = (1/N) sum_i E || sum_j theta_ij g_j * m_ij - g_bar ||^2, with m_ij
independent Bernoulli(p_ij) masks per component and self-masks all ones.
"""

import math
from typing import Tuple, Union

import numpy as np

from .channel import sample_round_masks
from .errors import StepsizeError
from .models.channel import SuccessMatrix
from .models.learning import GradientBundle
from .objective import MatrixLike, as_matrix

GradientsLike = Union[GradientBundle, np.ndarray]


def _grads(grads: GradientsLike) -> np.ndarray:
    if isinstance(grads, GradientBundle):
        return grads.grads
    return np.asarray(grads, dtype=float)


def _link_success(p: MatrixLike) -> np.ndarray:
    """Success probabilities with reliable self-links."""
    p = np.array(as_matrix(p), dtype=float)
    np.fill_diagonal(p, 1.0)
    return p


def _mean_term(theta: np.ndarray, p: np.ndarray, g: np.ndarray) -> float:
    """(1/N) sum_i || sum_j theta_ij p_ij g_j - g_bar ||^2."""
    g_bar = g.mean(axis=0)
    return float(np.mean(np.sum(((theta * p) @ g - g_bar) ** 2, axis=1)))


def _mask_variance(theta: np.ndarray, p: np.ndarray) -> np.ndarray:
    return theta ** 2 * p * (1.0 - p)


def h_bar_exact(theta: MatrixLike, p: MatrixLike, grads: GradientsLike) -> float:
    """Closed-form expectation of H_bar over independent Bernoulli masks."""
    theta, p, g = as_matrix(theta), _link_success(p), _grads(grads)
    variance = float(np.mean(_mask_variance(theta, p) @ np.sum(g ** 2, axis=1)))
    return _mean_term(theta, p, g) + variance


def h_bar_monte_carlo(
    theta: MatrixLike,
    p: SuccessMatrix,
    grads: GradientsLike,
    samples: int,
    rng: np.random.Generator,
) -> Tuple[float, float]:
    """
    Monte-Carlo estimate of H_bar over fresh mask draws.

    Returns:
        (estimate, standard error); the standard error is 0 for a single sample
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    theta, g = as_matrix(theta), _grads(grads)
    success = p if isinstance(p, SuccessMatrix) else SuccessMatrix(p=_link_success(p))
    g_bar = g.mean(axis=0)
    values = np.empty(samples)
    for s in range(samples):
        masks = sample_round_masks(success, g.shape[1], rng)
        aggregated = np.einsum("ij,ijk,jk->ik", theta, masks, g)
        values[s] = np.mean(np.sum((aggregated - g_bar) ** 2, axis=1))
    if samples == 1:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples))


def neighborhood_discrepancy_terms(theta: MatrixLike, p: MatrixLike, grads: GradientsLike) -> Tuple[float, float]:
    """
    Split of H_bar into the reliable neighborhood discrepancy and the outage term.

    reliable = (1/N) sum_i || g_bar - sum_j theta_ij g_j ||^2
    outage   = (1/N) sum_i E || sum_j theta_ij g_j * (m_ij - 1) ||^2
    """
    theta, p, g = as_matrix(theta), _link_success(p), _grads(grads)
    reliable = _mean_term(theta, np.ones_like(p), g)
    bias = (theta * (p - 1.0)) @ g
    outage = float(np.mean(np.sum(bias ** 2, axis=1) + _mask_variance(theta, p) @ np.sum(g ** 2, axis=1)))
    return reliable, outage


def gradient_norm_bound(grads: GradientsLike) -> float:
    """Empirical L: the largest gradient norm."""
    return float(np.max(np.linalg.norm(_grads(grads), axis=1)))


def theorem2_bound(theta: MatrixLike, p: MatrixLike, grads: GradientsLike, lipschitz: float) -> float:
    """Mean term plus (d L^2 / N) sum_ij theta_ij^2 p_ij (1 - p_ij)."""
    theta, p, g = as_matrix(theta), _link_success(p), _grads(grads)
    n, d = g.shape
    return _mean_term(theta, p, g) + d * lipschitz ** 2 / n * float(np.sum(_mask_variance(theta, p)))


def theorem1_bound(
    f0: float,
    f_star: float,
    beta: float,
    xi: float,
    tau: float,
    eta: float,
    rounds: int,
) -> float:
    """
    Bound on the average squared gradient norm of the averaged model after T rounds.

    Raises:
        StepsizeError: If sqrt(T) <= beta * eta
    """
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if rounds < 1:
        raise ValueError(f"rounds must be at least 1, got {rounds}")
    root = math.sqrt(rounds)
    slack = root - beta * eta
    if slack <= 0:
        raise StepsizeError(f"sqrt(T)={root:.4f} must exceed beta*eta={beta * eta:.4f}")
    ratio = (beta * eta + root) / slack
    return (
        2.0 * (f0 - f_star) / (eta * slack)
        + ratio * xi ** 2
        + (1.0 + beta ** 2 * eta ** 2) * ratio * tau
    )
