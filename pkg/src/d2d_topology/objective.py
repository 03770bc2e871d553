"""
Topology-learning objective.

g(theta) = sum_k h_hat_k(theta) + (d * lambda / N) * sum_ij theta_ij^2 p_ij (1 - p_ij)

h_hat_k is the per-dimension closed-form representation discrepancy between
the reliability-weighted neighborhood aggregate of every client and the
network-wide average. It is evaluated exactly as written, with the log term
on aggregated standard deviations and the quadratic terms on the aggregated
variance denominator; it can be negative.

Functions accept MixingMatrix/SuccessMatrix or plain arrays, so the solver
can evaluate unvalidated iterates.
"""

from typing import Tuple, Union

import numpy as np

from .errors import ZeroDenominatorError
from .models.channel import SuccessMatrix
from .models.config import ObjectiveParams
from .models.learning import RepStats
from .models.topology import MixingMatrix

MatrixLike = Union[MixingMatrix, SuccessMatrix, np.ndarray]


def as_matrix(value: MatrixLike) -> np.ndarray:
    if isinstance(value, MixingMatrix):
        return value.theta
    if isinstance(value, SuccessMatrix):
        return value.p
    return np.asarray(value, dtype=float)


def _check_shapes(theta: np.ndarray, p: np.ndarray, stats: RepStats) -> None:
    if theta.shape != p.shape or theta.shape != (stats.num_clients, stats.num_clients):
        raise ValueError(
            f"theta {theta.shape}, p {p.shape} and stats for {stats.num_clients} clients disagree"
        )


def _check_denominators(denom: np.ndarray, dims: np.ndarray) -> None:
    bad = np.argwhere(~(denom > 0))
    if bad.size:
        i, col = bad[0]
        raise ZeroDenominatorError(int(i), int(dims[col]))


def _weighted_moments(theta: np.ndarray, p: np.ndarray, mu: np.ndarray, sigma: np.ndarray):
    """Aggregated mean, aggregated std and variance denominator, each (N, m)."""
    reliable = theta * p
    mu_tilde = reliable @ mu
    sigma_tilde = reliable @ sigma
    denom = (reliable ** 2) @ (sigma ** 2)
    return mu_tilde, sigma_tilde, denom


def aggregates(
    theta: MatrixLike,
    p: MatrixLike,
    stats: RepStats,
    i: int,
    k: int,
) -> Tuple[float, float, float, float, float]:
    """
    (mu_bar, mu_tilde_i, sigma_bar, sigma_tilde_i, denom_i) for client i, dimension k.

    Raises:
        ZeroDenominatorError: If row i of theta * p carries no mass
    """
    theta, p = as_matrix(theta), as_matrix(p)
    _check_shapes(theta, p, stats)
    weights = theta[i] * p[i]
    mu, sigma = stats.mu[:, k], stats.sigma[:, k]
    denom = float(np.sum(weights ** 2 * sigma ** 2))
    if not denom > 0:
        raise ZeroDenominatorError(i, k)
    return (
        float(mu.mean()),
        float(weights @ mu),
        float(sigma.mean()),
        float(weights @ sigma),
        denom,
    )


def h_hat_all(theta: MatrixLike, p: MatrixLike, stats: RepStats) -> np.ndarray:
    """h_hat_k for every representation dimension, shape (m,)."""
    theta, p = as_matrix(theta), as_matrix(p)
    _check_shapes(theta, p, stats)
    n = stats.num_clients
    mu, sigma = stats.mu, stats.sigma

    mu_tilde, sigma_tilde, denom = _weighted_moments(theta, p, mu, sigma)
    _check_denominators(denom, np.arange(stats.rep_dim))

    mu_bar = mu.mean(axis=0)
    sigma_bar = sigma.mean(axis=0)
    spread = (sigma ** 2).sum(axis=0) / n ** 2

    terms = (
        np.log(sigma_tilde / sigma_bar)
        + spread / (2.0 * denom)
        + (mu_bar - mu_tilde) ** 2 / (2.0 * denom)
        - 0.5
    )
    return terms.mean(axis=0)


def h_hat_k(theta: MatrixLike, p: MatrixLike, stats: RepStats, k: int) -> float:
    """Closed-form representation discrepancy of dimension k."""
    if not 0 <= k < stats.rep_dim:
        raise ValueError(f"dimension {k} out of range [0, {stats.rep_dim})")
    sliced = RepStats(mu=stats.mu[:, k:k + 1], sigma=stats.sigma[:, k:k + 1])
    theta, p = as_matrix(theta), as_matrix(p)
    try:
        return float(h_hat_all(theta, p, sliced)[0])
    except ZeroDenominatorError as exc:
        raise ZeroDenominatorError(exc.client, k) from None


def h_hat_k_textbook(theta: MatrixLike, p: MatrixLike, stats: RepStats, k: int) -> float:
    """
    Diagnostic: textbook Gaussian KL averaged over clients.

    KL(N(mu_tilde_i, denom_i) || N(mu_bar, sum_j sigma_j^2 / N^2)), i.e. the
    same quantities with variances used consistently in every term. Not used
    by the optimizer.
    """
    theta, p = as_matrix(theta), as_matrix(p)
    _check_shapes(theta, p, stats)
    n = stats.num_clients
    mu, sigma = stats.mu[:, k:k + 1], stats.sigma[:, k:k + 1]
    mu_tilde, _, denom = _weighted_moments(theta, p, mu, sigma)
    _check_denominators(denom, np.array([k]))

    mu_bar = mu.mean()
    var_bar = float((sigma ** 2).sum()) / n ** 2
    kl = (
        0.5 * np.log(var_bar / denom)
        + (denom + (mu_tilde - mu_bar) ** 2) / (2.0 * var_bar)
        - 0.5
    )
    return float(kl.mean())


def variance_penalty(theta: MatrixLike, p: MatrixLike, params: ObjectiveParams) -> float:
    """(d * lambda / N) * sum_ij theta_ij^2 p_ij (1 - p_ij)."""
    theta, p = as_matrix(theta), as_matrix(p)
    n = theta.shape[0]
    return float(params.model_dim * params.lam / n * np.sum(theta ** 2 * p * (1.0 - p)))


def g_objective(theta: MatrixLike, p: MatrixLike, stats: RepStats, params: ObjectiveParams) -> float:
    """Sum of h_hat_k over dimensions plus the link-variance penalty."""
    return float(h_hat_all(theta, p, stats).sum()) + variance_penalty(theta, p, params)


def g_gradient(theta: MatrixLike, p: MatrixLike, stats: RepStats, params: ObjectiveParams) -> np.ndarray:
    """
    Analytic gradient of g with respect to every theta_ij, shape (N, N).

    Per dimension, with a_ij = theta_ij p_ij:
        d sigma_tilde_i / d theta_ij = p_ij sigma_j
        d mu_tilde_i    / d theta_ij = p_ij mu_j
        d denom_i       / d theta_ij = 2 theta_ij p_ij^2 sigma_j^2
    """
    theta, p = as_matrix(theta), as_matrix(p)
    _check_shapes(theta, p, stats)
    n = stats.num_clients
    mu, sigma = stats.mu, stats.sigma

    mu_tilde, sigma_tilde, denom = _weighted_moments(theta, p, mu, sigma)
    _check_denominators(denom, np.arange(stats.rep_dim))

    mu_bar = mu.mean(axis=0)
    spread = (sigma ** 2).sum(axis=0) / n ** 2
    gap = mu_bar - mu_tilde  # (N, m)
    numerator = spread + gap ** 2

    log_part = p * ((1.0 / sigma_tilde) @ sigma.T)
    mean_part = p * ((gap / denom) @ mu.T)
    denom_part = theta * p ** 2 * ((numerator / denom ** 2) @ (sigma ** 2).T)
    grad = (log_part - mean_part - denom_part) / n

    grad += 2.0 * params.model_dim * params.lam / n * theta * p * (1.0 - p)
    return grad
