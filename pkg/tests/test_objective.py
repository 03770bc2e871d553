# -*- coding: utf-8 -*-
"""
Tests for the topology-learning objective and its gradient.
"""

import numpy as np
import pytest

from d2d_topology.errors import ZeroDenominatorError
from d2d_topology.mixing import fully_connected, identity
from d2d_topology.models import ObjectiveParams, RepStats, SuccessMatrix
from d2d_topology.objective import (
    aggregates,
    g_gradient,
    g_objective,
    h_hat_all,
    h_hat_k,
    h_hat_k_textbook,
    variance_penalty,
)

HALF = np.full((2, 2), 0.5)
LOSSY_PAIR = np.array([[1.0, 0.8], [0.8, 1.0]])


def central_difference(fn, theta: np.ndarray, step: float = 1e-6) -> np.ndarray:
    out = np.zeros_like(theta)
    for idx in np.ndindex(theta.shape):
        bump = np.zeros_like(theta)
        bump[idx] = step
        out[idx] = (fn(theta + bump) - fn(theta - bump)) / (2 * step)
    return out


class TestAggregates:
    """Test the per-client aggregation sums."""

    def test_hand_case(self, hand_stats):
        """Test N=2, identity, p=1, client 0 gives (1, 0, 1, 1, 1)."""
        result = aggregates(identity(2), SuccessMatrix.ones(2), hand_stats, 0, 0)
        assert result == pytest.approx((1.0, 0.0, 1.0, 1.0, 1.0))

    def test_uniform_reliable_is_exact(self, random_stats):
        """Test uniform weights with p=1 recover the network averages."""
        for i in range(4):
            for k in range(3):
                mu_bar, mu_tilde, sigma_bar, sigma_tilde, _ = aggregates(
                    fully_connected(4), np.ones((4, 4)), random_stats, i, k
                )
                assert mu_tilde == pytest.approx(mu_bar)
                assert sigma_tilde == pytest.approx(sigma_bar)

    def test_single_term_row(self, random_stats, rng):
        """Test a diagonal-only row aggregates its own sigma."""
        p = rng.uniform(0.5, 1.0, size=(4, 4))
        np.fill_diagonal(p, 1.0)
        _, _, _, sigma_tilde, _ = aggregates(np.eye(4), p, random_stats, 2, 1)
        assert sigma_tilde == pytest.approx(random_stats.sigma[2, 1])

    def test_zero_denominator(self, hand_stats):
        """Test a row of theta * p without mass raises ZeroDenominatorError."""
        with pytest.raises(ZeroDenominatorError) as exc_info:
            aggregates(np.eye(2), np.zeros((2, 2)), hand_stats, 1, 0)
        assert exc_info.value.client == 1
        assert exc_info.value.dim == 0

    def test_shape_mismatch(self, hand_stats):
        """Test inconsistent shapes raise ValueError."""
        with pytest.raises(ValueError, match="disagree"):
            aggregates(np.eye(3), np.ones((3, 3)), hand_stats, 0, 0)


class TestDiscrepancy:
    """Test the closed-form representation discrepancy."""

    def test_hand_case(self, hand_stats):
        """Test N=2, identity, mu=(0, 2), sigma=(1, 1) gives 0.25."""
        assert h_hat_k(identity(2), SuccessMatrix.ones(2), hand_stats, 0) == pytest.approx(0.25, abs=1e-12)

    def test_uniform_reliable_is_zero(self):
        """Test the uniform reliable point is exactly zero for random statistics."""
        gen = np.random.default_rng(0)
        for _ in range(50):
            n, m = int(gen.integers(2, 8)), int(gen.integers(1, 4))
            stats = RepStats(mu=gen.normal(size=(n, m)), sigma=gen.uniform(0.2, 3.0, size=(n, m)))
            values = h_hat_all(fully_connected(n), np.ones((n, n)), stats)
            np.testing.assert_allclose(values, 0.0, atol=1e-12)

    def test_scaling_sigma_keeps_zero(self, random_stats):
        """Test scaling every sigma leaves the uniform reliable value at zero."""
        scaled = RepStats(mu=random_stats.mu, sigma=random_stats.sigma * 3.7)
        assert h_hat_k(fully_connected(4), np.ones((4, 4)), scaled, 2) == pytest.approx(0.0, abs=1e-12)

    def test_dimension_out_of_range(self, hand_stats):
        """Test an invalid dimension raises ValueError."""
        with pytest.raises(ValueError, match="out of range"):
            h_hat_k(identity(2), np.ones((2, 2)), hand_stats, 1)

    def test_zero_denominator_names_dimension(self, random_stats):
        """Test the dimension is attached to the error."""
        with pytest.raises(ZeroDenominatorError) as exc_info:
            h_hat_k(np.eye(4), np.zeros((4, 4)), random_stats, 2)
        assert exc_info.value.dim == 2

    def test_per_dimension_matches_vectorised(self, random_stats, rng):
        """Test h_hat_k agrees with the all-dimension evaluation."""
        theta = 0.5 * np.eye(4) + 0.5 * fully_connected(4).theta
        p = rng.uniform(0.5, 1.0, size=(4, 4))
        np.fill_diagonal(p, 1.0)
        vector = h_hat_all(theta, p, random_stats)
        for k in range(3):
            assert h_hat_k(theta, p, random_stats, k) == pytest.approx(vector[k])

    def test_textbook_form_zero_at_uniform(self, random_stats):
        """Test the textbook KL diagnostic also vanishes at the uniform reliable point."""
        for k in range(3):
            assert h_hat_k_textbook(fully_connected(4), np.ones((4, 4)), random_stats, k) == \
                pytest.approx(0.0, abs=1e-12)

    def test_textbook_form_nonnegative(self, random_stats):
        """Test the textbook KL is a true divergence."""
        assert h_hat_k_textbook(np.eye(4), np.ones((4, 4)), random_stats, 0) >= 0.0


class TestVariancePenalty:
    """Test the link-variance penalty."""

    def test_hand_value(self):
        """Test N=2, d=10, lambda=0.001, theta 0.5, off-diagonal p 0.8 gives 0.0004."""
        params = ObjectiveParams(lam=0.001, model_dim=10, rep_dim=1)
        assert variance_penalty(HALF, LOSSY_PAIR, params) == pytest.approx(0.0004)

    def test_reliable_links_cost_nothing(self, objective_params):
        """Test p=1 and the identity both give zero."""
        assert variance_penalty(fully_connected(4), np.ones((4, 4)), objective_params) == 0.0
        p = np.full((4, 4), 0.3)
        np.fill_diagonal(p, 1.0)
        assert variance_penalty(identity(4), p, objective_params) == 0.0

    def test_penalty_gradient_hand_value(self, hand_stats):
        """Test the penalty contributes 0.0008 to every gradient entry."""
        with_penalty = g_gradient(HALF, LOSSY_PAIR, hand_stats, ObjectiveParams(lam=0.001, model_dim=10, rep_dim=1))
        without = g_gradient(HALF, LOSSY_PAIR, hand_stats, ObjectiveParams(lam=0.0, model_dim=10, rep_dim=1))
        assert with_penalty[0, 1] - without[0, 1] == pytest.approx(0.0008)
        assert with_penalty[0, 0] == pytest.approx(without[0, 0])


class TestObjective:
    """Test g and its analytic gradient."""

    def test_uniform_reliable_is_zero(self, random_stats, objective_params):
        """Test g vanishes at the uniform reliable point."""
        assert g_objective(fully_connected(4), np.ones((4, 4)), random_stats, objective_params) == \
            pytest.approx(0.0, abs=1e-12)

    def test_hand_combination(self, hand_stats):
        """Test g at the identity hand case is 0.25 plus a zero penalty."""
        params = ObjectiveParams(lam=0.001, model_dim=10, rep_dim=1)
        assert g_objective(identity(2), LOSSY_PAIR, hand_stats, params) == pytest.approx(0.25)

    def test_permutation_invariance(self, random_stats, objective_params, rng):
        """Test relabelling clients in theta, p and stats leaves g unchanged."""
        theta = 0.6 * np.eye(4) + 0.4 * fully_connected(4).theta
        p = rng.uniform(0.5, 1.0, size=(4, 4))
        p = np.minimum(p, p.T)
        np.fill_diagonal(p, 1.0)
        order = np.array([2, 0, 3, 1])
        permuted = RepStats(mu=random_stats.mu[order], sigma=random_stats.sigma[order])
        original = g_objective(theta, p, random_stats, objective_params)
        relabelled = g_objective(theta[np.ix_(order, order)], p[np.ix_(order, order)], permuted, objective_params)
        assert relabelled == pytest.approx(original)

    def test_gradient_matches_finite_differences(self, random_stats, objective_params):
        """Test the analytic gradient at random interior points."""
        gen = np.random.default_rng(11)
        for _ in range(5):
            theta = gen.dirichlet(np.ones(4), size=4) * 0.5 + 0.125
            p = gen.uniform(0.4, 1.0, size=(4, 4))
            np.fill_diagonal(p, 1.0)
            analytic = g_gradient(theta, p, random_stats, objective_params)
            numeric = central_difference(lambda t: g_objective(t, p, random_stats, objective_params), theta)
            error = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
            assert error <= 1e-5

    def test_penalty_gradient_vanishes_when_reliable(self, random_stats):
        """Test lambda has no effect on the gradient when p=1."""
        a = g_gradient(fully_connected(4), np.ones((4, 4)), random_stats, ObjectiveParams(0.0, 30, 3))
        b = g_gradient(fully_connected(4), np.ones((4, 4)), random_stats, ObjectiveParams(1.0, 30, 3))
        np.testing.assert_allclose(a, b)
