# -*- coding: utf-8 -*-
"""
Tests for Frank-Wolfe over the Birkhoff polytope.
"""

import itertools

import numpy as np
import pytest

from d2d_topology.mixing import birkhoff_decomposition, degree_profile, fully_connected, identity, validate
from d2d_topology.models import (
    AtomicDecomposition,
    FwConfig,
    ObjectiveParams,
    PermutationAtom,
    RepStats,
    SuccessMatrix,
)
from d2d_topology.objective import g_objective
from d2d_topology.solver import (
    frank_wolfe,
    fw_gap,
    line_search,
    lmo,
    minimize_over_birkhoff,
    symmetrize_decomposition,
    symmetrized_result,
)


def brute_force_cost(cost: np.ndarray) -> float:
    n = cost.shape[0]
    return min(sum(cost[i, perm[i]] for i in range(n)) for perm in itertools.permutations(range(n)))


def lossy_success(n: int, seed: int) -> SuccessMatrix:
    gen = np.random.default_rng(seed)
    p = gen.uniform(0.5, 0.99, size=(n, n))
    p = np.minimum(p, p.T)
    np.fill_diagonal(p, 1.0)
    return SuccessMatrix(p=p)


class TestLinearMinimizationOracle:
    """Test the assignment oracle."""

    def test_identity_favoring(self):
        """Test zero diagonal and ones elsewhere pick the identity."""
        assert lmo(1.0 - np.eye(4)).is_identity()

    def test_swap(self):
        """Test [[0, -5], [-5, 0]] picks the swap."""
        assert lmo(np.array([[0.0, -5.0], [-5.0, 0.0]])).perm == (1, 0)

    def test_matches_brute_force(self):
        """Test random integer and real matrices against enumeration."""
        gen = np.random.default_rng(3)
        for _ in range(100):
            n = int(gen.integers(1, 7))
            cost = gen.integers(-5, 6, size=(n, n)).astype(float)
            atom = lmo(cost)
            assert float(np.sum(cost * atom.matrix())) == pytest.approx(brute_force_cost(cost))

    def test_ties_break_lexicographically(self):
        """Test an all-zero gradient returns the identity."""
        assert lmo(np.zeros((5, 5))).is_identity()
        # both (0, 2, 1) and (1, 0, 2) cost 0; the smaller one wins
        cost = np.array([[0.0, 0.0, 9.0], [0.0, 9.0, 0.0], [9.0, 0.0, 0.0]])
        assert lmo(cost).perm == (0, 2, 1)

    def test_non_square(self):
        """Test a non-square gradient raises ValueError."""
        with pytest.raises(ValueError, match="square"):
            lmo(np.zeros((2, 3)))


class TestFwGap:
    """Test the Frank-Wolfe duality gap."""

    def test_atom_itself(self):
        """Test the gap is zero at the LMO atom."""
        atom = PermutationAtom((1, 2, 0))
        assert fw_gap(atom.matrix(), np.arange(9.0).reshape(3, 3), atom) == 0.0

    def test_zero_gradient(self):
        """Test a zero gradient gives zero gap."""
        assert fw_gap(fully_connected(3), np.zeros((3, 3)), PermutationAtom.identity(3)) == 0.0

    def test_hand_case(self):
        """Test gradient identity at uniform 2x2 gives gap 1."""
        gradient = np.eye(2)
        atom = lmo(gradient)
        assert atom.perm == (1, 0)
        assert fw_gap(fully_connected(2), gradient, atom) == pytest.approx(1.0)


class TestLineSearch:
    """Test the grid line search with bounded refinement."""

    def test_interior_minimum(self):
        """Test a quadratic in the step lands on its minimizer, off the grid."""
        direction = PermutationAtom((1, 0)).matrix() - np.eye(2)
        step, value = line_search(
            lambda t: (t[0, 1] - 0.3) ** 2, np.eye(2), direction, np.linspace(0.0, 1.0, 8)
        )
        assert step == pytest.approx(0.3, abs=1e-6)
        assert value == pytest.approx(0.0, abs=1e-10)

    def test_decrease_below_first_grid_point(self):
        """Test a minimum at 0.005 is found although every grid step increases the value."""
        direction = PermutationAtom((1, 0)).matrix() - np.eye(2)
        grid = np.linspace(0.0, 1.0, 64)
        step, value = line_search(lambda t: (t[0, 1] - 0.005) ** 2, np.eye(2), direction, grid)
        assert 0.0 < step < grid[1]
        assert step == pytest.approx(0.005, abs=1e-6)
        assert value < 0.005 ** 2

    def test_no_decrease_returns_zero(self):
        """Test a value increasing along the direction keeps the current point."""
        direction = PermutationAtom((1, 0)).matrix() - np.eye(2)
        step, value = line_search(lambda t: float(t[0, 1]), np.eye(2), direction, np.linspace(0.0, 1.0, 64))
        assert step == 0.0
        assert value == 0.0

    def test_small_steps_keep_frank_wolfe_moving(self):
        """Test one FW iteration takes a step shorter than the grid spacing."""
        cycle = PermutationAtom((1, 2, 0)).matrix()
        theta, _, trace, gaps = minimize_over_birkhoff(
            np.eye(3),
            lambda t: float((t[0, 1] - 0.005) ** 2),
            lambda t: -cycle,
            FwConfig(max_iters=1),
        )
        assert theta[0, 1] == pytest.approx(0.005, abs=1e-6)
        assert trace[-1] < trace[0]
        assert len(gaps) == 1


class TestFrankWolfe:
    """Test the topology solver."""

    def test_iterates_stay_feasible_and_trace_decreases(self, random_stats, objective_params):
        """Test the trace is nonincreasing and the result validates."""
        p = lossy_success(4, 1)
        result = frank_wolfe(identity(4), p, random_stats, objective_params, FwConfig(max_iters=10))
        trace = np.array(result.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12)
        validate(result.theta.theta)
        validate(result.raw_decomposition.reconstruct(), symmetric=False)
        np.testing.assert_allclose(result.decomposition.reconstruct(), result.theta.theta, atol=1e-8)

    def test_identical_clients_reach_uniform_value(self, objective_params):
        """Test identical clients with reliable links do at least as well as the start."""
        stats = RepStats(mu=np.tile([[0.3, -1.0, 2.0]], (4, 1)), sigma=np.ones((4, 3)))
        result = frank_wolfe(identity(4), SuccessMatrix.ones(4), stats, objective_params, FwConfig(max_iters=3))
        assert result.objective_trace[-1] <= result.objective_trace[0]

    def test_single_iteration_is_sparse(self, random_stats, objective_params):
        """Test one step from the identity adds at most one neighbor before symmetrization."""
        p = lossy_success(4, 2)
        result = frank_wolfe(identity(4), p, random_stats, objective_params, FwConfig(max_iters=1))
        assert len(result.raw_decomposition.atoms) <= 2
        assert np.all(degree_profile(result.theta) <= 2)
        assert result.iterations == 1

    def test_hand_case_moves_toward_mixing(self, hand_stats):
        """Test two opposite clients learn to mix from the identity."""
        params = ObjectiveParams(lam=0.001, model_dim=10, rep_dim=1)
        result = frank_wolfe(identity(2), SuccessMatrix.ones(2), hand_stats, params, FwConfig(max_iters=5))
        assert result.theta.theta[0, 1] > 0
        assert result.objective_trace[-1] < 0.25

    def test_classic_step_rule(self, random_stats, objective_params):
        """Test the 2/(t+2) rule takes a full first step onto the LMO atom."""
        p = lossy_success(4, 3)
        result = frank_wolfe(
            identity(4), p, random_stats, objective_params, FwConfig(max_iters=1, step_rule="classic")
        )
        assert len(result.raw_decomposition.atoms) == 1
        assert result.raw_decomposition.weights == (1.0,)

    def test_stops_at_stationary_point(self, objective_params):
        """Test the uniform optimum of identical clients stops on the gap tolerance."""
        stats = RepStats(mu=np.zeros((3, 3)), sigma=np.ones((3, 3)))
        theta, _, trace, gaps = minimize_over_birkhoff(
            fully_connected(3),
            lambda t: g_objective(t, np.ones((3, 3)), stats, objective_params),
            lambda t: np.zeros((3, 3)),
            FwConfig(max_iters=5, tol=1e-9),
        )
        assert len(gaps) == 1
        assert len(trace) == 1
        np.testing.assert_allclose(theta, fully_connected(3).theta)

    def test_line_search_warns_without_decrease(self, caplog):
        """Test an iterate already at the minimum stops with a warning."""
        def value_fn(theta):
            return float(np.sum((theta - np.eye(3)) ** 2))

        def gradient_fn(theta):
            return np.eye(3) - 1.0

        theta, _, trace, gaps = minimize_over_birkhoff(np.eye(3), value_fn, gradient_fn, FwConfig(max_iters=3))
        assert "no decrease" in caplog.text
        np.testing.assert_array_equal(theta, np.eye(3))
        assert trace == [0.0]
        assert len(gaps) == 1


class TestSymmetrization:
    """Test symmetric decompositions."""

    def test_symmetrized_decomposition_reconstructs_average(self):
        """Test splitting atoms into pi and pi^-1 gives (T + T^T) / 2."""
        raw = AtomicDecomposition(
            atoms=(PermutationAtom.identity(3), PermutationAtom((1, 2, 0))),
            weights=(0.6, 0.4),
        )
        raw_theta = raw.reconstruct()
        symmetric = symmetrize_decomposition(raw)
        np.testing.assert_allclose(symmetric.reconstruct(), (raw_theta + raw_theta.T) / 2.0)
        assert sum(symmetric.weights) == pytest.approx(1.0)

    def test_shift_is_recorded(self, random_stats, objective_params):
        """Test the symmetrization shift equals g after minus g before."""
        p = lossy_success(4, 4)
        result = frank_wolfe(identity(4), p, random_stats, objective_params, FwConfig(max_iters=4))
        after = g_objective(result.theta, p, random_stats, objective_params)
        assert result.symmetrization_shift == pytest.approx(after - result.objective_trace[-1])

    def test_degree_cap_prunes_after_symmetrizing(self):
        """Test a fully connected iterate under cap 1 keeps one neighbor per client."""
        raw = fully_connected(4).theta
        result = symmetrized_result(
            raw, birkhoff_decomposition(fully_connected(4)), [0.0], [], lambda t: float(np.trace(t)), degree=1
        )
        validate(result.theta.theta)
        assert np.all(result.theta.active_links().sum(axis=1) <= 1)
        assert result.pruned_links > 0
        np.testing.assert_allclose(result.decomposition.reconstruct(), result.theta.theta, atol=1e-8)
        assert result.symmetrization_shift == pytest.approx(np.trace(result.theta.theta))

    @pytest.mark.parametrize("degree", [1, 3])
    def test_warm_start_respects_odd_degree(self, random_stats, objective_params, degree):
        """Test a run from the uniform matrix ends within an odd cap."""
        p = lossy_success(4, 6)
        result = frank_wolfe(fully_connected(4), p, random_stats, objective_params, FwConfig(max_iters=2), degree)
        validate(result.theta.theta)
        assert np.all(result.theta.active_links().sum(axis=1) <= degree)
        assert result.objective_trace[0] == pytest.approx(
            g_objective(fully_connected(4), p, random_stats, objective_params)
        )
        after = g_objective(result.theta, p, random_stats, objective_params)
        assert result.symmetrization_shift == pytest.approx(after - result.objective_trace[-1])

    def test_to_dict(self, random_stats, objective_params):
        """Test the audit trail serializes."""
        result = frank_wolfe(identity(4), lossy_success(4, 5), random_stats, objective_params, FwConfig(max_iters=2))
        data = result.to_dict()
        assert set(data) == {
            "theta", "decomposition", "raw_decomposition", "objective_trace", "fw_gaps", "symmetrization_shift",
            "pruned_links",
        }
        assert len(data["objective_trace"]) == len(result.objective_trace)
