"""
Frank-Wolfe over the Birkhoff polytope.

The linear minimization oracle is an exact minimum-cost assignment, so every
iterate is a convex combination of permutation matrices and each step adds at
most one atom (one neighbor per client). The final iterate is symmetrized.
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .errors import ObjectiveError
from .mixing import birkhoff_decomposition, cap_degree, validate
from .models.channel import SuccessMatrix
from .models.config import FwConfig, ObjectiveParams
from .models.learning import RepStats
from .models.topology import AtomicDecomposition, FwResult, MixingMatrix, PermutationAtom
from .objective import g_gradient, g_objective

logger = logging.getLogger(__name__)

ValueFn = Callable[[np.ndarray], float]
GradientFn = Callable[[np.ndarray], np.ndarray]


def lmo(gradient: np.ndarray, tol: float = 1e-12) -> PermutationAtom:
    """
    Permutation minimizing sum_i gradient[i, pi(i)].

    Ties are broken towards the lexicographically smallest permutation: row by
    row, the smallest column that still admits an optimal completion is fixed.
    """
    cost = np.asarray(gradient, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"gradient must be square, got shape {cost.shape}")
    n = cost.shape[0]

    rows, cols = linear_sum_assignment(cost)
    best = float(cost[rows, cols].sum())
    slack = tol * max(1.0, abs(best))
    perm = [int(c) for c in cols]

    remaining = list(range(n))
    prefix = 0.0
    for i in range(n):
        for c in remaining:
            if c >= perm[i]:
                break
            free = [col for col in remaining if col != c]
            head = prefix + cost[i, c]
            if i + 1 == n:
                if head <= best + slack:
                    perm[i] = c
                    break
                continue
            sub = cost[np.ix_(range(i + 1, n), free)]
            if head + sub.min(axis=1).sum() > best + slack:
                continue
            sub_rows, sub_cols = linear_sum_assignment(sub)
            if head + sub[sub_rows, sub_cols].sum() <= best + slack:
                perm[i] = c
                perm[i + 1:] = [free[j] for j in sub_cols]
                break
        prefix += cost[i, perm[i]]
        remaining.remove(perm[i])

    return PermutationAtom(tuple(perm))


def fw_gap(theta: Union[MixingMatrix, np.ndarray], gradient: np.ndarray, atom: PermutationAtom) -> float:
    """<gradient, theta - atom>; non-negative up to rounding when atom = lmo(gradient)."""
    theta = theta.theta if isinstance(theta, MixingMatrix) else np.asarray(theta, dtype=float)
    return float(np.sum(gradient * (theta - atom.matrix())))


def _initial_atoms(initial: np.ndarray) -> Dict[Tuple[int, ...], float]:
    n = initial.shape[0]
    if np.array_equal(initial, np.eye(n)):
        return {PermutationAtom.identity(n).perm: 1.0}
    decomposition = birkhoff_decomposition(MixingMatrix(theta=initial))
    return {atom.perm: w for atom, w in zip(decomposition.atoms, decomposition.weights)}


def _to_decomposition(atoms: Dict[Tuple[int, ...], float]) -> AtomicDecomposition:
    kept = [(perm, w) for perm, w in atoms.items() if w > 0]
    total = sum(w for _, w in kept)
    return AtomicDecomposition(
        atoms=tuple(PermutationAtom(perm) for perm, _ in kept),
        weights=tuple(w / total for _, w in kept),
    )


def _safe_value(value_fn: ValueFn, theta: np.ndarray) -> float:
    try:
        return float(value_fn(theta))
    except ObjectiveError:
        return float("inf")


def line_search(value_fn: ValueFn, theta: np.ndarray, direction: np.ndarray, grid: np.ndarray) -> Tuple[float, float]:
    """
    Step in [0, 1] along direction minimizing value_fn.

    The best grid point is refined with a bounded scalar search over its two
    neighboring grid cells, so decreases closer to 0 than the first grid point
    are still found. Returns (step, value); step is 0 when nothing decreases.
    """
    def along(step: float) -> float:
        return _safe_value(value_fn, theta + step * direction)

    values = np.array([along(step) for step in grid])
    best = int(np.argmin(values))
    step, value = float(grid[best]), float(values[best])
    lower, upper = float(grid[max(best - 1, 0)]), float(grid[min(best + 1, len(grid) - 1)])
    refined = minimize_scalar(along, bounds=(lower, upper), method="bounded", options={"xatol": 1e-10})
    if refined.success and np.isfinite(refined.fun) and refined.fun < value:
        step, value = float(refined.x), float(refined.fun)
    if not value < values[0]:
        return 0.0, float(values[0])
    return step, value


def minimize_over_birkhoff(
    initial: Union[MixingMatrix, np.ndarray],
    value_fn: ValueFn,
    gradient_fn: GradientFn,
    cfg: FwConfig,
) -> Tuple[np.ndarray, AtomicDecomposition, List[float], List[float]]:
    """
    Generic Frank-Wolfe loop over doubly-stochastic matrices.

    Args:
        initial: Doubly-stochastic starting point
        value_fn: Objective
        gradient_fn: Gradient of the objective
        cfg: Iteration budget, step rule and gap tolerance

    Returns:
        (final iterate, its decomposition, objective trace, FW gaps)
    """
    theta = np.array(initial.theta if isinstance(initial, MixingMatrix) else initial, dtype=float)
    validate(theta, symmetric=False)
    atoms = _initial_atoms(theta)
    trace = [float(value_fn(theta))]
    gaps: List[float] = []
    grid = np.linspace(0.0, 1.0, cfg.grid_points)

    for t in range(cfg.max_iters):
        gradient = gradient_fn(theta)
        atom = lmo(gradient)
        gap = fw_gap(theta, gradient, atom)
        gaps.append(gap)
        if gap <= cfg.tol:
            logger.debug(f"FW stationary at iteration {t}: gap={gap:.3e}")
            break

        direction = atom.matrix() - theta
        if cfg.step_rule == "line_search":
            step, value = line_search(value_fn, theta, direction, grid)
            if step <= 0.0:
                logger.warning(f"FW line search found no decrease at iteration {t} (gap={gap:.3e})")
                break
        else:
            step = 2.0 / (t + 2.0)
            value = None

        theta = theta + step * direction
        for perm in atoms:
            atoms[perm] *= 1.0 - step
        atoms[atom.perm] = atoms.get(atom.perm, 0.0) + step
        validate(theta, symmetric=False)

        if value is None:
            value = float(value_fn(theta))
        trace.append(value)
        logger.debug(f"FW iteration {t}: step={step:.4f}, gap={gap:.3e}, value={value:.6g}")

    return theta, _to_decomposition(atoms), trace, gaps


def symmetrize_decomposition(decomposition: AtomicDecomposition) -> AtomicDecomposition:
    """Split every atom pi into pi and pi^-1 with half the weight; reconstructs (T + T^T) / 2."""
    merged: Dict[Tuple[int, ...], float] = {}
    for atom, weight in zip(decomposition.atoms, decomposition.weights):
        for half in (atom, atom.inverse()):
            merged[half.perm] = merged.get(half.perm, 0.0) + weight / 2.0
    return _to_decomposition(merged)


def symmetrized_result(
    raw_theta: np.ndarray,
    raw_decomposition: AtomicDecomposition,
    trace: List[float],
    gaps: List[float],
    value_fn: ValueFn,
    degree: Optional[int] = None,
) -> FwResult:
    """
    Symmetrize a raw FW iterate and package it with its audit trail.

    With a degree, links are pruned afterwards so no client keeps more than
    degree neighbors; the shift then covers both steps.
    """
    theta = validate((raw_theta + raw_theta.T) / 2.0)
    decomposition = symmetrize_decomposition(raw_decomposition)
    pruned = 0
    if degree is not None:
        theta, pruned = cap_degree(theta, degree)
        if pruned:
            decomposition = birkhoff_decomposition(theta)
    shift = _safe_value(value_fn, theta.theta) - trace[-1]
    return FwResult(
        theta=theta,
        decomposition=decomposition,
        raw_decomposition=raw_decomposition,
        objective_trace=tuple(trace),
        fw_gaps=tuple(gaps),
        symmetrization_shift=shift,
        pruned_links=pruned,
    )


def frank_wolfe(
    initial: MixingMatrix,
    p: SuccessMatrix,
    stats: RepStats,
    obj: ObjectiveParams,
    cfg: FwConfig,
    degree: Optional[int] = None,
) -> FwResult:
    """Minimize g over the Birkhoff polytope starting from initial, then symmetrize and cap the degree."""
    def value_fn(theta: np.ndarray) -> float:
        return g_objective(theta, p, stats, obj)

    def gradient_fn(theta: np.ndarray) -> np.ndarray:
        return g_gradient(theta, p, stats, obj)

    raw_theta, raw_decomposition, trace, gaps = minimize_over_birkhoff(initial, value_fn, gradient_fn, cfg)
    result = symmetrized_result(raw_theta, raw_decomposition, trace, gaps, value_fn, degree)
    logger.debug(
        f"FW finished after {result.iterations} iteration(s): "
        f"g {trace[0]:.6g} -> {trace[-1]:.6g}, symmetrization shift {result.symmetrization_shift:.3e}, "
        f"{result.pruned_links} link(s) pruned"
    )
    return result
