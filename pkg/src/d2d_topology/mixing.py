"""
Mixing matrices.

Doubly-stochastic / symmetry validation, permutation atoms of the Birkhoff
polytope, Birkhoff-von Neumann decomposition and the baseline topologies
(fully connected, random r-regular).
"""

import json
import logging
from collections import defaultdict
from typing import Dict, List, Set, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .constants import DECOMPOSITION_TOL, DEGREE_TOL, MAX_REGULAR_GRAPH_RETRIES, STOCHASTIC_TOL
from .errors import MixingMatrixError, RegularGraphError
from .models.topology import AtomicDecomposition, MixingMatrix, PermutationAtom

logger = logging.getLogger(__name__)


def validate(theta, tol: float = STOCHASTIC_TOL, symmetric: bool = True) -> MixingMatrix:
    """
    Check that theta is a (symmetric) doubly-stochastic matrix.

    Args:
        theta: Square matrix
        tol: Absolute tolerance on row/column sums and symmetry
        symmetric: Also require theta == theta^T

    Returns:
        The validated MixingMatrix

    Raises:
        ValueError: If theta is not square
        MixingMatrixError: On a negative entry, an entry above 1, a row-sum,
            column-sum or symmetry violation (with offending index and magnitude)
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise ValueError(f"Mixing matrix must be square, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise MixingMatrixError("non_finite", None, float("nan"), "Mixing matrix has non-finite entries")

    if theta.min() < -tol:
        i, j = np.unravel_index(np.argmin(theta), theta.shape)
        raise MixingMatrixError("negative_entry", (int(i), int(j)), float(theta[i, j]))
    if theta.max() > 1.0 + tol:
        i, j = np.unravel_index(np.argmax(theta), theta.shape)
        raise MixingMatrixError("entry_range", (int(i), int(j)), float(theta[i, j]))

    row_err = theta.sum(axis=1) - 1.0
    if np.max(np.abs(row_err)) > tol:
        i = int(np.argmax(np.abs(row_err)))
        raise MixingMatrixError("row_sum", i, float(row_err[i]))
    col_err = theta.sum(axis=0) - 1.0
    if np.max(np.abs(col_err)) > tol:
        j = int(np.argmax(np.abs(col_err)))
        raise MixingMatrixError("column_sum", j, float(col_err[j]))

    if symmetric:
        asym = np.abs(theta - theta.T)
        if asym.max() > tol:
            i, j = np.unravel_index(np.argmax(asym), asym.shape)
            raise MixingMatrixError("asymmetry", (int(i), int(j)), float(asym[i, j]))

    return MixingMatrix(theta=np.clip(theta, 0.0, 1.0))


def identity(n: int) -> MixingMatrix:
    """No communication: every client keeps only its own gradient."""
    if n < 1:
        raise ValueError(f"N must be at least 1, got {n}")
    return MixingMatrix(theta=np.eye(n))


def fully_connected(n: int) -> MixingMatrix:
    """Uniform weights 1/N everywhere."""
    if n < 1:
        raise ValueError(f"N must be at least 1, got {n}")
    return MixingMatrix(theta=np.full((n, n), 1.0 / n))


def _suitable(edges: Set[Tuple[int, int]], leftover: Dict[int, int]) -> bool:
    """Whether some pair of leftover stubs can still form a new edge."""
    if not leftover:
        return True
    nodes = sorted(leftover)
    for a_idx, a in enumerate(nodes):
        for b in nodes[a_idx + 1:]:
            if (a, b) not in edges:
                return True
    return False


def _try_pairing(n: int, r: int, rng: np.random.Generator):
    """
    One attempt of the pairing model with incremental repair of rejected pairs.

    Stubs are shuffled and paired; pairs that would form a self-loop or a
    multi-edge are returned to the pool and re-paired. Returns None when the
    leftover stubs can no longer form any new edge.
    """
    edges: Set[Tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), r)
    while stubs.size:
        leftover: Dict[int, int] = defaultdict(int)
        shuffled = rng.permutation(stubs)
        for s1, s2 in zip(shuffled[0::2], shuffled[1::2]):
            a, b = (int(s1), int(s2)) if s1 < s2 else (int(s2), int(s1))
            if a != b and (a, b) not in edges:
                edges.add((a, b))
            else:
                leftover[a] += 1
                leftover[b] += 1
        if not _suitable(edges, leftover):
            return None
        stubs = np.array([node for node, count in sorted(leftover.items()) for _ in range(count)],
                         dtype=np.int64)
    return edges


def random_regular(n: int, r: int, rng: np.random.Generator) -> MixingMatrix:
    """
    Random simple r-regular graph with weight 1/(r+1) on every edge and self-loop.

    Raises:
        RegularGraphError: If N*r is odd, r >= N, or no graph is found within
            the retry budget
    """
    if r < 0:
        raise RegularGraphError(f"degree must be non-negative, got {r}")
    if r >= n:
        raise RegularGraphError(f"degree {r} must be below N={n}")
    if (n * r) % 2:
        raise RegularGraphError(f"N*r must be even, got N={n}, r={r}")

    adjacency = np.zeros((n, n))
    if r > 0:
        edges = None
        for attempt in range(1, MAX_REGULAR_GRAPH_RETRIES + 1):
            edges = _try_pairing(n, r, rng)
            if edges is not None:
                logger.debug(f"{r}-regular graph on {n} nodes found after {attempt} attempt(s)")
                break
        if edges is None:
            raise RegularGraphError(
                f"No simple {r}-regular graph on {n} nodes after {MAX_REGULAR_GRAPH_RETRIES} attempts"
            )
        for a, b in edges:
            adjacency[a, b] = adjacency[b, a] = 1.0

    theta = (adjacency + np.eye(n)) / (r + 1)
    return validate(theta)


def degree_profile(theta: MixingMatrix, tol: float = DEGREE_TOL) -> np.ndarray:
    """Per-row count of off-diagonal entries above tol."""
    off = np.array(theta.theta > tol)
    np.fill_diagonal(off, False)
    return off.sum(axis=1)


def cap_degree(theta: MixingMatrix, degree: int) -> Tuple[MixingMatrix, int]:
    """
    Prune a symmetric mixing matrix until every client has at most `degree` links.

    While some row has more than `degree` nonzero off-diagonal entries, the
    lightest link (i, j) touching such a row is removed from both directions
    and its weight is moved onto theta_ii and theta_jj. Row sums, column sums
    and symmetry are unchanged.

    Returns:
        The pruned matrix and the number of links removed
    """
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    pruned = np.array(theta.theta, dtype=float)
    off = ~np.eye(pruned.shape[0], dtype=bool)
    removed = 0
    while True:
        links = (pruned != 0) & off
        over = links.sum(axis=1) > degree
        if not over.any():
            break
        candidates = links & (over[:, None] | over[None, :])
        weights = np.where(candidates, pruned, np.inf)
        i, j = np.unravel_index(int(np.argmin(weights)), weights.shape)
        w = pruned[i, j]
        pruned[i, j] = pruned[j, i] = 0.0
        pruned[i, i] += w
        pruned[j, j] += w
        removed += 1
    if removed:
        logger.debug(f"Pruned {removed} link(s) to respect degree {degree}")
    return validate(pruned), removed


def permutation_matrix(atom: PermutationAtom) -> np.ndarray:
    return atom.matrix()


def birkhoff_decomposition(theta: MixingMatrix, tol: float = 1e-12) -> AtomicDecomposition:
    """
    Write a doubly-stochastic matrix as a convex combination of permutations.

    Repeatedly finds a permutation inside the support of the residual with an
    exact assignment solve and removes the largest feasible multiple of it.
    """
    residual = np.array(theta.theta, dtype=float)
    n = residual.shape[0]
    atoms: List[PermutationAtom] = []
    weights: List[float] = []
    for _ in range(n * n):
        if residual.max() <= tol:
            break
        cost = np.where(residual > tol, 0.0, 1.0)
        rows, cols = linear_sum_assignment(cost)
        if cost[rows, cols].sum() > 0:
            break
        weight = float(residual[rows, cols].min())
        residual[rows, cols] -= weight
        atoms.append(PermutationAtom(tuple(int(c) for c in cols)))
        weights.append(weight)

    total = sum(weights)
    if not atoms or abs(total - 1.0) > DECOMPOSITION_TOL:
        raise MixingMatrixError("decomposition", None, 1.0 - total,
                                f"Birkhoff decomposition recovered mass {total:.6f}, expected 1")
    return AtomicDecomposition(atoms=tuple(atoms), weights=tuple(w / total for w in weights))


def to_json(theta: MixingMatrix) -> str:
    """Dense JSON array-of-arrays."""
    return json.dumps(theta.to_list())


def from_json(text: str) -> MixingMatrix:
    """Parse and validate a dense JSON array-of-arrays."""
    return validate(np.asarray(json.loads(text), dtype=float))
