"""
Invariant and oracle suite on tiny instances.

Every check builds its own random instances from a named stream and compares
an implementation against an independent oracle: closed forms, brute-force
enumeration, finite differences or random sampling.
"""

import itertools
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from .channel import mask_variance_enumerated, mask_variance_exact
from .discrepancy import gradient_norm_bound, h_bar_exact, h_bar_monte_carlo, theorem1_bound, theorem2_bound
from .errors import MixingMatrixError
from .mixing import fully_connected, validate
from .models.channel import SuccessMatrix
from .models.config import FwConfig, ObjectiveParams
from .models.learning import ClientModel, Dataset, ModelLayout, RepStats
from .models.topology import MixingMatrix, PermutationAtom
from .network import batch_loss, init_model, local_gradient
from .objective import g_gradient, g_objective, h_hat_k
from .rng import StreamFactory
from .solver import frank_wolfe, lmo

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check."""
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def random_doubly_stochastic(n: int, rng: np.random.Generator, atoms: int = 4) -> np.ndarray:
    """Random convex combination of permutation matrices."""
    weights = rng.dirichlet(np.ones(atoms))
    out = np.zeros((n, n))
    for w in weights:
        out[np.arange(n), rng.permutation(n)] += w
    return out


def random_symmetric_mixing(n: int, rng: np.random.Generator) -> np.ndarray:
    theta = random_doubly_stochastic(n, rng)
    return (theta + theta.T) / 2.0


def random_success(n: int, rng: np.random.Generator, low: float = 0.3, high: float = 0.99) -> np.ndarray:
    p = rng.uniform(low, high, size=(n, n))
    p = np.minimum(p, p.T)
    np.fill_diagonal(p, 1.0)
    return p


def random_stats(n: int, m: int, rng: np.random.Generator) -> RepStats:
    return RepStats(mu=rng.normal(size=(n, m)), sigma=rng.uniform(0.5, 1.5, size=(n, m)))


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-12)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / scale


def check_mask_variance(streams: StreamFactory) -> Tuple[bool, str]:
    worst = 0.0
    for p, d in itertools.product((0.1, 0.5, 0.9), (1, 4, 16)):
        rng = streams.stream("check-mask", int(p * 10), d)
        draws = 100_000
        bits = (rng.random((draws, d)) < p).astype(float)
        values = np.sum((p - bits) ** 2, axis=1)
        err = values.std(ddof=1) / math.sqrt(draws)
        z = abs(values.mean() - mask_variance_exact(p, d)) / max(err, 1e-15)
        worst = max(worst, z)
        if z > 3.0:
            return False, f"p={p}, d={d}: MC mean off by {z:.2f} standard errors"
        if d <= 4 and not math.isclose(mask_variance_enumerated(p, d), mask_variance_exact(p, d), rel_tol=1e-12):
            return False, f"p={p}, d={d}: enumeration disagrees with d p (1 - p)"
    return True, f"9 (p, d) pairs, worst deviation {worst:.2f} standard errors"


def check_theorem2(streams: StreamFactory) -> Tuple[bool, str]:
    violations = 0
    for k in range(100):
        rng = streams.stream("check-theorem2", k)
        n, d = int(rng.integers(2, 6)), int(rng.integers(1, 9))
        theta = random_symmetric_mixing(n, rng)
        p = random_success(n, rng, 0.05, 1.0)
        grads = rng.normal(size=(n, d))
        if h_bar_exact(theta, p, grads) > theorem2_bound(theta, p, grads, gradient_norm_bound(grads)) + 1e-12:
            violations += 1
    return violations == 0, f"100 instances, {violations} violation(s)"


def check_monte_carlo_agreement(streams: StreamFactory) -> Tuple[bool, str]:
    worst = 0.0
    for k in range(20):
        rng = streams.stream("check-h-bar", k)
        n, d = int(rng.integers(2, 5)), int(rng.integers(1, 5))
        theta = random_symmetric_mixing(n, rng)
        p = SuccessMatrix(p=random_success(n, rng))
        grads = rng.normal(size=(n, d))
        estimate, err = h_bar_monte_carlo(theta, p, grads, 10_000, rng)
        z = abs(estimate - h_bar_exact(theta, p, grads)) / max(err, 1e-15)
        worst = max(worst, z)
        if z > 3.0:
            return False, f"instance {k}: {z:.2f} standard errors from the exact value"
    return True, f"20 instances, worst deviation {worst:.2f} standard errors"


def check_discrepancy_exactness(streams: StreamFactory) -> Tuple[bool, str]:
    for k in range(50):
        rng = streams.stream("check-h-hat", k)
        n, m = int(rng.integers(2, 8)), int(rng.integers(1, 4))
        stats = random_stats(n, m, rng)
        uniform, ones = fully_connected(n), np.ones((n, n))
        for dim in range(m):
            value = h_hat_k(uniform, ones, stats, dim)
            if abs(value) > 1e-12:
                return False, f"uniform reliable value {value:.3e} != 0 (instance {k}, dim {dim})"
    hand = RepStats(mu=np.array([[0.0], [2.0]]), sigma=np.ones((2, 1)))
    value = h_hat_k(np.eye(2), np.ones((2, 2)), hand, 0)
    if abs(value - 0.25) > 1e-12:
        return False, f"hand case gave {value!r}, expected 0.25"
    return True, "50 uniform instances exact; hand case 0.25"


def check_objective_gradient(streams: StreamFactory) -> Tuple[bool, str]:
    worst = 0.0
    step = 1e-6
    for k in range(20):
        rng = streams.stream("check-g-gradient", k)
        n, m = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        theta = 0.5 * random_doubly_stochastic(n, rng) + 0.5 / n
        p = random_success(n, rng)
        stats = random_stats(n, m, rng)
        params = ObjectiveParams(lam=0.01, model_dim=10 * m, rep_dim=m)
        analytic = g_gradient(theta, p, stats, params)
        numeric = np.zeros_like(theta)
        for i, j in itertools.product(range(n), range(n)):
            bump = np.zeros_like(theta)
            bump[i, j] = step
            numeric[i, j] = (g_objective(theta + bump, p, stats, params)
                             - g_objective(theta - bump, p, stats, params)) / (2 * step)
        worst = max(worst, relative_error(analytic, numeric))
    return worst <= 1e-5, f"20 interior points, worst relative error {worst:.2e}"


def check_local_gradient(streams: StreamFactory) -> Tuple[bool, str]:
    rng = streams.stream("check-local-gradient")
    layout = ModelLayout(input_dim=6, hidden_dim=5, rep_dim=3, class_count=4)
    model = init_model(layout, rng)
    batch = Dataset(rng.normal(size=(12, 6)), rng.integers(0, 4, size=12), 4)
    noise = rng.standard_normal((12, 3))
    analytic, _, _ = local_gradient(model, batch, noise=noise)
    coords = rng.choice(layout.dim, size=10, replace=False)
    step = 1e-5
    numeric = np.empty(10)
    for idx, c in enumerate(coords):
        w_plus, w_minus = model.w.copy(), model.w.copy()
        w_plus[c] += step
        w_minus[c] -= step
        numeric[idx] = (batch_loss(ClientModel(w_plus, layout), batch, noise)
                        - batch_loss(ClientModel(w_minus, layout), batch, noise)) / (2 * step)
    err = relative_error(analytic[coords], numeric)
    return err <= 1e-4, f"10 coordinates, relative error {err:.2e}"


def check_lmo(streams: StreamFactory) -> Tuple[bool, str]:
    mismatches = 0
    for k in range(200):
        rng = streams.stream("check-lmo", k)
        n = int(rng.integers(1, 7))
        cost = rng.normal(size=(n, n))
        best = min(sum(cost[i, perm[i]] for i in range(n)) for perm in itertools.permutations(range(n)))
        atom = lmo(cost)
        if not math.isclose(float(np.sum(cost * atom.matrix())), best, rel_tol=1e-9, abs_tol=1e-9):
            mismatches += 1
    return mismatches == 0, f"200 matrices, {mismatches} mismatch(es)"


def check_frank_wolfe(streams: StreamFactory) -> Tuple[bool, str]:
    rng = streams.stream("check-fw")
    n, m = 3, 2
    p = SuccessMatrix(p=random_success(n, rng, 0.5, 0.99))
    stats = random_stats(n, m, rng)
    params = ObjectiveParams(lam=0.001, model_dim=20, rep_dim=m)
    result = frank_wolfe(MixingMatrix(np.eye(n)), p, stats, params, FwConfig(max_iters=20))

    trace = np.array(result.objective_trace)
    if np.any(np.diff(trace) > 1e-12):
        return False, "objective trace increased under line search"
    try:
        validate(result.theta.theta)
        validate(result.raw_decomposition.reconstruct(), symmetric=False)
    except MixingMatrixError as exc:
        return False, f"infeasible result: {exc}"

    perms = [PermutationAtom(perm).matrix() for perm in itertools.permutations(range(n))]
    best_sample = math.inf
    for _ in range(10_000):
        weights = rng.dirichlet(np.ones(len(perms)))
        sample = np.tensordot(weights, perms, axes=1)
        best_sample = min(best_sample, g_objective(sample, p, stats, params))
    gap = trace[-1] - best_sample
    return gap <= 1e-3, f"FW {trace[-1]:.6f} vs best random sample {best_sample:.6f}"


def check_theorem1(streams: StreamFactory) -> Tuple[bool, str]:
    value = theorem1_bound(1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 100)
    if abs(value - 2.0 / 9.0) > 1e-4:
        return False, f"hand case gave {value:.6f}, expected 0.2222"
    taus = [theorem1_bound(1.0, 0.0, 1.0, 0.5, tau, 0.1, 100) for tau in np.linspace(0, 2, 9)]
    xis = [theorem1_bound(1.0, 0.0, 1.0, xi, 0.5, 0.1, 100) for xi in np.linspace(0, 2, 9)]
    if np.any(np.diff(taus) < 0) or np.any(np.diff(xis) < 0):
        return False, "bound is not monotone in tau and xi"
    return True, f"hand case {value:.4f}; monotone in tau and xi"


CHECKS: List[Tuple[str, Callable[[StreamFactory], Tuple[bool, str]]]] = [
    ("mask_variance", check_mask_variance),
    ("theorem2_inequality", check_theorem2),
    ("h_bar_monte_carlo", check_monte_carlo_agreement),
    ("h_hat_exactness", check_discrepancy_exactness),
    ("g_gradient", check_objective_gradient),
    ("local_gradient", check_local_gradient),
    ("lmo_brute_force", check_lmo),
    ("frank_wolfe", check_frank_wolfe),
    ("theorem1_bound", check_theorem1),
]


def run_checks(seed: int = 0) -> List[CheckResult]:
    """Run the full suite; an exception inside a check counts as a failure."""
    streams = StreamFactory(seed)
    results = []
    for name, check in CHECKS:
        started = time.perf_counter()
        try:
            passed, detail = check(streams)
        except Exception as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        result = CheckResult(name, passed, detail, time.perf_counter() - started)
        (logger.info if passed else logger.error)(result.line())
        results.append(result)
    return results
