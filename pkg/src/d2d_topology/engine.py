"""
Decentralized training loop over unreliable D2D links.

Every round each client computes a minibatch gradient, every ordered link
delivers the sender's gradient through a Bernoulli erasure mask, and client i
applies w_i <- w_i - eta * sum_j theta_ij (g_j * m_ij). The learned method
relearns its topology every K rounds from the exchanged representation
statistics and the success probabilities.
"""

import logging
import time
from typing import Callable, List, Optional, Tuple

import numpy as np

from .baselines import degree_budget, initial_topology
from .channel import (
    build_success_matrix,
    place_clients,
    round_latency,
    sample_fading,
    sample_round_masks,
    success_range,
)
from .constants import METHOD_TOLRDUL
from .data import FederatedData, label_histograms, prepare_federated_data
from .discrepancy import h_bar_exact, h_bar_monte_carlo, theorem1_bound
from .errors import DivergenceError, ZeroDenominatorError
from .models.config import ExperimentConfig, ObjectiveParams
from .models.learning import ClientModel, GradientBundle, ModelLayout, RepStats
from .models.records import RoundRecord
from .models.topology import FwResult, MixingMatrix
from .monitoring import RunMonitor
from .network import evaluate, init_model, local_gradient
from .objective import g_objective
from .rng import StreamFactory
from .solver import frank_wolfe

logger = logging.getLogger(__name__)

RecordCallback = Callable[[RoundRecord], None]


def masked_aggregate(
    weights: np.ndarray,
    grads: GradientBundle,
    theta: MixingMatrix,
    masks: np.ndarray,
    eta: float,
) -> np.ndarray:
    """
    One gossip step: w_i - eta * sum_j theta_ij (g_j * masks[i, j]).

    Args:
        weights: Client parameters, shape (N, d)
        grads: Client gradients
        theta: Mixing matrix
        masks: Erasure bits, shape (N, N, d); masks[i, j] is link j -> i
        eta: Step size

    Returns:
        Updated parameters, shape (N, d)
    """
    weights = np.asarray(weights, dtype=float)
    g = grads.grads
    n, d = g.shape
    if weights.shape != (n, d) or masks.shape != (n, n, d) or theta.num_clients != n:
        raise ValueError(
            f"inconsistent shapes: weights {weights.shape}, grads {g.shape}, "
            f"masks {masks.shape}, theta {theta.theta.shape}"
        )
    idx = np.arange(n)
    if not np.all(masks[idx, idx, :] == 1):
        raise ValueError("self-masks must be all ones")
    return weights - eta * np.einsum("ij,ijk,jk->ik", theta.theta, masks, g)


def average_model(weights: np.ndarray) -> np.ndarray:
    """The averaged model (1/N) sum_i w_i."""
    return np.asarray(weights, dtype=float).mean(axis=0)


class TrainingRun:
    """
    State of one training run: client weights, topology, channel and data.

    All randomness comes from named streams of the run seed, so the same
    configuration reproduces the same records.
    """

    def __init__(self, cfg: ExperimentConfig, on_record: Optional[RecordCallback] = None):
        self.cfg = cfg
        self.on_record = on_record
        self.monitor = RunMonitor()
        self.records: List[RoundRecord] = []
        self.last_fw: Optional[FwResult] = None
        self.last_stats: Optional[RepStats] = None
        self._streams = StreamFactory(cfg.seed)
        n = cfg.num_clients

        self.data: FederatedData = prepare_federated_data(cfg.data, n, self._streams.stream("data"))
        self.layout = ModelLayout(
            input_dim=self.data.test.input_dim,
            hidden_dim=cfg.model.hidden_dim,
            rep_dim=cfg.model.rep_dim,
            class_count=self.data.test.class_count,
        )
        w0 = init_model(self.layout, self._streams.stream("init")).w
        self.weights = np.tile(w0, (n, 1))

        self.placement = place_clients(n, cfg.channel.region_side, self._streams.stream("placement"))
        self.success = build_success_matrix(self.placement, cfg.channel)
        lo, hi = success_range(self.success)
        if n > 1 and lo < 1e-3:
            logger.warning(f"Off-diagonal success probabilities span [{lo:.4g}, {hi:.4g}]; links are nearly degenerate")

        self.objective = ObjectiveParams(lam=cfg.lam, model_dim=self.layout.dim, rep_dim=self.layout.rep_dim)
        self.fw_config = cfg.solver.with_max_iters(degree_budget(cfg.degree))

        hist = label_histograms(self.data.partition, self._train_labels(), self.layout.class_count)
        self.theta, self.last_fw = initial_topology(cfg, hist, self._streams.stream("topology"))
        logger.info(
            f"Run {cfg.method} r={cfg.degree} seed={cfg.seed}: N={n}, d={self.layout.dim}, "
            f"p in [{lo:.3f}, {hi:.3f}], T={cfg.rounds}, K={cfg.exchange_period}"
        )

    def _train_labels(self) -> np.ndarray:
        labels = np.empty(self.data.partition.assignment.shape[0], dtype=np.int64)
        for client, ds in enumerate(self.data.clients):
            labels[self.data.partition.indices_of(client)] = ds.labels
        return labels

    def _should_relearn(self, t: int) -> bool:
        if self.cfg.method != METHOD_TOLRDUL or t % self.cfg.exchange_period:
            return False
        return t > 0 or self.cfg.relearn_at_start

    def local_step(self, t: int) -> Tuple[GradientBundle, RepStats, float]:
        """Minibatch gradients, representation statistics and mean loss of every client."""
        n = self.cfg.num_clients
        grads = np.empty_like(self.weights)
        mu = np.empty((n, self.layout.rep_dim))
        sigma = np.empty((n, self.layout.rep_dim))
        losses = np.empty(n)
        for i, ds in enumerate(self.data.clients):
            batch_rng = self._streams.stream("batch", t, i)
            size = min(self.cfg.batch_size, len(ds))
            batch = ds.subset(batch_rng.choice(len(ds), size=size, replace=False))
            model = ClientModel(w=self.weights[i], layout=self.layout)
            grad, (mu[i], sigma[i]), loss = local_gradient(model, batch, self._streams.stream("noise", t, i))
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise DivergenceError(t, i, self.records)
            grads[i] = grad
            losses[i] = loss
        return GradientBundle(grads), RepStats(mu=mu, sigma=sigma), float(losses.mean())

    def relearn(self, stats: RepStats) -> FwResult:
        """Learn a new topology from the current one with the current statistics."""
        result = frank_wolfe(self.theta, self.success, stats, self.objective, self.fw_config, self.cfg.degree)
        self.theta = result.theta
        self.last_fw = result
        return result

    def step(self, t: int) -> RoundRecord:
        """Run round t and return its record."""
        started = time.perf_counter()
        diag = self.cfg.diagnostics
        grads, stats, train_loss = self.local_step(t)
        self.last_stats = stats

        relearned = self._should_relearn(t)
        if relearned:
            result = self.relearn(stats)
            logger.info(
                f"Round {t}: topology relearned, g {result.objective_trace[0]:.4f} -> "
                f"{result.objective_trace[-1]:.4f} with {len(result.decomposition.atoms)} atoms"
            )

        fading = sample_fading(self.cfg.num_clients, self._streams.stream("fading", t))
        latency = round_latency(self.theta, self.placement, fading, self.cfg.channel)
        masks = sample_round_masks(self.success, self.layout.dim, self._streams.stream("mask", t))
        self.weights = masked_aggregate(self.weights, grads, self.theta, masks, self.cfg.step_size)

        test_acc = evaluate(ClientModel(w=average_model(self.weights), layout=self.layout), self.data.test)

        h_bar = None
        if diag.h_bar:
            h_bar, _ = h_bar_monte_carlo(
                self.theta, self.success, grads, diag.mc_samples, self._streams.stream("diagnostics", t)
            )
        g_value = None
        if diag.g_value:
            try:
                g_value = g_objective(self.theta, self.success, stats, self.objective)
            except ZeroDenominatorError:
                g_value = None

        record = RoundRecord(
            round=t,
            train_loss=train_loss,
            test_acc=test_acc,
            latency=latency,
            h_bar_mc=h_bar,
            g_value=g_value,
        )
        discrepancy = h_bar_exact(self.theta, self.success, grads)
        self.monitor.record_round(t, latency, (time.perf_counter() - started) * 1000.0, relearned, discrepancy)
        logger.debug(f"Round {t}: loss={train_loss:.4f} acc={test_acc:.4f} latency={latency:.4g}s")
        return record

    def run(self) -> List[RoundRecord]:
        """Execute every round; partial records travel with a DivergenceError."""
        for t in range(self.cfg.rounds):
            record = self.step(t)
            self.records.append(record)
            if self.on_record is not None:
                self.on_record(record)
        stats = self.monitor.summary()
        logger.info(
            f"Run {self.cfg.method} r={self.cfg.degree} seed={self.cfg.seed} finished: "
            f"final acc={self.records[-1].test_acc:.4f}, mean latency={stats['mean_latency_s']:.4g}s, "
            f"{stats['relearn_rounds']} relearn(s), tau={stats['tau']:.4g}, {stats['mean_round_ms']:.1f} ms/round"
        )
        return self.records

    @property
    def tau(self) -> float:
        return self.monitor.tau

    def convergence_bound(self, f0: float, f_star: float, beta: float, xi: float) -> float:
        """
        Convergence bound of the rounds run so far, with tau the largest exact
        discrepancy observed.

        Raises:
            StepsizeError: If sqrt(T) <= beta * eta
        """
        if not self.records:
            raise ValueError("no rounds have been run")
        return theorem1_bound(f0, f_star, beta, xi, self.tau, self.cfg.step_size, len(self.records))


def run_training(cfg: ExperimentConfig, on_record: Optional[RecordCallback] = None) -> List[RoundRecord]:
    """Train one configuration end to end and return its round records."""
    return TrainingRun(cfg, on_record=on_record).run()
