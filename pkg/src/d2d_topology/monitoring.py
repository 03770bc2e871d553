"""
Run monitoring and statistics.

Tracks per-round transmission latency, wall-clock round duration, topology
relearning events and the exact neighborhood discrepancy of one training run.
"""

import time
from dataclasses import dataclass
from typing import Dict


@dataclass(frozen=True)
class RoundMetrics:
    """Timing and discrepancy of a single round."""
    round: int
    latency_s: float
    duration_ms: float
    relearned: bool
    h_bar: float = 0.0


@dataclass
class Statistics:
    """Aggregated run statistics."""
    total_rounds: int = 0
    relearn_rounds: int = 0
    total_latency_s: float = 0.0
    avg_latency_s: float = 0.0
    min_latency_s: float = float("inf")
    max_latency_s: float = 0.0
    total_duration_ms: float = 0.0
    avg_duration_ms: float = 0.0
    max_h_bar: float = 0.0

    def update(self, metrics: RoundMetrics) -> None:
        """Update statistics with new round metrics."""
        self.total_rounds += 1
        self.total_latency_s += metrics.latency_s
        self.avg_latency_s = self.total_latency_s / self.total_rounds
        self.min_latency_s = min(self.min_latency_s, metrics.latency_s)
        self.max_latency_s = max(self.max_latency_s, metrics.latency_s)
        self.total_duration_ms += metrics.duration_ms
        self.avg_duration_ms = self.total_duration_ms / self.total_rounds
        self.max_h_bar = max(self.max_h_bar, metrics.h_bar)
        if metrics.relearned:
            self.relearn_rounds += 1


class RunMonitor:
    """Monitors a training run and tracks round metrics."""

    def __init__(self):
        self._statistics = Statistics()
        self._start_time = time.time()

    def record_round(
        self,
        round_index: int,
        latency_s: float,
        duration_ms: float,
        relearned: bool = False,
        h_bar: float = 0.0,
    ) -> None:
        """Record metrics for a completed round."""
        self._statistics.update(RoundMetrics(
            round=round_index,
            latency_s=latency_s,
            duration_ms=duration_ms,
            relearned=relearned,
            h_bar=h_bar,
        ))

    @property
    def statistics(self) -> Statistics:
        return self._statistics

    @property
    def tau(self) -> float:
        """Running max of the exact discrepancy, the tau of the convergence bound."""
        return self._statistics.max_h_bar

    @property
    def uptime_seconds(self) -> float:
        return time.time() - self._start_time

    def summary(self) -> Dict[str, float]:
        stats = self._statistics
        return {
            "rounds": stats.total_rounds,
            "relearn_rounds": stats.relearn_rounds,
            "mean_latency_s": stats.avg_latency_s,
            "max_latency_s": stats.max_latency_s,
            "mean_round_ms": stats.avg_duration_ms,
            "tau": stats.max_h_bar,
            "uptime_s": self.uptime_seconds,
        }
