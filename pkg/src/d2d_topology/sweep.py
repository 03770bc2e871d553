"""
SweepPool - parallel execution of method x degree x seed cells.

Each cell trains one configuration in a worker thread, streams its round
records into its own CSV and returns a RunSummary. Failures are captured per
cell and never abort the sweep.

Example usage:
    pool = SweepPool(max_workers=4)
    results = await pool.execute_parallel(keys, lambda key: run_cell(cfg, key, out_dir))
"""

import asyncio
import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Sequence, TypeVar, Union

import numpy as np

from .constants import METHODS
from .engine import run_training
from .errors import ConfigError
from .models.config import ExperimentConfig
from .models.records import CellKey, CellResult, RunSummary, SummaryRow, SummaryTable
from .persistence import MetricsWriter, write_table_csv
from .utils import format_float

logger = logging.getLogger(__name__)

T = TypeVar("T")

RUNS_CSV_HEADER = (
    "method", "degree", "seed", "success", "final_test_acc", "mean_latency_s", "rounds", "metrics_path", "error",
)


class SweepPool:
    """Runs sweep cells concurrently in threads, at most max_workers at a time."""

    def __init__(self, max_workers: int = 1):
        if max_workers < 1:
            raise ValueError(f"max_workers must be at least 1, got {max_workers}")
        self._max_workers = max_workers

    @property
    def max_workers(self) -> int:
        return self._max_workers

    async def execute_parallel(
        self,
        keys: Sequence[CellKey],
        func: Callable[[CellKey], T],
        return_exceptions: bool = True,
    ) -> List[CellResult[T]]:
        """
        Execute a blocking function for every cell in parallel.

        Args:
            keys: Cells to run
            func: Blocking function taking a CellKey and returning a result
            return_exceptions: If True, capture exceptions instead of raising

        Returns:
            List of CellResult objects, one per cell, in input order
        """
        semaphore = asyncio.Semaphore(self._max_workers)

        async def run_one(key: CellKey) -> T:
            async with semaphore:
                return await asyncio.to_thread(func, key)

        results = await asyncio.gather(*(run_one(key) for key in keys), return_exceptions=return_exceptions)

        cell_results: List[CellResult[T]] = []
        for key, result in zip(keys, results):
            if isinstance(result, Exception):
                cell_results.append(CellResult(key=key, success=False, error=result))
                logger.error(f"Cell {key.run_name} failed: {result}")
            else:
                cell_results.append(CellResult(key=key, success=True, result=result))
        return cell_results


@dataclass(frozen=True)
class SweepOutcome:
    """Everything a sweep produced."""
    table: SummaryTable
    results: List[CellResult[RunSummary]]
    summary_path: Path
    runs_path: Path

    @property
    def failed(self) -> int:
        return sum(1 for r in self.results if not r.success)


def sweep_keys(methods: Sequence[str], degrees: Sequence[int], seeds: Sequence[int]) -> List[CellKey]:
    """Cells in method-major, then degree, then seed order."""
    if not methods or not degrees or not seeds:
        raise ConfigError("sweep", "methods, degrees and seeds must be nonempty")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigError("sweep.methods", f"unknown method(s) {unknown}; expected {list(METHODS)}")
    return [CellKey(m, int(r), int(s)) for m, r, s in itertools.product(methods, degrees, seeds)]


def run_cell(base: ExperimentConfig, key: CellKey, out_dir: Union[str, Path]) -> RunSummary:
    """Train one cell, streaming its records to <out_dir>/<run_name>.csv."""
    cfg = base.with_cell(key.method, key.degree, key.seed)
    path = Path(out_dir) / f"{key.run_name}.csv"
    with MetricsWriter(path) as writer:
        records = run_training(cfg, on_record=writer.write)
    logger.info(f"Cell {key.run_name} done: final acc={records[-1].test_acc:.4f}")
    return RunSummary(
        final_test_acc=records[-1].test_acc,
        mean_latency=float(np.mean([r.latency for r in records])),
        rounds=len(records),
        metrics_path=str(path),
    )


def summarize(results: Sequence[CellResult[RunSummary]]) -> SummaryTable:
    """Mean final accuracy and mean latency per (method, degree) over completed seeds."""
    table = SummaryTable()
    groups: dict = {}
    for result in results:
        groups.setdefault((result.key.method, result.key.degree), []).append(result)
    for (method, degree), cells in groups.items():
        done = [c.result for c in cells if c.success]
        table.add(SummaryRow(
            method=method,
            degree=degree,
            final_test_acc=float(np.mean([s.final_test_acc for s in done])) if done else None,
            mean_latency=float(np.mean([s.mean_latency for s in done])) if done else None,
            completed_seeds=len(done),
            failed_seeds=len(cells) - len(done),
        ))
    return table


def _runs_rows(results: Sequence[CellResult[RunSummary]]) -> List[List[str]]:
    rows = []
    for r in results:
        summary = r.result
        rows.append([
            r.key.label,
            str(r.key.degree),
            str(r.key.seed),
            "true" if r.success else "false",
            format_float(summary.final_test_acc if summary else None),
            format_float(summary.mean_latency if summary else None),
            str(summary.rounds) if summary else "",
            summary.metrics_path if summary else "",
            "" if r.success else f"{type(r.error).__name__}: {r.error}",
        ])
    return rows


async def run_sweep_async(
    cfg: ExperimentConfig,
    methods: Sequence[str],
    degrees: Sequence[int],
    seeds: Sequence[int],
    out_dir: Union[str, Path],
    max_workers: int = 1,
) -> SweepOutcome:
    """Run every cell, then write runs.csv and summary.csv into out_dir."""
    keys = sweep_keys(methods, degrees, seeds)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    logger.info(f"Sweep of {len(keys)} cell(s) with {max_workers} worker(s) into {out_dir}")

    pool = SweepPool(max_workers=max_workers)
    results = await pool.execute_parallel(keys, lambda key: run_cell(cfg, key, out_dir))

    table = summarize(results)
    runs_path = write_table_csv(out_dir / "runs.csv", RUNS_CSV_HEADER, _runs_rows(results))
    summary_path = write_table_csv(out_dir / "summary.csv", SummaryTable.header(), table.to_rows())
    outcome = SweepOutcome(table=table, results=results, summary_path=summary_path, runs_path=runs_path)
    logger.info(f"Sweep finished: {len(keys) - outcome.failed} completed, {outcome.failed} failed")
    return outcome


def run_sweep(
    cfg: ExperimentConfig,
    methods: Sequence[str],
    degrees: Sequence[int],
    seeds: Sequence[int],
    out_dir: Union[str, Path],
    max_workers: int = 1,
) -> SweepOutcome:
    """Synchronous wrapper around run_sweep_async."""
    return asyncio.run(run_sweep_async(cfg, methods, degrees, seeds, out_dir, max_workers))
