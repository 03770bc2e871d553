"""
Command-line interface.

Usage:
    d2d-topology run --config config.yml [--method M] [--degree R] [--seed S] [--out DIR] [--snapshots]
    d2d-topology sweep --config config.yml --methods tolrdul,random_regular --degrees 2,4 --seeds 1,2,3 --out DIR
    d2d-topology check [--seed S]

Exit codes: 0 on success, 1 on a configuration error, 2 on any other failure
(including a failing check).
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv

from .checks import run_checks
from .config_loader import parse_config
from .constants import LOG_DATE_FORMAT, LOG_FORMAT
from .engine import TrainingRun, average_model
from .errors import ConfigError, DivergenceError
from .models.config import ExperimentConfig
from .models.learning import ClientModel
from .models.records import CellKey
from .persistence import (
    MetricsWriter,
    save_model_snapshot,
    save_partition,
    save_rep_stats,
    save_topology,
    setup_session_logging,
)
from .sweep import run_sweep
from .utils import parse_int_list, parse_str_list

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_FAILURE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="d2d-topology",
        description="Topology learning for decentralized federated learning over unreliable D2D links",
    )
    parser.add_argument("--log-level", default=None, help="Console log level (default: config, then D2D_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Train one configuration")
    run.add_argument("--config", required=True, help="Experiment YAML file")
    run.add_argument("--method", default=None)
    run.add_argument("--degree", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="Output directory (default: D2D_OUT_DIR or results)")
    run.add_argument("--snapshots", action="store_true", help="Also write topology, statistics, partition and model")

    sweep = sub.add_parser("sweep", help="Run a method x degree x seed grid")
    sweep.add_argument("--config", required=True, help="Experiment YAML file")
    sweep.add_argument("--methods", type=parse_str_list, default=None, help="Comma-separated methods")
    sweep.add_argument("--degrees", type=parse_int_list, default=None, help="Comma-separated degrees")
    sweep.add_argument("--seeds", type=parse_int_list, default=None, help="Comma-separated seeds")
    sweep.add_argument("--out", default=None, help="Output directory (default: D2D_OUT_DIR or results)")
    sweep.add_argument("--max-workers", type=int, default=None, help="Parallel cells (default: D2D_MAX_WORKERS or 1)")

    check = sub.add_parser("check", help="Run the invariant and oracle suite on tiny instances")
    check.add_argument("--seed", type=int, default=0)
    return parser


def configure_logging(level_name: str) -> None:
    """Console logging at the requested level; session files may still record DEBUG."""
    level = getattr(logging, level_name.upper(), None)
    if not isinstance(level, int):
        raise ConfigError("logging.level", f"unknown level {level_name!r}")
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
    root = logging.getLogger()
    root.setLevel(level)
    for handler in root.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(level)


def _out_dir(arg: Optional[str]) -> Path:
    return Path(arg or os.getenv("D2D_OUT_DIR", "results"))


def _log_level(arg: Optional[str], cfg: Optional[ExperimentConfig]) -> str:
    if arg:
        return arg
    env = os.getenv("D2D_LOG_LEVEL")
    if env:
        return env
    return cfg.logging.level if cfg is not None else "INFO"


def _start_session(command: str, cfg: ExperimentConfig, level_arg: Optional[str]) -> logging.FileHandler:
    configure_logging(_log_level(level_arg, cfg))
    return setup_session_logging(os.getenv("D2D_LOG_DIR", cfg.logging.log_dir), command)


def _detach(handler: logging.FileHandler) -> None:
    logging.getLogger("d2d_topology").removeHandler(handler)
    handler.close()


def cmd_run(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config)
    try:
        cfg = cfg.with_cell(
            args.method if args.method is not None else cfg.method,
            args.degree if args.degree is not None else cfg.degree,
            args.seed if args.seed is not None else cfg.seed,
        )
    except ValueError as exc:
        raise ConfigError("experiment", str(exc)) from exc
    handler = _start_session("run", cfg, args.log_level)
    try:
        out_dir = _out_dir(args.out)
        key = CellKey(cfg.method, cfg.degree, cfg.seed)
        run = TrainingRun(cfg)
        with MetricsWriter(out_dir / f"{key.run_name}.csv") as writer:
            run.on_record = writer.write
            records = run.run()
        print(f"{key.run_name}: final test_acc={records[-1].test_acc:.4f}, "
              f"mean latency={run.monitor.summary()['mean_latency_s']:.4g}s -> {writer.path}")

        if args.snapshots:
            save_topology(out_dir / f"{key.run_name}_topology.json", run.theta, run.last_fw)
            if run.last_stats is not None:
                save_rep_stats(out_dir / f"{key.run_name}_rep_stats.json", run.last_stats)
            save_partition(out_dir / f"{key.run_name}_partition.json", run.data.partition)
            save_model_snapshot(
                out_dir / f"{key.run_name}_model.bin",
                ClientModel(w=average_model(run.weights), layout=run.layout),
            )
            logger.info(f"Snapshots written to {out_dir}")
        return EXIT_OK
    finally:
        _detach(handler)


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config)
    handler = _start_session("sweep", cfg, args.log_level)
    try:
        max_workers = args.max_workers or int(os.getenv("D2D_MAX_WORKERS", "1"))
        outcome = run_sweep(
            cfg,
            methods=args.methods or [cfg.method],
            degrees=args.degrees or [cfg.degree],
            seeds=args.seeds or [cfg.seed],
            out_dir=_out_dir(args.out),
            max_workers=max_workers,
        )
        for row in outcome.table.to_rows():
            print(",".join(row))
        print(f"summary: {outcome.summary_path}, runs: {outcome.runs_path}")
        return EXIT_OK if outcome.failed == 0 else EXIT_FAILURE
    finally:
        _detach(handler)


def cmd_check(args: argparse.Namespace) -> int:
    configure_logging(_log_level(args.log_level, None))
    results = run_checks(seed=args.seed)
    for result in results:
        print(result.line())
    failed = sum(1 for r in results if not r.passed)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "check": cmd_check}


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except DivergenceError as exc:
        logger.error(f"{exc} ({len(exc.records)} round(s) completed)")
        return EXIT_FAILURE
    except Exception as exc:
        logger.exception(f"{args.command} failed: {exc}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
