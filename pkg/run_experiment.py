#!/usr/bin/env python
"""
Run Experiment - Entry point script for a single training run.

Location: run_experiment.py
Purpose: Train one configuration from config.yml and write its metrics CSV
Relevant files: src/d2d_topology/engine.py, src/d2d_topology/cli.py, config.yml

Usage:
    poetry run python run_experiment.py
    poetry run python run_experiment.py --method random_regular --degree 4 --seed 2
"""

import argparse
import logging
import sys
from pathlib import Path

import yaml


def load_config():
    """Load the logging section defaults from config.yml"""
    config_path = Path(__file__).parent / "config.yml"
    if config_path.exists():
        with open(config_path) as f:
            return yaml.safe_load(f) or {}
    return {}


def main():
    config = load_config()
    logging_config = config.get("logging", {}) or {}

    parser = argparse.ArgumentParser(description="Run one D2D topology experiment")
    parser.add_argument("--config", default=str(Path(__file__).parent / "config.yml"))
    parser.add_argument("--method", default=None)
    parser.add_argument("--degree", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default="results")
    parser.add_argument("--log_level", default=logging_config.get("level", "INFO"))
    parser.add_argument("--snapshots", action="store_true")
    args = parser.parse_args()

    # Import after parsing args
    from d2d_topology.cli import main as cli_main

    argv = ["--log-level", args.log_level, "run", "--config", args.config, "--out", args.out]
    if args.method is not None:
        argv += ["--method", args.method]
    if args.degree is not None:
        argv += ["--degree", str(args.degree)]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    if args.snapshots:
        argv.append("--snapshots")

    print(f"Starting experiment from {args.config} (results in {args.out})")
    code = cli_main(argv)
    if code != 0:
        logging.getLogger(__name__).error(f"Experiment failed with exit code {code}")
    sys.exit(code)


if __name__ == "__main__":
    main()
