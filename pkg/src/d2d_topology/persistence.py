"""
Output files: metrics CSVs, JSON snapshots, model binaries and session logs.
"""

import csv
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Union

import numpy as np

from .constants import LOG_DATE_FORMAT, LOG_FORMAT, METRICS_CSV_HEADER
from .mixing import from_json as mixing_from_json
from .models.learning import ClientModel, ModelLayout, Partition, RepStats
from .models.records import RoundRecord
from .models.topology import FwResult, MixingMatrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class MetricsWriter:
    """Appends RoundRecord rows to a CSV as they are produced; the header is written on open."""

    def __init__(self, path: PathLike):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(METRICS_CSV_HEADER)
        self._rows = 0

    def write(self, record: RoundRecord) -> None:
        self._writer.writerow(record.to_row())
        self._file.flush()
        self._rows += 1

    @property
    def rows(self) -> int:
        return self._rows

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()

    def __enter__(self) -> "MetricsWriter":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()


def write_metrics_csv(path: PathLike, records: Iterable[RoundRecord]) -> Path:
    with MetricsWriter(path) as writer:
        for record in records:
            writer.write(record)
    return writer.path


def _optional_float(text: str) -> Optional[float]:
    return float(text) if text != "" else None


def read_metrics_csv(path: PathLike) -> List[RoundRecord]:
    """Parse a metrics CSV back into records."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = tuple(next(reader))
        if header != METRICS_CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            RoundRecord(
                round=int(row[0]),
                train_loss=float(row[1]),
                test_acc=float(row[2]),
                latency=float(row[3]),
                h_bar_mc=_optional_float(row[4]),
                g_value=_optional_float(row[5]),
            )
            for row in reader
        ]


def write_table_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def save_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path


def load_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def save_topology(path: PathLike, theta: MixingMatrix, fw_result: Optional[FwResult] = None) -> Path:
    """Mixing matrix, plus the Frank-Wolfe audit trail when the topology was learned."""
    payload: dict = {"theta": theta.to_list()}
    if fw_result is not None:
        payload["frank_wolfe"] = fw_result.to_dict()
    return save_json(path, payload)


def load_topology(path: PathLike) -> MixingMatrix:
    return mixing_from_json(json.dumps(load_json(path)["theta"]))


def save_rep_stats(path: PathLike, stats: RepStats) -> Path:
    return save_json(path, stats.to_dict())


def load_rep_stats(path: PathLike) -> RepStats:
    return RepStats.from_dict(load_json(path))


def save_partition(path: PathLike, partition: Partition) -> Path:
    return save_json(path, partition.to_dict())


def load_partition(path: PathLike) -> Partition:
    return Partition.from_dict(load_json(path))


def save_model_snapshot(path: PathLike, model: ClientModel) -> Path:
    """
    Flat little-endian float64 parameters at `path` with a JSON layout sidecar
    at `path` + ".json".
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(np.asarray(model.w, dtype="<f8").tobytes())
    save_json(path.with_name(path.name + ".json"), {
        "dtype": "<f8",
        "length": int(model.layout.dim),
        "layout": model.layout.to_dict(),
    })
    return path


def load_model_snapshot(path: PathLike) -> ClientModel:
    path = Path(path)
    sidecar = load_json(path.with_name(path.name + ".json"))
    w = np.frombuffer(path.read_bytes(), dtype=sidecar["dtype"]).astype(float)
    if w.shape[0] != sidecar["length"]:
        raise ValueError(f"{path}: expected {sidecar['length']} parameters, found {w.shape[0]}")
    return ClientModel(w=w, layout=ModelLayout.from_dict(sidecar["layout"]))


def setup_session_logging(log_dir: PathLike, command: str) -> logging.FileHandler:
    """
    Attach a session log file to the package logger.

    Log files are named <command>_YYYYmmdd_HHMMSS.log.
    """
    log_path = Path(log_dir)
    log_path.mkdir(parents=True, exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_filepath = log_path / f"{command}_{timestamp}.log"

    file_handler = logging.FileHandler(log_filepath, mode="a", encoding="utf-8")
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt=LOG_DATE_FORMAT))

    package_logger = logging.getLogger("d2d_topology")
    package_logger.addHandler(file_handler)
    if package_logger.getEffectiveLevel() > logging.DEBUG:
        package_logger.setLevel(logging.DEBUG)

    logger.info(f"Session log file created: {log_filepath}")
    return file_handler
