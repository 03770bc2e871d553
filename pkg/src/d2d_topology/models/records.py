"""
Result records: per-round metrics, sweep cell results and summary tables.
"""

from dataclasses import dataclass, field
from typing import Dict, Generic, List, Optional, Tuple, TypeVar

from ..constants import METHOD_LABELS, METRICS_CSV_HEADER
from ..utils import format_float

T = TypeVar("T")


@dataclass(frozen=True)
class RoundRecord:
    """
    Metrics of one training round.

    Attributes:
        round: Round index t
        train_loss: Mean local minibatch loss
        test_acc: Accuracy of the averaged model on the global test set
        latency: Synchronous transmission latency of the round (seconds)
        h_bar_mc: Optional Monte-Carlo estimate of the neighborhood discrepancy
        g_value: Optional topology objective at the round's mixing matrix
    """
    round: int
    train_loss: float
    test_acc: float
    latency: float
    h_bar_mc: Optional[float] = None
    g_value: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.test_acc <= 1.0:
            raise ValueError(f"test_acc must lie in [0, 1], got {self.test_acc}")
        if self.latency < 0:
            raise ValueError(f"latency must be non-negative, got {self.latency}")

    def to_row(self) -> List[str]:
        """CSV row matching METRICS_CSV_HEADER; missing diagnostics are empty fields."""
        return [
            str(self.round),
            format_float(self.train_loss),
            format_float(self.test_acc),
            format_float(self.latency),
            format_float(self.h_bar_mc),
            format_float(self.g_value),
        ]

    @staticmethod
    def header() -> Tuple[str, ...]:
        return METRICS_CSV_HEADER


@dataclass(frozen=True)
class CellKey:
    """One sweep cell: method x degree x seed."""
    method: str
    degree: int
    seed: int

    @property
    def label(self) -> str:
        return METHOD_LABELS.get(self.method, self.method)

    @property
    def run_name(self) -> str:
        return f"{self.label}_r{self.degree}_seed{self.seed}"


@dataclass(frozen=True)
class CellResult(Generic[T]):
    """
    Wrapper for individual sweep cell results.

    Attributes:
        key: Cell this result belongs to
        success: Whether the cell completed
        result: The result data if successful
        error: The exception if failed
    """
    key: CellKey
    success: bool
    result: Optional[T] = None
    error: Optional[BaseException] = None


@dataclass(frozen=True)
class RunSummary:
    """Headline numbers of one completed run."""
    final_test_acc: float
    mean_latency: float
    rounds: int
    metrics_path: Optional[str] = None


@dataclass(frozen=True)
class SummaryRow:
    """Aggregated results of one (method, degree) cell over seeds."""
    method: str
    degree: int
    final_test_acc: Optional[float]
    mean_latency: Optional[float]
    completed_seeds: int
    failed_seeds: int


@dataclass
class SummaryTable:
    """Rows keyed by (method, degree), shaped like the accuracy/latency tables."""
    rows: Dict[Tuple[str, int], SummaryRow] = field(default_factory=dict)

    def add(self, row: SummaryRow) -> None:
        self.rows[(row.method, row.degree)] = row

    def get(self, method: str, degree: int) -> Optional[SummaryRow]:
        return self.rows.get((method, degree))

    def __len__(self) -> int:
        return len(self.rows)

    @staticmethod
    def header() -> Tuple[str, ...]:
        return ("method", "degree", "final_test_acc", "mean_latency_s", "completed_seeds", "failed_seeds")

    def to_rows(self) -> List[List[str]]:
        out = []
        for (method, degree), row in self.rows.items():
            out.append([
                METHOD_LABELS.get(method, method),
                str(degree),
                format_float(row.final_test_acc),
                format_float(row.mean_latency),
                str(row.completed_seeds),
                str(row.failed_seeds),
            ])
        return out
