"""
Exception hierarchy for the d2d-topology simulator.
"""

from typing import Any, Optional, Sequence


class D2DTopologyError(Exception):
    """Base class for simulator errors."""


class ChannelError(D2DTopologyError):
    """Raised for invalid channel computations."""


class DegenerateLinkError(ChannelError):
    """Raised when an active link has a zero SNR term (zero rate)."""

    def __init__(self, receiver: int, sender: int):
        self.receiver = receiver
        self.sender = sender
        super().__init__(f"Active link {sender}->{receiver} has zero SNR, rate would be 0")


class MixingMatrixError(D2DTopologyError):
    """Raised when a matrix is not a valid mixing matrix."""

    def __init__(self, kind: str, index: Any, magnitude: float, message: Optional[str] = None):
        self.kind = kind
        self.index = index
        self.magnitude = magnitude
        super().__init__(message or f"{kind} violation at {index}: magnitude {magnitude:.3e}")


class RegularGraphError(MixingMatrixError):
    """Raised when a random regular graph cannot be generated."""

    def __init__(self, message: str):
        super().__init__("regular_graph", None, 0.0, message)


class ObjectiveError(D2DTopologyError):
    """Raised for topology objective evaluation failures."""


class ZeroDenominatorError(ObjectiveError):
    """Raised when a client has no reliable aggregation mass."""

    def __init__(self, client: int, dim: Optional[int] = None):
        self.client = client
        self.dim = dim
        where = f"client {client}" if dim is None else f"client {client}, dim {dim}"
        super().__init__(f"Zero aggregation denominator for {where}")


class StepsizeError(D2DTopologyError):
    """Raised when a stepsize violates the convergence bound precondition."""


class DivergenceError(D2DTopologyError):
    """Raised when training produces a non-finite loss."""

    def __init__(self, round_index: int, client: int, records: Sequence[Any] = ()):
        self.round_index = round_index
        self.client = client
        self.records = list(records)
        super().__init__(f"Non-finite loss at round {round_index} on client {client}")


class DataError(D2DTopologyError):
    """Raised for malformed datasets or partitions."""


class ConfigError(D2DTopologyError):
    """Raised when the experiment configuration is invalid."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}")
