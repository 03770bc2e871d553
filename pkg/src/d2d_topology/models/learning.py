"""
Learning-side models: representation statistics, the tiny network layout,
client parameters, gradient bundles, datasets and partitions.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple

import numpy as np


@dataclass(frozen=True, eq=False)
class RepStats:
    """Per-client, per-dimension Gaussian parameters of the representation layer."""
    mu: np.ndarray  # (N, m)
    sigma: np.ndarray  # (N, m), strictly positive

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float, copy=True)
        sigma = np.array(self.sigma, dtype=float, copy=True)
        if mu.ndim != 2 or mu.shape != sigma.shape:
            raise ValueError(f"mu and sigma must share an (N, m) shape, got {mu.shape}, {sigma.shape}")
        if np.any(~(sigma > 0)):
            raise ValueError("sigma entries must be strictly positive")
        mu.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def num_clients(self) -> int:
        return self.mu.shape[0]

    @property
    def rep_dim(self) -> int:
        return self.mu.shape[1]

    def permuted(self, order: np.ndarray) -> "RepStats":
        """Stats with clients reordered."""
        return RepStats(mu=self.mu[order], sigma=self.sigma[order])

    def to_dict(self) -> Dict[str, Any]:
        return {"mu": self.mu.tolist(), "sigma": self.sigma.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RepStats":
        return cls(mu=np.asarray(data["mu"], dtype=float), sigma=np.asarray(data["sigma"], dtype=float))


@dataclass(frozen=True)
class ModelLayout:
    """
    Shape of the tiny probabilistic network.

    input n -> hidden h (tanh) -> 2m (mu, softplus pre-sigma) -> sample phi -> C classes.
    """
    input_dim: int
    hidden_dim: int
    rep_dim: int
    class_count: int

    def __post_init__(self):
        if min(self.input_dim, self.hidden_dim, self.rep_dim) < 1:
            raise ValueError("layer sizes must be at least 1")
        if self.class_count < 2:
            raise ValueError(f"class_count must be at least 2, got {self.class_count}")

    @property
    def dim(self) -> int:
        """Total parameter count d."""
        n, h, m, c = self.input_dim, self.hidden_dim, self.rep_dim, self.class_count
        return (n + 1) * h + (h + 1) * (2 * m) + (m + 1) * c

    def to_dict(self) -> Dict[str, int]:
        return {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "rep_dim": self.rep_dim,
            "class_count": self.class_count,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelLayout":
        return cls(
            input_dim=int(data["input_dim"]),
            hidden_dim=int(data["hidden_dim"]),
            rep_dim=int(data["rep_dim"]),
            class_count=int(data["class_count"]),
        )


class LayerParams(NamedTuple):
    """Views into a flat parameter vector."""
    w1: np.ndarray  # (n, h)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h, 2m)
    b2: np.ndarray  # (2m,)
    w3: np.ndarray  # (m, C)
    b3: np.ndarray  # (C,)


@dataclass(frozen=True, eq=False)
class ClientModel:
    """Flat parameter vector of one client plus the layout it follows."""
    w: np.ndarray
    layout: ModelLayout

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.shape != (self.layout.dim,):
            raise ValueError(f"parameter vector must have length {self.layout.dim}, got {w.shape}")
        object.__setattr__(self, "w", w)

    def unpack(self) -> LayerParams:
        """Split the flat vector into layer views (no copies)."""
        n, h, m, c = (self.layout.input_dim, self.layout.hidden_dim,
                      self.layout.rep_dim, self.layout.class_count)
        shapes = [(n, h), (h,), (h, 2 * m), (2 * m,), (m, c), (c,)]
        parts: List[np.ndarray] = []
        offset = 0
        for shape in shapes:
            size = int(np.prod(shape))
            parts.append(self.w[offset:offset + size].reshape(shape))
            offset += size
        return LayerParams(*parts)


@dataclass(frozen=True, eq=False)
class GradientBundle:
    """Stochastic gradients of all clients for one round, one row per client."""
    grads: np.ndarray  # (N, d)

    def __post_init__(self):
        grads = np.array(self.grads, dtype=float, copy=True)
        if grads.ndim != 2:
            raise ValueError(f"gradients must have shape (N, d), got {grads.shape}")
        if not np.all(np.isfinite(grads)):
            raise ValueError("gradients must be finite")
        grads.setflags(write=False)
        object.__setattr__(self, "grads", grads)

    @property
    def num_clients(self) -> int:
        return self.grads.shape[0]

    @property
    def dim(self) -> int:
        return self.grads.shape[1]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Examples with integer labels in [0, class_count)."""
    features: np.ndarray  # (examples, n)
    labels: np.ndarray  # (examples,)
    class_count: int
    split: str = "train"

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or features.shape[0] != labels.shape[0]:
            raise ValueError(
                f"features {features.shape} and labels {labels.shape} disagree on example count"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise ValueError(f"labels must lie in [0, {self.class_count})")
        if not np.all(np.isfinite(features)):
            raise ValueError("features must be finite")
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {self.split!r}")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.features[indices], self.labels[indices], self.class_count, self.split)


class DatasetSplits(NamedTuple):
    """Training pool and the held-out global test set."""
    train: Dataset
    test: Dataset


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of every training example to a client."""
    assignment: np.ndarray  # (examples,)
    num_clients: int

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=np.int64)
        if assignment.size and (assignment.min() < 0 or assignment.max() >= self.num_clients):
            raise ValueError(f"assignment values must lie in [0, {self.num_clients})")
        counts = np.bincount(assignment, minlength=self.num_clients)
        if np.any(counts == 0):
            empty = np.flatnonzero(counts == 0).tolist()
            raise ValueError(f"clients without examples: {empty}")
        object.__setattr__(self, "assignment", assignment)

    def indices_of(self, client: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == client)

    def counts(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.num_clients)

    def to_dict(self) -> Dict[str, Any]:
        return {"num_clients": self.num_clients, "assignment": self.assignment.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Partition":
        return cls(assignment=np.asarray(data["assignment"]), num_clients=int(data["num_clients"]))
