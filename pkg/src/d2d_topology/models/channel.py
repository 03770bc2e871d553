"""
Channel-related models: client placement, success probabilities, fading
draws and erasure masks.
"""

from dataclasses import dataclass

import numpy as np


def _readonly(array: np.ndarray, dtype=float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Placement:
    """Client positions in the square region and their pairwise distances (meters)."""
    positions: np.ndarray  # (N, 2)
    distances: np.ndarray  # (N, N)

    def __post_init__(self):
        positions = _readonly(self.positions)
        distances = _readonly(self.distances)
        if positions.ndim != 2 or positions.shape[1] != 2:
            raise ValueError(f"positions must have shape (N, 2), got {positions.shape}")
        n = positions.shape[0]
        if distances.shape != (n, n):
            raise ValueError(f"distances must have shape ({n}, {n}), got {distances.shape}")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "distances", distances)

    @classmethod
    def from_positions(cls, positions: np.ndarray) -> "Placement":
        """Build a placement, computing Euclidean distances."""
        positions = np.asarray(positions, dtype=float)
        diff = positions[:, None, :] - positions[None, :, :]
        distances = np.sqrt(np.sum(diff * diff, axis=-1))
        np.fill_diagonal(distances, 0.0)
        return cls(positions=positions, distances=distances)

    @property
    def num_clients(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True, eq=False)
class SuccessMatrix:
    """Per-link transmission success probabilities; p[i, j] is link j -> i."""
    p: np.ndarray

    def __post_init__(self):
        p = _readonly(self.p)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"success matrix must be square, got {p.shape}")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("success probabilities must lie in [0, 1]")
        object.__setattr__(self, "p", p)

    @classmethod
    def ones(cls, n: int) -> "SuccessMatrix":
        """Perfectly reliable links."""
        return cls(p=np.ones((n, n)))

    @property
    def num_clients(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True, eq=False)
class FadingDraw:
    """Rayleigh power fading h[i, j] for every ordered link of one round."""
    h: np.ndarray

    def __post_init__(self):
        h = _readonly(self.h)
        if np.any(h < 0):
            raise ValueError("fading draws must be non-negative")
        object.__setattr__(self, "h", h)


@dataclass(frozen=True, eq=False)
class Mask:
    """Per-component erasure bits of one transmitted vector."""
    bits: np.ndarray

    def __post_init__(self):
        bits = _readonly(self.bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError(f"mask must be a vector, got shape {bits.shape}")
        if np.any(bits > 1):
            raise ValueError("mask entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return self.bits.shape[0]
