"""
Topology models: mixing matrices, permutation atoms of the Birkhoff
polytope, their convex decompositions and Frank-Wolfe results.

MixingMatrix instances are built through mixing.validate (or the mixing
constructors); this module only holds the immutable data.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from ..constants import STOCHASTIC_TOL


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Symmetric doubly-stochastic matrix; theta[i, j] weights client j at client i."""
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float, copy=True)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def num_clients(self) -> int:
        return self.theta.shape[0]

    def active_links(self) -> np.ndarray:
        """Boolean (N, N) mask of off-diagonal links with nonzero weight."""
        active = self.theta != 0
        np.fill_diagonal(active, False)
        return active

    def to_list(self) -> List[List[float]]:
        return self.theta.tolist()


@dataclass(frozen=True)
class PermutationAtom:
    """Permutation pi of {0..N-1}; its matrix has ones at (i, pi[i])."""
    perm: Tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(v) for v in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"Not a permutation: {perm}")
        object.__setattr__(self, "perm", perm)

    @classmethod
    def identity(cls, n: int) -> "PermutationAtom":
        return cls(tuple(range(n)))

    @property
    def size(self) -> int:
        return len(self.perm)

    def matrix(self) -> np.ndarray:
        out = np.zeros((self.size, self.size))
        out[np.arange(self.size), self.perm] = 1.0
        return out

    def inverse(self) -> "PermutationAtom":
        inv = [0] * self.size
        for i, j in enumerate(self.perm):
            inv[j] = i
        return PermutationAtom(tuple(inv))

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.size))


@dataclass(frozen=True)
class AtomicDecomposition:
    """Convex combination of permutation atoms."""
    atoms: Tuple[PermutationAtom, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        atoms = tuple(self.atoms)
        weights = tuple(float(w) for w in self.weights)
        if len(atoms) != len(weights):
            raise ValueError("atoms and weights must have the same length")
        if not atoms:
            raise ValueError("decomposition needs at least one atom")
        if any(w < -STOCHASTIC_TOL for w in weights):
            raise ValueError(f"decomposition weights must be non-negative: {weights}")
        if abs(sum(weights) - 1.0) > STOCHASTIC_TOL:
            raise ValueError(f"decomposition weights sum to {sum(weights)}, expected 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    def reconstruct(self) -> np.ndarray:
        """Dense matrix sum_a w_a P_a."""
        n = self.atoms[0].size
        out = np.zeros((n, n))
        rows = np.arange(n)
        for atom, weight in zip(self.atoms, self.weights):
            out[rows, atom.perm] += weight
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "atoms": [list(atom.perm) for atom in self.atoms],
            "weights": list(self.weights),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AtomicDecomposition":
        return cls(
            atoms=tuple(PermutationAtom(tuple(a)) for a in data["atoms"]),
            weights=tuple(float(w) for w in data["weights"]),
        )


@dataclass(frozen=True, eq=False)
class FwResult:
    """
    Outcome of a Frank-Wolfe run over the Birkhoff polytope.

    Attributes:
        theta: Final symmetrized mixing matrix
        decomposition: Atoms reconstructing theta (raw atoms split into pi and pi^-1, re-decomposed after pruning)
        raw_decomposition: Atoms of the last iterate before symmetrization
        objective_trace: Objective at the start and after every iteration
        fw_gaps: FW duality gap at every iteration
        symmetrization_shift: Objective of theta minus the last traced objective
        pruned_links: Links removed to respect the degree budget
    """
    theta: MixingMatrix
    decomposition: AtomicDecomposition
    raw_decomposition: AtomicDecomposition
    objective_trace: Tuple[float, ...] = field(default_factory=tuple)
    fw_gaps: Tuple[float, ...] = field(default_factory=tuple)
    symmetrization_shift: float = 0.0
    pruned_links: int = 0

    @property
    def iterations(self) -> int:
        return len(self.fw_gaps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theta": self.theta.to_list(),
            "decomposition": self.decomposition.to_dict(),
            "raw_decomposition": self.raw_decomposition.to_dict(),
            "objective_trace": list(self.objective_trace),
            "fw_gaps": list(self.fw_gaps),
            "symmetrization_shift": self.symmetrization_shift,
            "pruned_links": self.pruned_links,
        }
