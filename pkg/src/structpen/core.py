"""Shared types and elementary maps for the structured sparsity penalties.

Every penalty in this package has the variational form

    Omega(beta | Lambda) = inf { gamma(beta, lam) : lam in Lambda },

    gamma(beta, lam) = 1/2 * sum_i (beta_i**2 / lam_i + lam_i),

where ``Lambda`` is a convex subset of the positive orthant. Indices are
0-based throughout the Python API.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "ConvergenceError",
    "PenaltyResult",
    "GroupPartition",
    "as_vector",
    "gamma",
    "l1_norm",
    "l2_norm",
    "group_average_map",
    "phi_eps",
]


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative method fails to reach its tolerance."""


def as_vector(x, name="beta"):
    """Return ``x`` as a finite, non-empty, 1-d float array."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {v.shape}")
    if v.size == 0:
        raise DomainError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise DomainError(f"{name} has non-finite entries")
    return v


@dataclass(frozen=True)
class PenaltyResult:
    """Value of a penalty together with its minimizing ``lam``.

    Attributes
    ----------
    omega : float
        Penalty value.
    lam : ndarray
        Minimizer of ``gamma(beta, .)`` over the closure of the constraint
        set. Entries are nonnegative; ``lam[i] == 0`` only where
        ``beta[i] == 0``.
    witness : object, optional
        Structure descriptor (a ``ContiguousPartition`` for the wedge, a
        ``TreeCut`` for trees), or None.
    converged : bool
        False when a numeric evaluator stopped before reaching tolerance.
    """

    omega: float
    lam: np.ndarray
    witness: Optional[object] = None
    converged: bool = True
    info: dict = field(default_factory=dict, compare=False, repr=False)


class GroupPartition:
    """Disjoint nonempty blocks covering ``range(n)``.

    Parameters
    ----------
    blocks : sequence of sequences of int
        The blocks, 0-based.
    n : int, optional
        Size of the ground set. Inferred from the blocks when omitted.
    """

    def __init__(self, blocks: Sequence[Sequence[int]], n: Optional[int] = None):
        blocks = [np.asarray(b, dtype=np.intp).reshape(-1) for b in blocks]
        if not blocks:
            raise DomainError("partition needs at least one block")
        if any(b.size == 0 for b in blocks):
            raise DomainError("partition blocks must be nonempty")
        allidx = np.concatenate(blocks)
        if n is None:
            n = int(allidx.max()) + 1
        if allidx.min() < 0 or allidx.max() >= n:
            raise DomainError("partition index out of range")
        if allidx.size != n or np.unique(allidx).size != n:
            raise DomainError("blocks must be disjoint and cover range(n)")
        self.blocks = tuple(blocks)
        self.n = n
        self.labels = np.empty(n, dtype=np.intp)
        for k, b in enumerate(blocks):
            self.labels[b] = k

    @classmethod
    def contiguous(cls, sizes: Sequence[int]) -> "GroupPartition":
        """Partition of ``range(sum(sizes))`` into consecutive runs."""
        edges = np.concatenate([[0], np.cumsum(sizes)])
        return cls([np.arange(a, b) for a, b in zip(edges[:-1], edges[1:])],
                   int(edges[-1]))

    @classmethod
    def singletons(cls, n: int) -> "GroupPartition":
        return cls([[i] for i in range(n)], n)

    def __len__(self):
        return len(self.blocks)

    def sizes(self) -> np.ndarray:
        return np.array([b.size for b in self.blocks])

    def block_sums(self, v) -> np.ndarray:
        """Sum of ``v`` over every block."""
        return np.bincount(self.labels, weights=v, minlength=len(self.blocks))

    def __repr__(self):
        return f"GroupPartition({[b.tolist() for b in self.blocks]})"


def gamma(beta, lam) -> float:
    """Joint objective ``1/2 * sum(beta**2 / lam + lam)``.

    Entries with ``lam_i == 0`` and ``beta_i == 0`` contribute 0 (the
    continuous extension); ``lam_i == 0`` with ``beta_i != 0`` is an error.
    """
    beta = as_vector(beta)
    lam = as_vector(lam, "lam")
    if beta.shape != lam.shape:
        raise DomainError(f"length mismatch: {beta.size} != {lam.size}")
    if np.any(lam < 0):
        raise DomainError("lam must be nonnegative")
    zero = lam == 0
    if np.any(beta[zero] != 0):
        raise DomainError("lam_i = 0 requires beta_i = 0")
    safe = np.where(zero, 1.0, lam)
    return 0.5 * float(np.sum(np.where(zero, 0.0, beta ** 2 / safe + lam)))


def l1_norm(beta) -> float:
    return float(np.sum(np.abs(as_vector(beta))))


def l2_norm(beta) -> float:
    return float(np.linalg.norm(as_vector(beta)))


def group_average_map(beta, partition: GroupPartition) -> np.ndarray:
    """Blockwise l1 norms ``(||beta_P||_1 for P in partition)``."""
    beta = as_vector(beta)
    if partition.n != beta.size:
        raise DomainError(f"partition covers {partition.n} indices, beta has {beta.size}")
    return partition.block_sums(np.abs(beta))


def phi_eps(beta, eps: float) -> np.ndarray:
    """Smoothing map ``sqrt(beta**2 + eps)``; strictly positive for eps > 0."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    beta = as_vector(beta)
    return np.sqrt(beta ** 2 + eps)
