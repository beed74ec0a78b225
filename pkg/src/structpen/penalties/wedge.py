"""Wedge penalty: ``lam`` nonincreasing, ``lam_1 >= lam_2 >= ... >= lam_n``.

The minimizer is blockwise constant over a contiguous partition of the
indices. On each block ``J`` it equals the root mean square of ``beta`` over
``J`` and the penalty is the group-Lasso sum ``sum_J sqrt(|J|) ||beta_J||_2``.
The partition is found by a single left-to-right pass that merges adjacent
blocks whose mean squares are out of order, in the manner of pool adjacent
violators.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import DomainError, PenaltyResult, as_vector

__all__ = [
    "TIE_TOL",
    "ContiguousPartition",
    "WedgeCertificates",
    "wedge_penalty",
    "wedge_certificates",
    "WedgePenalty",
]

# relative tolerance for "strictly decreasing" comparisons of block mean squares
TIE_TOL = 1e-12


class ContiguousPartition:
    """Ordered runs of consecutive indices.

    Parameters
    ----------
    n : int
        Number of indices.
    cuts : sequence of int
        Strictly increasing cut points in ``1..n-1``. A cut ``j`` separates
        index ``j - 1`` from ``j``, so blocks are the slices
        ``[0:j_1], [j_1:j_2], ..., [j_last:n]``.
    """

    def __init__(self, n: int, cuts: Sequence[int] = ()):
        cuts = tuple(int(j) for j in cuts)
        if n < 1:
            raise DomainError("n must be positive")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DomainError("cuts must be strictly increasing")
        if cuts and (cuts[0] < 1 or cuts[-1] > n - 1):
            raise DomainError("cuts must lie in 1..n-1")
        self.n = n
        self.cuts = cuts

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "ContiguousPartition":
        edges = np.cumsum(sizes)
        return cls(int(edges[-1]), edges[:-1].tolist())

    @property
    def edges(self):
        return (0,) + self.cuts + (self.n,)

    def slices(self):
        e = self.edges
        return [slice(a, b) for a, b in zip(e[:-1], e[1:])]

    def blocks(self):
        """Blocks as lists of 0-based indices."""
        e = self.edges
        return [list(range(a, b)) for a, b in zip(e[:-1], e[1:])]

    def sizes(self):
        return np.diff(self.edges)

    def __len__(self):
        return len(self.cuts) + 1

    def __eq__(self, other):
        return isinstance(other, ContiguousPartition) and \
            (self.n, self.cuts) == (other.n, other.cuts)

    def __hash__(self):
        return hash((self.n, self.cuts))

    def __repr__(self):
        return f"ContiguousPartition(n={self.n}, cuts={list(self.cuts)})"


@dataclass(frozen=True)
class WedgeCertificates:
    """Candidate multipliers ``zeta`` (length n+1) and minimizer ``delta``."""

    zeta: np.ndarray
    delta: np.ndarray
    feasible: bool


def _merge_pass(sq, tol):
    # Returns block sums of squares and block sizes. A new block is merged
    # into its predecessor while the predecessor's mean square is not
    # strictly larger.
    sums = []
    cnts = []
    scale = 1.0 + tol
    for s in sq:
        cs = s
        cc = 1
        while sums and sums[-1] * cc <= cs * cnts[-1] * scale:
            cs += sums.pop()
            cc += cnts.pop()
        sums.append(cs)
        cnts.append(cc)
    return sums, cnts


def wedge_penalty(beta, tol: float = TIE_TOL) -> PenaltyResult:
    """Wedge penalty, its minimizer and the optimal contiguous partition.

    Runs in O(n) time. Zeros are allowed; a trailing all-zero block gets
    ``lam = 0`` there.

    Examples
    --------
    >>> r = wedge_penalty([1.0, 2.0, 1.0])
    >>> round(r.omega, 6), r.witness.cuts
    (4.162278, (2,))
    """
    beta = as_vector(beta)
    sums, cnts = _merge_pass((beta * beta).tolist(), tol)
    sums = np.array(sums)
    cnts = np.array(cnts)
    omega = float(np.sum(np.sqrt(sums * cnts)))
    lam = np.repeat(np.sqrt(sums / cnts), cnts)
    part = ContiguousPartition(beta.size, np.cumsum(cnts)[:-1].tolist())
    return PenaltyResult(omega, lam, part)


def wedge_certificates(beta, partition: ContiguousPartition,
                       tol: float = TIE_TOL) -> WedgeCertificates:
    """Multipliers and candidate minimizer induced by a contiguous partition.

    ``partition`` is optimal for ``beta`` exactly when ``feasible`` is True:
    every ``zeta`` is nonnegative (each block's leading segments have mean
    square not above the block's) and the block values of ``delta`` strictly
    decrease.
    """
    beta = as_vector(beta)
    if np.any(beta == 0):
        raise DomainError("certificates are defined only for nonzero beta")
    n = beta.size
    if partition.n != n:
        raise DomainError("partition size does not match beta")
    c = np.concatenate([[0.0], np.cumsum(beta * beta)])
    zeta = np.zeros(n + 1)
    delta = np.empty(n)
    ok = True
    prev_ms = np.inf
    for a, b in zip(partition.edges[:-1], partition.edges[1:]):
        size = b - a
        total = c[b] - c[a]
        q = np.arange(a + 1, b)
        zeta[q] = (q - a) - size * (c[q] - c[a]) / total
        ms = total / size
        delta[a:b] = np.sqrt(ms)
        if np.any(zeta[q] < -tol * size) or not prev_ms > ms * (1.0 + tol):
            ok = False
        prev_ms = ms
    return WedgeCertificates(zeta, delta, ok)


class WedgePenalty:
    """Callable wrapper: ``WedgePenalty()(beta) -> PenaltyResult``."""

    def __call__(self, beta) -> PenaltyResult:
        return wedge_penalty(beta)

    def __repr__(self):
        return "WedgePenalty()"
