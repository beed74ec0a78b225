"""Group Lasso and composition with the group average map."""
import numpy as np

from ..core import DomainError, GroupPartition, PenaltyResult, as_vector, group_average_map
from .cone import ConeSpec

__all__ = [
    "group_lasso_penalty",
    "GroupLassoPenalty",
    "composite_penalty",
    "CompositePenalty",
    "lift_cone",
]


def _check(beta, partition):
    beta = as_vector(beta)
    if partition.n != beta.size:
        raise DomainError(f"partition covers {partition.n} indices, beta has {beta.size}")
    return beta


def group_lasso_penalty(beta, partition: GroupPartition) -> float:
    """Normalized group Lasso ``sum_J sqrt(|J|) ||beta_J||_2``."""
    beta = _check(beta, partition)
    ss = partition.block_sums(beta * beta)
    return float(np.sum(np.sqrt(partition.sizes() * ss)))


class GroupLassoPenalty:
    """Group Lasso as a penalty with ``lam`` constant on each group.

    The minimizing ``lam`` equals ``||beta_J||_2 / sqrt(|J|)`` on group ``J``.
    """

    def __init__(self, partition: GroupPartition):
        self.partition = partition

    def __call__(self, beta) -> PenaltyResult:
        beta = _check(beta, self.partition)
        p = self.partition
        ss = p.block_sums(beta * beta)
        sizes = p.sizes()
        theta = np.sqrt(ss / sizes)
        return PenaltyResult(float(np.sum(np.sqrt(sizes * ss))), theta[p.labels])

    def __repr__(self):
        return f"GroupLassoPenalty({self.partition!r})"


def composite_penalty(beta, partition: GroupPartition, inner) -> PenaltyResult:
    """Penalty of the set ``{lam : (sum of lam over each group) in Theta}``.

    Equals the inner penalty (over ``Theta``) evaluated at the vector of
    blockwise l1 norms. Each group total ``theta_l`` is split across its
    group in proportion to ``|beta_j|``, or uniformly when the group is all
    zero.

    Parameters
    ----------
    beta : array_like
    partition : GroupPartition
    inner : callable
        Maps a length-k vector (k groups) to a ``PenaltyResult``.
    """
    beta = _check(beta, partition)
    a = group_average_map(beta, partition)
    res = inner(a)
    theta = np.asarray(res.lam, dtype=float)
    if theta.shape != a.shape:
        raise DomainError("inner penalty returned a lam of the wrong length")
    labels = partition.labels
    num = np.abs(beta)
    den = a[labels]
    zero = den == 0
    share = np.where(zero, 1.0 / partition.sizes()[labels], num / np.where(zero, 1.0, den))
    return PenaltyResult(res.omega, theta[labels] * share, res.witness, res.converged)


class CompositePenalty:
    """Callable wrapper around :func:`composite_penalty`."""

    def __init__(self, partition: GroupPartition, inner):
        self.partition = partition
        self.inner = inner

    def __call__(self, beta) -> PenaltyResult:
        return composite_penalty(beta, self.partition, self.inner)

    def __repr__(self):
        return f"CompositePenalty({self.partition!r}, {self.inner!r})"


def lift_cone(inner: ConeSpec, partition: GroupPartition) -> ConeSpec:
    """Cone on ``R^n`` whose group totals satisfy the inner constraints."""
    if inner.n != len(partition):
        raise DomainError("inner cone size must equal the number of groups")
    M = np.zeros((len(partition), partition.n))
    M[partition.labels, np.arange(partition.n)] = 1.0
    return ConeSpec(inner.A @ M, partition.n)
