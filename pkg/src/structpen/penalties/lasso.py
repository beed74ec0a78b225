"""Lasso (no constraint beyond positivity) and the penalty gradient."""
import numpy as np

from ..core import DomainError, PenaltyResult, as_vector

__all__ = ["lasso_penalty", "LassoPenalty", "penalty_gradient"]


def lasso_penalty(beta) -> PenaltyResult:
    beta = as_vector(beta)
    ab = np.abs(beta)
    return PenaltyResult(float(ab.sum()), ab)


class LassoPenalty:
    def __call__(self, beta) -> PenaltyResult:
        return lasso_penalty(beta)

    def __repr__(self):
        return "LassoPenalty()"


def penalty_gradient(beta, result: PenaltyResult) -> np.ndarray:
    """Gradient ``beta_i / lam_i`` of a penalty at a point of differentiability.

    ``result`` must be the evaluation of the penalty at ``beta``.
    """
    beta = as_vector(beta)
    lam = np.asarray(result.lam, dtype=float)
    if lam.shape != beta.shape:
        raise DomainError("result does not match beta")
    if np.any(lam <= 0):
        raise DomainError("gradient undefined where lam_i = 0")
    return beta / lam
