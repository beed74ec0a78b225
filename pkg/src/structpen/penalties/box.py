"""Box penalty: ``lam_i`` constrained to ``[a_i, b_i]``."""
import numpy as np

from ..core import DomainError, PenaltyResult, as_vector

__all__ = ["Box", "box_penalty"]


class Box:
    """Coordinatewise interval constraint ``a <= lam <= b``.

    ``a_i = 0`` is allowed and is understood as a limit; ``a_i = b_i = 0``
    pins ``lam_i`` to zero, which forces ``beta_i = 0`` for a finite penalty.
    """

    def __init__(self, a, b):
        a = as_vector(a, "a")
        b = as_vector(b, "b")
        if a.shape != b.shape:
            raise DomainError("a and b must have the same length")
        if np.any(a < 0):
            raise DomainError("lower bounds must be nonnegative")
        if np.any(a > b):
            raise DomainError("box needs a_i <= b_i")
        self.a = a
        self.b = b

    @property
    def n(self):
        return self.a.size

    def __call__(self, beta) -> PenaltyResult:
        return box_penalty(beta, self)

    def __repr__(self):
        return f"Box(a={self.a.tolist()}, b={self.b.tolist()})"


def _half_sq_over(excess, bound):
    # (excess)_+^2 / (2 bound), with 0/0 := 0 and c/0 := inf
    excess = np.maximum(excess, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = excess ** 2 / (2.0 * bound)
    return np.where(excess == 0, 0.0, t)


def box_penalty(beta, box: Box) -> PenaltyResult:
    """Closed-form box penalty and its minimizer.

    ``lam = clip(|beta|, a, b)`` and the value is ``||beta||_1`` plus the two
    quadratic excess terms for coordinates falling outside their interval.
    """
    beta = as_vector(beta)
    if beta.size != box.n:
        raise DomainError(f"beta has length {beta.size}, box has {box.n}")
    ab = np.abs(beta)
    lam = np.clip(ab, box.a, box.b)
    omega = ab.sum() + _half_sq_over(box.a - ab, box.a).sum() \
        + _half_sq_over(ab - box.b, box.b).sum()
    return PenaltyResult(float(omega), lam)
