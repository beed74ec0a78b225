"""Penalized least squares ``||X beta - y||^2 + 2 rho Omega(beta | Lambda)``.

The solver alternates an exact ridge (Tikhonov) step in ``beta`` with an
exact penalty step in ``lam`` at the smoothed point
``sqrt(beta**2 + eps)``, and drives ``eps`` to zero by continuation.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import DomainError, PenaltyResult, as_vector, phi_eps
from .penalties.wedge import wedge_penalty

__all__ = [
    "Problem",
    "SolverConfig",
    "SolverTrace",
    "SolveResult",
    "tikhonov_step",
    "dual_objective",
    "joint_objective",
    "objective",
    "alternating_solve",
    "orthogonal_solve",
]


class Problem:
    """Regression instance ``(X, y, rho)``."""

    def __init__(self, X, y, rho: float):
        X = np.asarray(X, dtype=float)
        y = as_vector(y, "y")
        if X.ndim != 2:
            raise DomainError("X must be a matrix")
        if X.shape[0] != y.size:
            raise DomainError(f"X has {X.shape[0]} rows, y has {y.size} entries")
        if not np.all(np.isfinite(X)):
            raise DomainError("X has non-finite entries")
        if not rho > 0:
            raise DomainError("rho must be positive")
        self.X = X
        self.y = y
        self.rho = float(rho)
        self.Xty = X.T @ y
        self._XtX = None

    @property
    def shape(self):
        return self.X.shape

    @property
    def XtX(self):
        if self._XtX is None:
            self._XtX = self.X.T @ self.X
        return self._XtX


def _default_schedule():
    return tuple(10.0 ** -k for k in range(2, 17))


@dataclass
class SolverConfig:
    """Continuation schedule and stopping rule.

    A stage stops when the relative change of the smoothed objective is
    below ``tol`` and the max-norm change of ``beta`` is below
    ``step_tol * max(1, ||beta||_inf)``; ``max_iter`` applies to each
    ``eps`` stage.
    The schedule ends at 1e-16: a coordinate thresholded to zero keeps a
    residue of order ``sqrt(eps)``.
    """

    eps_schedule: Sequence[float] = field(default_factory=_default_schedule)
    tol: float = 1e-10
    step_tol: float = 1e-10
    max_iter: int = 5000
    accelerate: bool = True

    def __post_init__(self):
        eps = np.asarray(self.eps_schedule, dtype=float)
        if eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
            raise DomainError("eps_schedule must be positive and strictly decreasing")
        if not (self.tol > 0 and self.step_tol > 0 and self.max_iter > 0):
            raise DomainError("tol, step_tol and max_iter must be positive")


@dataclass
class SolverTrace:
    """Half-step records of the alternating iteration.

    Each iteration contributes two rows: the objective after the ``beta``
    step and after the ``lam`` step. ``omega`` is the penalty of the
    smoothed iterate ``sqrt(beta**2 + eps)``.
    """

    iteration: List[int] = field(default_factory=list)
    eps: List[float] = field(default_factory=list)
    half: List[str] = field(default_factory=list)
    objective: List[float] = field(default_factory=list)
    l1: List[float] = field(default_factory=list)
    omega: List[float] = field(default_factory=list)

    def append(self, it, eps, half, obj, l1, omega):
        self.iteration.append(it)
        self.eps.append(eps)
        self.half.append(half)
        self.objective.append(obj)
        self.l1.append(l1)
        self.omega.append(omega)

    def __len__(self):
        return len(self.objective)

    def stages(self):
        """Yield ``(eps, objectives)`` per continuation stage."""
        eps = np.asarray(self.eps)
        obj = np.asarray(self.objective)
        for e in dict.fromkeys(self.eps):
            yield e, obj[eps == e]

    def max_increase(self) -> float:
        """Largest relative increase between consecutive half-steps of a stage."""
        worst = 0.0
        for _, obj in self.stages():
            if obj.size > 1:
                d = np.diff(obj) / np.maximum(np.abs(obj[:-1]), 1e-300)
                worst = max(worst, float(d.max()))
        return worst

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iteration,eps,half,objective,l1,omega\n")
            for row in zip(self.iteration, self.eps, self.half, self.objective,
                           self.l1, self.omega):
                fh.write("%d,%r,%s,%r,%r,%r\n" % row)


@dataclass
class SolveResult:
    beta: np.ndarray
    lam: np.ndarray
    trace: SolverTrace
    converged: bool
    iters: int
    objective: float


def _check_lam(prob, lam):
    lam = as_vector(lam, "lam")
    if lam.size != prob.X.shape[1]:
        raise DomainError(f"lam has length {lam.size}, X has {prob.X.shape[1]} columns")
    if np.any(lam < 0):
        raise DomainError("lam must be nonnegative")
    return lam


def tikhonov_step(prob: Problem, lam) -> np.ndarray:
    """Minimizer of ``||y - X beta||^2 + rho * sum(beta**2 / lam)`` over ``beta``.

    Solves the m x m system ``(X diag(lam) X^T + rho I) u = y`` and returns
    ``diag(lam) X^T u`` when ``m <= n``; otherwise the symmetric n x n form
    ``(D X^T X D + rho I)`` with ``D = diag(sqrt(lam))``. Coordinates with
    ``lam_i = 0`` come out exactly zero.
    """
    lam = _check_lam(prob, lam)
    X, y, rho = prob.X, prob.y, prob.rho
    m, n = X.shape
    if m <= n:
        K = (X * lam) @ X.T
        K[np.diag_indices(m)] += rho
        u = cho_solve(cho_factor(K), y)
        return lam * (X.T @ u)
    d = np.sqrt(lam)
    B = d[:, None] * prob.XtX * d[None, :]
    B[np.diag_indices(n)] += rho
    return d * cho_solve(cho_factor(B), d * prob.Xty)


def dual_objective(prob: Problem, lam) -> float:
    """``rho * y^T (X diag(lam) X^T + rho I)^{-1} y + rho * sum(lam)``.

    Equals ``min_beta joint_objective(prob, beta, lam)``.
    """
    lam = _check_lam(prob, lam)
    X, y, rho = prob.X, prob.y, prob.rho
    K = (X * lam) @ X.T
    K[np.diag_indices(X.shape[0])] += rho
    return float(rho * y @ cho_solve(cho_factor(K), y) + rho * lam.sum())


def joint_objective(prob: Problem, beta, lam, eps: float = 0.0) -> float:
    """``||y - X beta||^2 + 2 rho gamma(sqrt(beta**2 + eps), lam)``.

    Coordinates with ``lam_i = 0`` must have ``beta_i = 0`` and contribute
    nothing (continuous extension).
    """
    beta = as_vector(beta)
    lam = np.asarray(lam, dtype=float)
    r = prob.y - prob.X @ beta
    pos = lam > 0
    if np.any(beta[~pos] != 0):
        return np.inf
    g = np.sum((beta[pos] ** 2 + eps) / lam[pos]) + np.sum(lam)
    return float(r @ r + prob.rho * g)


def objective(prob: Problem, beta, penalty: Callable[[np.ndarray], PenaltyResult]) -> float:
    """``||X beta - y||^2 + 2 rho Omega(beta)``."""
    beta = as_vector(beta)
    r = prob.X @ beta - prob.y
    return float(r @ r + 2.0 * prob.rho * penalty(beta).omega)


def alternating_solve(prob: Problem, penalty: Callable[[np.ndarray], PenaltyResult],
                      cfg: Optional[SolverConfig] = None, lam0=None) -> SolveResult:
    """Alternating minimization with ``eps`` continuation.

    For each ``eps`` in the schedule, iterate
    ``beta <- tikhonov_step(prob, lam)`` and
    ``lam <- penalty(sqrt(beta**2 + eps)).lam`` until the relative change of
    the smoothed objective and the step in ``beta`` are small (see
    :class:`SolverConfig`), then warm-start the
    next stage. The returned ``beta`` is the ridge step at the final
    ``lam``.

    With ``cfg.accelerate`` every three plain iterates are extrapolated
    (squared polynomial extrapolation); the extrapolated ``lam`` is kept
    only if it does not raise the smoothed objective, so the recorded
    objective stays monotone and the fixed point is unchanged.

    Parameters
    ----------
    prob : Problem
    penalty : callable
        Returns the exact minimizer of ``gamma(beta, .)`` over the
        constraint set, e.g. ``WedgePenalty()``.
    cfg : SolverConfig, optional
    lam0 : array_like, optional
        Starting point; defaults to ``||X^T y||_inf`` times all-ones.

    Returns
    -------
    SolveResult
        ``converged`` is False if some stage hit ``max_iter``; the iterate
        is still returned.
    """
    cfg = cfg or SolverConfig()
    n = prob.X.shape[1]
    if lam0 is None:
        lam = np.full(n, max(float(np.max(np.abs(prob.Xty))), 1e-12))
    else:
        lam = _check_lam(prob, lam0)
    trace = SolverTrace()
    converged = True
    total = 0
    cached = None  # ridge step already computed for the current lam
    for eps in cfg.eps_schedule:
        prev = None
        prev_beta = None
        stage_ok = False
        chain = []
        for it in range(cfg.max_iter):
            beta = tikhonov_step(prob, lam) if cached is None else cached
            cached = None
            theta = joint_objective(prob, beta, lam, eps)
            res = penalty(phi_eps(beta, eps))
            lam = np.asarray(res.lam, dtype=float)
            nu = joint_objective(prob, beta, lam, eps)
            l1 = float(np.abs(beta).sum())
            trace.append(total, eps, "beta", theta, l1, res.omega)
            trace.append(total, eps, "lam", nu, l1, res.omega)
            total += 1
            if prev is not None and abs(prev - nu) <= cfg.tol * max(abs(nu), 1e-300):
                step = np.max(np.abs(beta - prev_beta))
                if step <= cfg.step_tol * max(1.0, np.max(np.abs(beta))):
                    stage_ok = True
                    break
            prev, prev_beta = nu, beta
            if not cfg.accelerate:
                continue
            chain.append(beta)
            if len(chain) < 3:
                continue
            b0, b1, b2 = chain
            chain = [b2]
            r = b1 - b0
            v = b2 - 2.0 * b1 + b0
            nv = np.linalg.norm(v)
            if nv == 0:
                continue
            alpha = -np.linalg.norm(r) / nv
            if alpha >= -1.0:
                continue
            trial = b0 - 2.0 * alpha * r + alpha * alpha * v
            lam_c = np.asarray(penalty(phi_eps(trial, eps)).lam, dtype=float)
            beta_c = tikhonov_step(prob, lam_c)
            if joint_objective(prob, beta_c, lam_c, eps) <= nu:
                lam, cached = lam_c, beta_c
                chain = []
        converged = converged and stage_ok
    beta = tikhonov_step(prob, lam) if cached is None else cached
    return SolveResult(beta, lam, trace, converged, total, objective(prob, beta, penalty))


def orthogonal_solve(y, rho: float, kind: str = "lasso"):
    """Closed-form solution for ``X = I`` (or ``X^T X = I`` with ``y -> X^T y``).

    Returns ``(beta, lam)`` with ``lam = (lam(y) - rho)_+`` and
    ``beta_i = lam_i y_i / (lam_i + rho)``, where ``lam(y)`` is ``|y|`` for the
    Lasso and the wedge minimizer for ``kind="wedge"``. For the Lasso this
    is soft thresholding.
    """
    y = as_vector(y, "y")
    if not rho > 0:
        raise DomainError("rho must be positive")
    if kind == "lasso":
        base = np.abs(y)
    elif kind == "wedge":
        base = wedge_penalty(y).lam
    else:
        raise DomainError(f"unknown kind {kind!r}")
    lam = np.maximum(base - rho, 0.0)
    return lam * y / (lam + rho), lam
