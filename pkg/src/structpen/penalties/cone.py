"""Numeric penalty for a polyhedral cone ``{lam > 0 : A lam >= 0}``.

Used wherever no closed form is known: k-th order wedges, general DAGs,
composite constraint sets. The minimization of ``gamma(beta, .)`` is done
with a log-barrier interior point method (damped Newton steps, barrier
weight decreased geometrically).
"""
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import linprog

from ..core import ConvergenceError, DomainError, PenaltyResult, as_vector

__all__ = [
    "ConeSpec",
    "BarrierConfig",
    "k_wedge_matrix",
    "wedge_cone",
    "orthant_cone",
    "strictly_feasible_point",
    "cone_penalty_numeric",
    "cone_penalty_active_set",
    "dual_norm",
    "dual_norm_lp",
    "ConePenalty",
]


class ConeSpec:
    """Constraint matrix ``A`` (m x n) of the cone ``{lam > 0 : A lam >= 0}``.

    ``m`` may be zero, giving the whole positive orthant.
    """

    def __init__(self, A, n=None):
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1) if A.size else np.zeros((0, n or 0))
        if A.ndim != 2:
            raise DomainError("A must be a matrix")
        if A.shape[0] == 0 and n is not None:
            A = np.zeros((0, n))
        if n is not None and A.shape[1] != n:
            raise DomainError(f"A has {A.shape[1]} columns, expected {n}")
        if not np.all(np.isfinite(A)):
            raise DomainError("A has non-finite entries")
        self.A = A
        self.A.flags.writeable = False   # the interior point is cached
        self._interior = None

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def m(self):
        return self.A.shape[0]

    def contains(self, lam, atol=1e-12) -> bool:
        """Membership of ``lam`` in the closure of the cone."""
        lam = np.asarray(lam, dtype=float)
        return bool(np.all(lam >= -atol) and np.all(self.A @ lam >= -atol))

    def __repr__(self):
        return f"ConeSpec(m={self.m}, n={self.n})"


@dataclass
class BarrierConfig:
    """Knobs of the barrier method.

    The barrier weight runs from ``mu0`` down to ``tol`` by ``mu_factor``;
    the lower bound ``lam >= floor`` follows it from ``floor0`` down to
    ``floor_min``. Values refer to ``beta`` rescaled to unit max-norm.
    """

    tol: float = 1e-12
    mu0: float = 1.0
    mu_factor: float = 10.0
    floor0: float = 1e-2
    floor_min: float = 1e-10
    max_iter: int = 200
    newton_tol: float = 1e-14


def k_wedge_matrix(n: int, k: int) -> ConeSpec:
    """k-th order difference constraints.

    Row ``j`` encodes ``lam[j+k] + sum_{l=1..k} (-1)**l * C(k, l) * lam[j+k-l]``,
    so for ``k = 1`` the cone holds nondecreasing vectors and for ``k = 2``
    convex ones.
    """
    if not (1 <= k < n):
        raise DomainError(f"need 1 <= k < n, got k={k}, n={n}")
    A = np.zeros((n - k, n))
    coef = np.array([(-1) ** l * comb(k, l) for l in range(k + 1)], dtype=float)
    for j in range(n - k):
        A[j, j + k - np.arange(k + 1)] = coef
    return ConeSpec(A)


def wedge_cone(n: int) -> ConeSpec:
    """Nonincreasing vectors, rows ``lam[j] - lam[j+1] >= 0``."""
    A = np.zeros((max(n - 1, 0), n))
    idx = np.arange(n - 1)
    A[idx, idx] = 1.0
    A[idx, idx + 1] = -1.0
    return ConeSpec(A, n)


def orthant_cone(n: int) -> ConeSpec:
    return ConeSpec(np.zeros((0, n)), n)


def strictly_feasible_point(cone: ConeSpec) -> np.ndarray:
    """A point with ``lam > 0`` and ``A lam > 0``.

    Tries the decreasing ramp and the all-ones vector, then falls back to
    the linear program ``max s : A lam >= s, lam >= s, sum(lam) = n``.
    Raises ``DomainError`` when the optimal ``s`` is not positive.
    """
    cached = getattr(cone, "_interior", None)
    if cached is not None:
        return cached.copy()
    pt = _strictly_feasible_point(cone)
    cone._interior = pt
    return pt.copy()


def _strictly_feasible_point(cone):
    n, A = cone.n, cone.A
    for cand in (np.arange(n, 0, -1, dtype=float), np.ones(n)):
        if cone.m == 0 or np.all(A @ cand > 0):
            return cand
    # variables (lam, s); minimize -s
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.vstack([
        np.hstack([-A, np.ones((cone.m, 1))]),
        np.hstack([-np.eye(n), np.ones((n, 1))]),
    ])
    b_ub = np.zeros(cone.m + n)
    A_eq = np.hstack([np.ones((1, n)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[float(n)],
                  bounds=[(None, None)] * n + [(None, 1.0)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12:
        raise DomainError("cone has no strictly feasible point")
    return res.x[:n]


def _barrier_newton(sq, A, lam, mu, floor, cfg):
    # Damped Newton on gamma(beta, lam) - mu * (sum log(A lam) + sum log(lam - floor)).
    def value(x):
        s = A @ x
        d = x - floor
        if np.any(s <= 0) or np.any(d <= 0):
            return np.inf
        return 0.5 * np.sum(sq / x + x) - mu * (np.sum(np.log(s)) + np.sum(np.log(d)))

    f = value(lam)
    for it in range(cfg.max_iter):
        s = A @ lam
        d = lam - floor
        g = 0.5 * (1.0 - sq / lam ** 2) - mu * (A.T @ (1.0 / s)) - mu / d
        H = (A.T * (mu / s ** 2)) @ A
        H[np.diag_indices_from(H)] += sq / lam ** 3 + mu / d ** 2
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -g / np.diag(H)
        dec = -g @ step
        if dec / 2 <= cfg.newton_tol * max(1.0, abs(f)):
            return lam, True
        # largest step keeping strict feasibility
        t = 1.0
        As = A @ step
        neg = As < 0
        if np.any(neg):
            t = min(t, 0.99 * np.min(-s[neg] / As[neg]))
        neg = step < 0
        if np.any(neg):
            t = min(t, 0.99 * np.min(-d[neg] / step[neg]))
        while True:
            cand = lam + t * step
            fc = value(cand)
            if fc <= f - 0.25 * t * dec or t < 1e-16:
                break
            t *= 0.5
        if not np.isfinite(fc) or fc > f:
            return lam, dec / 2 <= 1e-9 * max(1.0, abs(f))
        lam, f = cand, fc
    return lam, False


def cone_penalty_numeric(beta, cone: ConeSpec, cfg: BarrierConfig = None,
                         lam0=None) -> PenaltyResult:
    """Minimize ``gamma(beta, .)`` over the closure of a polyhedral cone.

    Parameters
    ----------
    beta : array_like
        Point of evaluation.
    cone : ConeSpec
        Constraint matrix; must admit a strictly feasible point.
    cfg : BarrierConfig, optional
    lam0 : array_like, optional
        Strictly feasible starting point (for warm starts). It is ignored if
        it is not strictly feasible.

    Raises
    ------
    DomainError
        If the cone has no strictly feasible point.
    ConvergenceError
        If a Newton stage exhausts ``cfg.max_iter``.
    """
    cfg = cfg or BarrierConfig()
    beta = as_vector(beta)
    if beta.size != cone.n:
        raise DomainError(f"beta has length {beta.size}, cone has {cone.n} columns")
    scale = float(np.max(np.abs(beta)))
    if scale == 0.0:
        strictly_feasible_point(cone)
        return PenaltyResult(0.0, np.zeros(beta.size))
    sq = (beta / scale) ** 2
    A = cone.A
    lam = None
    if lam0 is not None:
        lam = np.asarray(lam0, dtype=float) / scale
        if not (np.all(lam > 0) and np.all(A @ lam > 0)):
            lam = None
    if lam is None:
        lam = strictly_feasible_point(cone)
        lam = lam / np.max(lam)
    floor = min(cfg.floor0, 0.5 * np.min(lam))
    mu = cfg.mu0
    ok = True
    while True:
        lam, conv = _barrier_newton(sq, A, lam, mu, floor, cfg)
        ok = ok and conv
        if mu <= cfg.tol:
            break
        mu = max(mu / cfg.mu_factor, cfg.tol)
        floor = max(min(floor, mu), cfg.floor_min)
    if not ok:
        raise ConvergenceError("barrier Newton did not converge")
    lam_out = lam * scale
    omega = 0.5 * float(np.sum(sq / lam + lam)) * scale
    return PenaltyResult(omega, lam_out, info={"mu": mu})


def _null_space(M, n):
    if M.shape[0] == 0:
        return np.eye(n)
    _, sv, vt = np.linalg.svd(M)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0])))
    return vt[rank:].T


def _active_set_step(A, S, lam, d, f, dec, w2):
    # Armijo step along d, stopped early at the first inactive constraint
    # that would turn negative. Returns (new lam, blocking index or None),
    # or None when no decrease is measurable.
    t_max = np.inf
    neg = d < 0
    if np.any(neg):
        t_max = 0.99 * float(np.min(-lam[neg] / d[neg]))
    blocking = None
    inactive = np.setdiff1d(np.arange(A.shape[0]), S)
    if inactive.size:
        Ad = A[inactive] @ d
        Al = np.maximum(A[inactive] @ lam, 0.0)
        dec_rows = Ad < -1e-15 * np.abs(d).max()
        if np.any(dec_rows):
            ratios = Al[dec_rows] / -Ad[dec_rows]
            k = int(np.argmin(ratios))
            if ratios[k] <= min(1.0, t_max):
                t_max = ratios[k]
                blocking = int(inactive[dec_rows][k])
    t = min(1.0, t_max)
    if blocking is not None:
        # moving onto the blocking face along a descent direction
        cand = lam + t * d
        if np.all(cand > 0) and 0.5 * float(np.sum(w2 / cand + cand)) <= f:
            return cand, blocking
        blocking = None
    for _ in range(60):
        cand = lam + t * d
        if np.all(cand > 0):
            fc = 0.5 * float(np.sum(w2 / cand + cand))
            if fc <= f - 1e-4 * t * dec:
                return cand, None
        t *= 0.5
    return None


def cone_penalty_active_set(beta, cone: ConeSpec, tol: float = 1e-13,
                            max_iter: int = 500, lam0=None) -> PenaltyResult:
    """Cone penalty by a primal active-set Newton method.

    Keeps a working set ``S`` of constraints held at equality and takes
    Newton steps for ``gamma(beta, .)`` restricted to ``{A_S lam = 0}``
    (null-space form, so tiny ``|beta_i|`` do not spoil the conditioning).
    A step that would violate an inactive constraint stops there and adds
    it to ``S``; at a working-set optimum the constraint with the most
    negative multiplier leaves ``S``. Warm starting from a nearby
    minimizer usually means one or two Newton steps, which is what the
    alternating solver needs.

    Parameters
    ----------
    beta : array_like
        Entries must be nonzero (``phi_eps`` guarantees this inside the
        solver); use :func:`cone_penalty_numeric` otherwise.
    cone : ConeSpec
    tol : float
        Newton decrement and multiplier tolerance, relative.
    lam0 : array_like, optional
        Feasible starting point; constraints active at ``lam0`` (to 1e-9
        relative) form the initial working set.

    Raises
    ------
    DomainError
        Zero entries in ``beta``.
    ConvergenceError
        No optimum within ``max_iter`` steps.
    """
    beta = as_vector(beta)
    n = beta.size
    if n != cone.n:
        raise DomainError(f"beta has length {n}, cone has {cone.n} columns")
    if np.any(beta == 0):
        raise DomainError("active-set method needs nonzero entries")
    scale = float(np.max(np.abs(beta)))
    w2 = (beta / scale) ** 2
    A = cone.A
    if cone.m == 0:
        ab = np.abs(beta)
        return PenaltyResult(float(ab.sum()), ab, info={"active": ()})
    S = []
    lam = None
    if lam0 is not None:
        lam = np.asarray(lam0, dtype=float) / scale
        r = A @ lam
        big = max(1.0, float(np.max(np.abs(lam))))
        if lam.shape != (n,) or np.any(lam <= 0) or np.any(r < -1e-9 * big):
            lam = None
        else:
            S = np.flatnonzero(r <= 1e-9 * big).tolist()
            Z = _null_space(A[S], n)
            # move onto the working face; fall back if that breaks feasibility
            lam = Z @ (Z.T @ lam)
            if np.any(lam <= 0) or np.any(A @ lam < -1e-12 * big):
                lam, S = None, []
    if lam is None:
        lam = strictly_feasible_point(cone)
        lam = lam * np.sqrt(w2.mean()) / lam.mean()
    Z = _null_space(A[S], n)
    for it in range(max_iter):
        g = 0.5 * (1.0 - w2 / lam ** 2)
        f = 0.5 * float(np.sum(w2 / lam + lam))
        h = w2 / lam ** 3
        gz = Z.T @ g
        if Z.shape[1]:
            Hz = (Z.T * h) @ Z
            try:
                pz = -np.linalg.solve(Hz, gz)
            except np.linalg.LinAlgError:
                pz = -np.linalg.lstsq(Hz, gz, rcond=None)[0]
            d = Z @ pz
            dec = -float(gz @ pz)
        else:
            d = np.zeros(n)
            dec = 0.0
        face_done = dec <= tol * f
        if not face_done:
            step = _active_set_step(A, S, lam, d, f, dec, w2)
            if step is None:
                # rounding floor: no measurable decrease left on this face
                if dec > 1e-8 * f:
                    raise ConvergenceError("active-set line search failed")
                face_done = True
            else:
                lam, blocking = step
                if blocking is not None:
                    S.append(blocking)
                    Z = _null_space(A[S], n)
                    lam = Z @ (Z.T @ lam)       # remove drift off the face
                continue
        if face_done:
            # decrement ~ error**2: one more full step makes lam as accurate as omega
            cand = lam + d
            if dec > 0 and np.all(cand > 0) and np.all(A @ cand >= -1e-12 * np.max(cand)):
                lam = cand
                g = 0.5 * (1.0 - w2 / lam ** 2)
            # optimal on this face; check multipliers of A_S^T alpha = g
            if not S:
                break
            alpha = np.linalg.lstsq(A[S].T, g, rcond=None)[0]
            j = int(np.argmin(alpha))
            if alpha[j] >= -1e-10 * max(1.0, float(np.max(np.abs(alpha)))):
                break
            S.pop(j)
            Z = _null_space(A[S], n)
            continue
    else:
        raise ConvergenceError("active-set Newton did not converge")
    omega = 0.5 * float(np.sum(w2 / lam + lam)) * scale
    return PenaltyResult(omega, lam * scale, info={"active": tuple(sorted(S)), "iters": it})


def dual_norm(beta, cone: ConeSpec) -> float:
    """Dual norm ``sup sqrt(sum lam * beta**2)`` over the cone slice ``sum lam = 1``.

    Closed forms are used for the orthant (max-norm) and recognised wedge
    cones (``max_q ||beta[:q]||_2 / sqrt(q)``); otherwise the linear program
    over the slice is solved exactly.
    """
    beta = as_vector(beta)
    n = beta.size
    if cone.n != n:
        raise DomainError("cone size does not match beta")
    sq = beta * beta
    if cone.m == 0:
        return float(np.sqrt(sq.max()))
    if cone.A.shape == (n - 1, n) and np.array_equal(cone.A, wedge_cone(n).A):
        q = np.arange(1, n + 1)
        return float(np.sqrt(np.max(np.cumsum(sq) / q)))
    return dual_norm_lp(beta, cone)


def dual_norm_lp(beta, cone: ConeSpec) -> float:
    """Dual norm by linear programming, with no closed-form shortcuts."""
    beta = as_vector(beta)
    n = beta.size
    strictly_feasible_point(cone)
    res = linprog(-(beta * beta), A_ub=-cone.A if cone.m else None,
                  b_ub=np.zeros(cone.m) if cone.m else None,
                  A_eq=np.ones((1, n)), b_eq=[1.0],
                  bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        raise ConvergenceError(f"dual norm LP failed: {res.message}")
    return float(np.sqrt(max(-res.fun, 0.0)))


class ConePenalty:
    """Callable wrapper around the numeric cone evaluators.

    Parameters
    ----------
    cone : ConeSpec
    cfg : BarrierConfig, optional
        Used by the barrier method only.
    warm_start : bool
        Seed each call with the previous minimizer; handy inside alternating
        solvers where successive arguments are close. Makes the object
        stateful, so do not share one instance between threads.
    method : {"barrier", "active-set"}
        :func:`cone_penalty_numeric` or :func:`cone_penalty_active_set`.
        The active-set method falls back to the barrier for inputs with
        zero entries or if it fails to converge.
    """

    def __init__(self, cone: ConeSpec, cfg: BarrierConfig = None, warm_start=False,
                 method: str = "barrier"):
        if method not in ("barrier", "active-set"):
            raise DomainError(f"unknown method {method!r}")
        self.cone = cone
        self.cfg = cfg or BarrierConfig()
        self.warm_start = warm_start
        self.method = method
        self._last = None

    def __call__(self, beta) -> PenaltyResult:
        last = self._last if self.warm_start else None
        if self.method == "active-set":
            try:
                r = cone_penalty_active_set(beta, self.cone, lam0=last)
            except (DomainError, ConvergenceError):
                r = cone_penalty_numeric(beta, self.cone, self.cfg)
            if self.warm_start:
                self._last = r.lam if np.all(r.lam > 0) else None
            return r
        r = cone_penalty_numeric(beta, self.cone, self.cfg, last)
        if self.warm_start:
            center = strictly_feasible_point(self.cone)
            self._last = r.lam + 1e-3 * np.max(r.lam) * center / np.max(center)
        return r

    def __repr__(self):
        return f"ConePenalty({self.cone!r}, method={self.method!r})"
