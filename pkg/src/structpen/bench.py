"""Noiseless regression experiments comparing structured penalties.

Each trial draws a sparse model ``beta_star`` and, for every sample size
``m``, a Gaussian design with unit-norm columns; ``y = X beta_star`` is then
interpolated with a tiny ``rho`` by each method and the model error
``||beta_hat - beta_star||^2 / ||beta_star||^2`` is recorded.

Method names
------------
``lasso``
    Plain l1 penalty.
``box-a``, ``box-b``, ``box-c``
    Box around ``|beta_star|`` with radius 5, 1 and 0.001;
    ``box-printed-a`` etc. use the alternative bounds of
    :func:`box_from_oracle`.
``wedge``
    Nonincreasing ``lam``.
``c-wedge``
    Group totals of ``lam`` over consecutive blocks are nonincreasing.
``w1`` .. ``w4``
    Sign-adjusted k-th order cones ``(-1)**k D^k lam >= 0``; see
    :func:`polynomial_cone`.
``w1-raw`` .. ``w4-raw``
    The unadjusted cones ``D^k lam >= 0`` of
    :func:`~structpen.penalties.k_wedge_matrix`.
``gl-lin``, ``gl-ind``, ``gl-hie``, ``gl-con``
    Unweighted group Lasso ``sum_g ||beta_g||_2`` with nested tail groups,
    the blocks, nested block tails and block prefixes/suffixes.
"""
import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import DomainError, GroupPartition
from .penalties import (Box, CompositePenalty, ConePenalty, ConeSpec, LassoPenalty,
                        WedgePenalty, k_wedge_matrix)
from .solver import Problem, SolverConfig, alternating_solve, tikhonov_step

__all__ = [
    "MODEL_KINDS",
    "METHODS",
    "BOX_RADII",
    "default_methods",
    "generate_design",
    "generate_model",
    "box_from_oracle",
    "model_error",
    "polynomial_cone",
    "group_lists",
    "group_lasso_solve",
    "make_solver",
    "bench_config",
    "ExperimentSpec",
    "ExperimentResult",
    "run_experiment",
]

_POLYS = {
    1: lambda t: -(t + 5.0),
    2: lambda t: (t + 6.0) * (t - 2.0),
    3: lambda t: -(t + 6.5) * t * (t - 1.5),
    4: lambda t: (t + 6.5) * (t - 2.5) * (t + 1.0) * t,
}

MODEL_KINDS = (("box10", "wedge10", "wedge10-perturbed", "composite6")
               + tuple(f"poly{k}" for k in _POLYS)
               + tuple(f"poly-random{k}" for k in _POLYS))

BOX_RADII = {"box-a": 5.0, "box-b": 1.0, "box-c": 0.001}

_PRINTED = {"box-printed-" + k[4:]: k for k in BOX_RADII}

METHODS = (("lasso", "wedge", "c-wedge") + tuple(BOX_RADII) + tuple(_PRINTED)
           + tuple(f"w{k}" for k in _POLYS) + tuple(f"w{k}-raw" for k in _POLYS)
           + ("gl-lin", "gl-ind", "gl-hie", "gl-con"))


def default_methods(kind: str) -> Tuple[str, ...]:
    """Methods compared for a model kind by default."""
    if kind == "box10":
        return ("lasso", "box-a", "box-b", "box-c")
    if kind in ("wedge10", "wedge10-perturbed"):
        return ("lasso", "wedge", "gl-lin")
    if kind == "composite6":
        return ("lasso", "c-wedge", "gl-ind", "gl-hie", "gl-con")
    if kind in MODEL_KINDS:
        return ("lasso", "w1", "w2", "w3", "w4")
    raise DomainError(f"unknown model kind {kind!r}")


def generate_design(m: int, n: int, rng) -> np.ndarray:
    """``m x n`` standard normal matrix with columns scaled to unit l2 norm."""
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    X = rng.standard_normal((m, n))
    return X / np.linalg.norm(X, axis=0)


def _block_size(n):
    if n % 10:
        raise DomainError(f"composite6 needs n divisible by 10, got {n}")
    return n // 10


def generate_model(kind: str, rng, n: int = 100) -> np.ndarray:
    """Draw a regression vector of length ``n``.

    Parameters
    ----------
    kind : str
        One of :data:`MODEL_KINDS`.
    rng : numpy.random.Generator
    n : int
        Length. The recipes are stated for ``n = 100``; for other ``n`` the
        polynomial grid step is ``10 / n`` (same interval ``[-7, 3)``) and
        the composite blocks have size ``n / 10``.

    Returns
    -------
    ndarray
    """
    if kind == "box10":
        if n < 10:
            raise DomainError("box10 needs n >= 10")
        beta = np.zeros(n)
        pos = rng.choice(n, size=10, replace=False)
        vals = rng.integers(1, 11, size=10) * rng.choice([-1.0, 1.0], size=10)
        beta[pos] = vals
        return beta
    if kind in ("wedge10", "wedge10-perturbed"):
        if n < 10:
            raise DomainError("wedge10 needs n >= 10")
        beta = np.zeros(n)
        beta[:10] = np.arange(10, 0, -1)
        if kind == "wedge10-perturbed":
            if n < 21:
                raise DomainError("wedge10-perturbed needs n >= 21")
            # 1-based positions 20..n
            beta[rng.choice(np.arange(19, n), size=2, replace=False)] = 10.0
        return beta
    if kind == "composite6":
        s = _block_size(n)
        beta = np.zeros(n)
        for i in range(6):
            beta[i * s + rng.integers(s)] = 30.0 - i
        return beta
    for prefix in ("poly-random", "poly"):
        if kind.startswith(prefix) and kind[len(prefix):] in ("1", "2", "3", "4"):
            t = -7.0 + (10.0 / n) * np.arange(n)
            v = np.maximum(_POLYS[int(kind[len(prefix):])](t), 0.0)
            v *= 10.0 / v.max()
            if prefix == "poly-random":
                nz = v > 0
                v[nz] = rng.uniform(1.0, 2.0, size=int(nz.sum()))
            return v
    raise DomainError(f"unknown model kind {kind!r}")


def box_from_oracle(beta_star, r: float, printed: bool = False) -> Box:
    """Box ``[a, b]`` of radius ``r`` around ``|beta_star|``.

    By default ``a = (|beta_star| - r)_+`` and ``b = |beta_star| + r``. With
    ``printed=True`` the bounds are ``a = (r - |beta_star|)_+`` and
    ``b = (|beta_star| - r)_+``, clipped so that ``a <= b``; these do not
    contain ``|beta_star|`` and are kept only for comparison runs.
    """
    if not r >= 0:
        raise DomainError("radius must be nonnegative")
    s = np.abs(np.asarray(beta_star, dtype=float))
    if printed:
        a = np.maximum(r - s, 0.0)
        b = np.maximum(s - r, 0.0)
        return Box(np.minimum(a, b), b)
    return Box(np.maximum(s - r, 0.0), s + r)


def model_error(beta_hat, beta_star) -> float:
    """``||beta_hat - beta_star||^2 / ||beta_star||^2``."""
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    if beta_hat.shape != beta_star.shape:
        raise DomainError("beta_hat and beta_star differ in shape")
    den = float(beta_star @ beta_star)
    if den == 0:
        raise DomainError("beta_star is zero")
    d = beta_hat - beta_star
    return float(d @ d) / den


def polynomial_cone(n: int, k: int) -> ConeSpec:
    """Cone ``(-1)**k D^k lam >= 0``: nonincreasing for ``k = 1``, convex for ``k = 2``.

    Equivalent to :func:`k_wedge_matrix` applied to the reversed vector.
    Positive parts of degree-k polynomials whose leading coefficient has
    sign ``(-1)**k`` on the left end of the grid lie in it, which is how
    the ``poly`` models are built.
    """
    A = k_wedge_matrix(n, k).A[:, ::-1]
    return ConeSpec(np.ascontiguousarray(A), n)


def group_lists(name: str, n: int) -> List[np.ndarray]:
    """Groups of the group Lasso baselines (0-based)."""
    if name == "gl-lin":
        return [np.arange(l, n) for l in range(n)]
    s = _block_size(n)
    blocks = [np.arange(i * s, (i + 1) * s) for i in range(10)]
    if name == "gl-ind":
        return blocks
    if name == "gl-hie":
        return [np.arange(i * s, n) for i in range(10)]
    if name == "gl-con":
        out = []
        for b in blocks:
            for q in range(1, s):
                out.append(b[:q])
                out.append(b[-q:])
        return out
    raise DomainError(f"unknown group family {name!r}")


@dataclass
class _GLResult:
    beta: np.ndarray
    converged: bool
    iters: int


def group_lasso_solve(prob: Problem, groups: Sequence[np.ndarray],
                      cfg: Optional[SolverConfig] = None) -> _GLResult:
    """Minimize ``||X beta - y||^2 + 2 rho sum_g ||beta_g||_2`` for overlapping groups.

    Uses ``||v|| = min_eta (||v||^2 / eta + eta) / 2`` per group: with
    ``eta_g = sqrt(||beta_g||^2 + eps)`` fixed the problem is a ridge step
    with ``1 / lam_i = sum_{g ni i} 1 / eta_g``. Same continuation and
    stopping rule as :func:`~structpen.solver.alternating_solve`, without
    extrapolation.
    """
    cfg = cfg or SolverConfig()
    n = prob.X.shape[1]
    rows = np.concatenate([np.full(len(g), k) for k, g in enumerate(groups)])
    cols = np.concatenate(groups)
    if np.bincount(cols, minlength=n).min() == 0:
        raise DomainError("groups must cover every coordinate")
    G = np.zeros((len(groups), n))
    G[rows, cols] = 1.0
    lam = np.full(n, max(float(np.max(np.abs(prob.Xty))), 1e-12))
    converged = True
    total = 0
    beta = tikhonov_step(prob, lam)
    for eps in cfg.eps_schedule:
        prev = None
        stage_ok = False
        for _ in range(cfg.max_iter):
            eta = np.sqrt(G @ (beta * beta) + eps)
            lam = 1.0 / (G.T @ (1.0 / eta))
            new = tikhonov_step(prob, lam)
            r = prob.y - prob.X @ new
            obj = float(r @ r) + 2.0 * prob.rho * float(np.sum(np.sqrt(G @ (new * new) + eps)))
            total += 1
            step = np.max(np.abs(new - beta))
            beta = new
            if prev is not None and abs(prev - obj) <= cfg.tol * max(abs(obj), 1e-300):
                if step <= cfg.step_tol * max(1.0, np.max(np.abs(beta))):
                    stage_ok = True
                    break
            prev = obj
        converged = converged and stage_ok
    return _GLResult(beta, converged, total)


def bench_config() -> SolverConfig:
    """Solver settings for the experiments.

    Model errors are reported to a few digits, so the schedule stops at
    1e-12 and the tolerances are looser than the library defaults.
    """
    return SolverConfig(eps_schedule=tuple(10.0 ** -k for k in range(2, 13)),
                        tol=1e-9, step_tol=1e-7, max_iter=20000)


def make_solver(method: str, beta_star, cfg: Optional[SolverConfig] = None):
    """Return ``solve(prob) -> (beta, converged)`` for a method name."""
    n = np.asarray(beta_star).size
    cfg = cfg or bench_config()
    if method.startswith("gl-"):
        groups = group_lists(method, n)
        return lambda prob: _unpack(group_lasso_solve(prob, groups, cfg))
    if method == "lasso":
        pen = LassoPenalty
    elif method in BOX_RADII:
        box = box_from_oracle(beta_star, BOX_RADII[method])
        pen = lambda: box
    elif method in _PRINTED:
        box = box_from_oracle(beta_star, BOX_RADII[_PRINTED[method]], printed=True)
        pen = lambda: box
    elif method == "wedge":
        pen = WedgePenalty
    elif method == "c-wedge":
        part = GroupPartition.contiguous([_block_size(n)] * 10)
        pen = lambda: CompositePenalty(part, WedgePenalty())
    elif len(method) >= 2 and method[0] == "w" and method[1] in "1234" and \
            method[2:] in ("", "-raw"):
        k = int(method[1])
        cone = polynomial_cone(n, k) if method[2:] == "" else k_wedge_matrix(n, k)
        pen = lambda: ConePenalty(cone, warm_start=True, method="active-set")
    else:
        raise DomainError(f"unknown method {method!r}")
    # fresh penalty per solve: the warm-started cone penalty is stateful
    return lambda prob: _unpack(alternating_solve(prob, pen(), cfg))


def _unpack(res):
    return res.beta, bool(res.converged)


def _sample_sizes_default():
    return tuple(range(10, 61, 5))


@dataclass
class ExperimentSpec:
    """Experiment description.

    Attributes
    ----------
    model : str
        One of :data:`MODEL_KINDS`.
    n : int
        Number of features.
    sample_sizes : sequence of int
        Strictly increasing values of ``m``.
    trials : int
    seed : int
    methods : sequence of str, optional
        Defaults to :func:`default_methods` of the model.
    rho : float
    """

    model: str
    n: int = 50
    sample_sizes: Sequence[int] = field(default_factory=_sample_sizes_default)
    trials: int = 20
    seed: int = 0
    methods: Optional[Sequence[str]] = None
    rho: float = 1e-8

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise DomainError(f"unknown model kind {self.model!r}")
        self.n = int(self.n)
        self.trials = int(self.trials)
        self.seed = int(self.seed)
        self.rho = float(self.rho)
        self.sample_sizes = tuple(int(m) for m in self.sample_sizes)
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if not self.sample_sizes or min(self.sample_sizes) < 1 or \
                any(b <= a for a, b in zip(self.sample_sizes, self.sample_sizes[1:])):
            raise DomainError("sample_sizes must be positive and strictly increasing")
        if not self.rho > 0:
            raise DomainError("rho must be positive")
        self.methods = tuple(self.methods) if self.methods else default_methods(self.model)
        for name in self.methods:
            if name not in METHODS:
                raise DomainError(f"unknown method {name!r}")
        generate_model(self.model, np.random.default_rng(0), self.n)

    @classmethod
    def full_scale(cls, model: str, **kw) -> "ExperimentSpec":
        """Original protocol size: ``n = 100``, 50 trials, ``m = 10, 15, ..., 100``."""
        kw.setdefault("sample_sizes", tuple(range(10, 101, 5)))
        return cls(model, n=100, trials=50, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sample_sizes"] = list(self.sample_sizes)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        if not isinstance(d, dict) or "model" not in d:
            raise DomainError("spec must be an object with a 'model' field")
        known = {"model", "n", "sample_sizes", "trials", "seed", "methods", "rho"}
        extra = set(d) - known
        if extra:
            raise DomainError(f"unknown spec fields {sorted(extra)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise DomainError(str(exc)) from exc


@dataclass
class ExperimentResult:
    """Per-trial model errors of an experiment.

    ``records`` holds ``(method, m, trial, model_error, converged)`` tuples,
    sorted by method order, ``m`` and trial.
    """

    spec: ExperimentSpec
    records: List[Tuple[str, int, int, float, bool]]

    def errors(self, method: str, m: int) -> np.ndarray:
        return np.array([r[3] for r in self.records if r[0] == method and r[1] == m])

    def mean(self, method: str, m: int) -> float:
        return float(np.mean(self.errors(method, m)))

    def summary(self) -> List[dict]:
        """One dict per (method, m) cell: mean, stderr, trials, nonconverged."""
        out = []
        for method in self.spec.methods:
            for m in self.spec.sample_sizes:
                cell = [r for r in self.records if r[0] == method and r[1] == m]
                e = np.array([r[3] for r in cell])
                se = float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else 0.0
                out.append({"method": method, "m": m, "mean": float(e.mean()),
                            "stderr": se, "trials": int(e.size),
                            "nonconverged": sum(not r[4] for r in cell)})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "m", "trial", "model_error"])
        for method, m, trial, me, _ in self.records:
            w.writerow([method, m, trial, repr(me)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"spec": self.spec.to_dict(), "cells": self.summary()}, indent=2)

    def write(self, out_dir) -> None:
        """Write ``results.csv`` and ``summary.json`` into ``out_dir``."""
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "results.csv"), "w", newline="") as fh:
            fh.write(self.to_csv())
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            fh.write(self.to_json() + "\n")

    @staticmethod
    def read_csv(path) -> List[Tuple[str, int, int, float]]:
        """Parse a ``results.csv`` file."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return [(r["method"], int(r["m"]), int(r["trial"]), float(r["model_error"]))
                for r in rows]


def _run_trial(spec: ExperimentSpec, trial: int):
    beta_star = generate_model(spec.model, np.random.default_rng([spec.seed, trial]), spec.n)
    rows = []
    for m in spec.sample_sizes:
        X = generate_design(m, spec.n, np.random.default_rng([spec.seed, trial, m]))
        prob = Problem(X, X @ beta_star, spec.rho)
        for method in spec.methods:
            beta, ok = make_solver(method, beta_star)(prob)
            rows.append((method, m, trial, model_error(beta, beta_star), ok))
    return rows


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ExperimentResult:
    """Run every trial, sample size and method of ``spec``.

    Trial ``t`` draws its model from ``default_rng([seed, t])`` and the
    design for sample size ``m`` from ``default_rng([seed, t, m])``, so
    results do not depend on ``threads``. Non-convergence is recorded per
    cell, never raised.
    """
    trials = range(spec.trials)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            chunks = list(ex.map(_run_trial, [spec] * spec.trials, trials))
    else:
        chunks = [_run_trial(spec, t) for t in trials]
    order = {name: k for k, name in enumerate(spec.methods)}
    records = sorted((r for c in chunks for r in c), key=lambda r: (order[r[0]], r[1], r[2]))
    return ExperimentResult(spec, records)
