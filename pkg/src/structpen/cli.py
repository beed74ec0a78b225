"""Command-line interface: ``structpen {penalty,solve,experiment}``.

Vectors are given inline as comma-separated decimals or as a path to a
headerless CSV file. Matrices (``--X``, ``--A``) are dense headerless CSV.
Index-valued inputs and outputs (groups, trees, partitions) are 1-based.

Exit codes: 0 success, 2 bad input, 3 numeric non-convergence.
"""
import argparse
import json
import os
import sys

import numpy as np

from .bench import ExperimentSpec, run_experiment
from .core import ConvergenceError, DomainError, GroupPartition
from .penalties import (Box, CompositePenalty, ConePenalty, ConeSpec, ContiguousPartition,
                        GroupLassoPenalty, LassoPenalty, RootedTree, TreeCut, TreePenalty,
                        WedgePenalty, k_wedge_matrix)
from .solver import Problem, alternating_solve

__all__ = ["main", "build_parser", "read_vector", "read_matrix", "read_tree",
           "read_groups"]

KINDS = ("box", "wedge", "kwedge", "tree", "cone", "group", "composite")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    """Malformed user input; reported with exit code 2."""


def read_vector(text: str, name: str) -> np.ndarray:
    """Parse an inline vector or load a headerless CSV file."""
    try:
        if os.path.isfile(text):
            v = np.loadtxt(text, delimiter=",", ndmin=1, dtype=float).ravel()
        else:
            v = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise InputError(f"--{name}: {exc}") from None
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InputError(f"--{name}: expected finite numbers")
    return v


def read_matrix(path: str, name: str) -> np.ndarray:
    """Load a dense headerless CSV matrix."""
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except (OSError, ValueError) as exc:
        raise InputError(f"--{name}: {exc}") from None
    if M.size == 0 or not np.all(np.isfinite(M)):
        raise InputError(f"--{name}: expected a nonempty finite matrix")
    return M


def _lines(path, name):
    try:
        with open(path) as fh:
            return [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"--{name}: {exc}") from None


def read_tree(path: str) -> RootedTree:
    """Tree file with ``v,parent`` lines (1-based); the root's parent is empty."""
    parent = {}
    for ln in _lines(path, "tree"):
        parts = [p.strip() for p in ln.split(",")]
        if len(parts) != 2:
            raise InputError(f"--tree: bad line {ln!r}")
        try:
            v = int(parts[0])
            p = int(parts[1]) if parts[1] else 0
        except ValueError:
            raise InputError(f"--tree: bad line {ln!r}") from None
        if v in parent:
            raise InputError(f"--tree: vertex {v} listed twice")
        parent[v] = p
    n = len(parent)
    if sorted(parent) != list(range(1, n + 1)):
        raise InputError("--tree: vertices must be 1..n")
    try:
        return RootedTree([parent[v] - 1 for v in range(1, n + 1)])
    except DomainError as exc:
        raise InputError(f"--tree: {exc}") from None


def read_groups(path: str, n: int) -> GroupPartition:
    """Group file: one line per group, comma-separated 1-based indices."""
    try:
        blocks = [[int(t) - 1 for t in ln.split(",")] for ln in _lines(path, "groups")]
        return GroupPartition(blocks, n)
    except (ValueError, DomainError) as exc:
        raise InputError(f"--groups: {exc}") from None


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"--kind {args.kind} requires {' '.join(missing)}")


def make_penalty(args, n: int):
    """Penalty callable and witness formatter from parsed arguments."""
    kind = args.kind
    if kind == "lasso":
        return LassoPenalty()
    if kind == "wedge":
        return WedgePenalty()
    if kind == "box":
        _need(args, "a", "b")
        a, b = read_vector(args.a, "a"), read_vector(args.b, "b")
        if a.size == 1:
            a = np.full(n, a[0])
        if b.size == 1:
            b = np.full(n, b[0])
        if a.size != n or b.size != n:
            raise InputError("--a and --b must have one entry or the length of beta")
        return Box(a, b)
    if kind == "kwedge":
        _need(args, "k")
        return ConePenalty(k_wedge_matrix(n, args.k), warm_start=True, method="active-set")
    if kind == "cone":
        _need(args, "A")
        A = read_matrix(args.A, "A")
        if A.shape[1] != n:
            raise InputError(f"--A has {A.shape[1]} columns, expected {n}")
        return ConePenalty(ConeSpec(A), warm_start=True, method="active-set")
    if kind == "tree":
        _need(args, "tree")
        tree = read_tree(args.tree)
        if tree.n != n:
            raise InputError(f"--tree has {tree.n} vertices, expected {n}")
        return TreePenalty(tree)
    if kind in ("group", "composite"):
        _need(args, "groups")
        part = read_groups(args.groups, n)
        if kind == "group":
            return GroupLassoPenalty(part)
        inner = WedgePenalty() if args.inner == "wedge" else LassoPenalty()
        return CompositePenalty(part, inner)
    raise InputError(f"unknown penalty kind {kind!r}")


def _witness(w):
    if isinstance(w, ContiguousPartition):
        return [[i + 1 for i in b] for b in w.blocks()]
    if isinstance(w, TreeCut):
        return [[i + 1 for i in b] for b in w.blocks]
    return None


def _emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")


def cmd_penalty(args) -> int:
    beta = read_vector(args.beta, "beta")
    pen = make_penalty(args, beta.size)
    res = pen(beta)
    out = {"omega": res.omega, "lambda": np.asarray(res.lam).tolist()}
    part = _witness(res.witness)
    if part is not None:
        out["partition"] = part
    _emit(out)
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_solve(args) -> int:
    X = read_matrix(args.X, "X")
    y = read_vector(args.y, "y")
    prob = Problem(X, y, args.rho)
    pen = make_penalty(args, X.shape[1])
    res = alternating_solve(prob, pen)
    if args.trace:
        res.trace.to_csv(args.trace)
    _emit({"beta": res.beta.tolist(), "lambda": res.lam.tolist(),
           "objective": res.objective, "converged": bool(res.converged),
           "iters": int(res.iters)})
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_experiment(args) -> int:
    try:
        with open(args.spec) as fh:
            d = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InputError(f"--spec: {exc}") from None
    if not isinstance(d, dict):
        raise InputError("--spec must hold a JSON object")
    if args.seed is not None:
        d["seed"] = args.seed
    if args.full_scale:
        d.setdefault("n", 100)
        d.setdefault("trials", 50)
        d.setdefault("sample_sizes", list(range(10, 101, 5)))
    spec = ExperimentSpec.from_dict(d)
    res = run_experiment(spec, threads=args.threads)
    res.write(args.out)
    bad = sum(not r[4] for r in res.records)
    if bad:
        sys.stderr.write(f"{bad} solves did not converge; see summary.json\n")
    return EXIT_OK


def _penalty_options(p, kinds, default=None):
    p.add_argument("--kind" if default is None else "--penalty", dest="kind",
                   choices=kinds, required=default is None, default=default)
    p.add_argument("--a", help="box lower bounds (scalar or vector)")
    p.add_argument("--b", help="box upper bounds (scalar or vector)")
    p.add_argument("--k", type=int, help="order of the k-th difference cone")
    p.add_argument("--tree", help="parent file with 'v,parent' lines")
    p.add_argument("--A", help="cone matrix CSV, constraints A lam >= 0")
    p.add_argument("--groups", help="one comma-separated group per line")
    p.add_argument("--inner", choices=("wedge", "lasso"), default="wedge",
                   help="inner penalty of --kind composite")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="structpen",
                                     description="Structured sparsity penalties.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("penalty", help="evaluate a penalty and its minimizing lambda")
    p.add_argument("--beta", required=True)
    _penalty_options(p, KINDS)
    p.set_defaults(func=cmd_penalty)

    s = sub.add_parser("solve", help="penalized least squares")
    s.add_argument("--X", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--trace", help="write the iteration trace CSV here")
    _penalty_options(s, ("lasso",) + KINDS, default="lasso")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run a simulation experiment")
    e.add_argument("--spec", required=True, help="JSON experiment spec")
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--seed", type=int)
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--full-scale", action="store_true",
                   help="n=100, 50 trials, m up to 100 unless the spec says otherwise")
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"structpen: error: {exc}\n")
        return EXIT_INPUT
    except ConvergenceError as exc:
        sys.stderr.write(f"structpen: not converged: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
