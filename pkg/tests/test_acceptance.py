"""Acceptance suite: one test (or test group) per criterion.

Each test records a ``criterion N: PASS/FAIL`` line through the ``report``
fixture; the lines are repeated in the pytest terminal summary.
Criterion 10 runs the desk-scale experiments (several minutes).
"""
import time

import numpy as np
import pytest

from structpen.bench import ExperimentSpec, run_experiment
from structpen.core import GroupPartition, l1_norm
from structpen.oracle import (finite_diff_gradient, tree_bruteforce, wedge_bruteforce,
                              wedge_bruteforce_batch)
from structpen.penalties import (Box, CompositePenalty, ConePenalty, LassoPenalty,
                                 RootedTree, TreePenalty, WedgePenalty,
                                 composite_penalty,
                                 cone_penalty_numeric, k_wedge_matrix, lift_cone,
                                 penalty_gradient, tree_penalty, wedge_cone,
                                 wedge_penalty)
from structpen.solver import (Problem, alternating_solve, dual_objective, objective,
                              orthogonal_solve)

# mean model errors at or below this count as exact recovery
ME_FLOOR = 1e-6


def _mask(cuts):
    return sum(1 << (j - 1) for j in cuts)


# ---------------------------------------------------------------- criterion 1

def test_c1_wedge_matches_enumeration(report):
    t0 = time.perf_counter()
    vals = np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
    absval = np.array([2.0, 1.0, 0.5])
    code_to_abs = np.array([0, 1, 2, 2, 1, 0])
    worst, bad_part, total = 0.0, 0, 0
    for n in range(1, 9):
        codes = np.indices((6,) * n, dtype=np.uint8).reshape(n, -1).T
        # every signed row maps to one of the 3**n rows of absolute values
        ucodes = np.indices((3,) * n, dtype=np.uint8).reshape(n, -1).T
        om, masks, cnt = wedge_bruteforce_batch(absval[ucodes])
        assert np.all(cnt == 1)
        abs_idx = code_to_abs[codes] @ (3 ** np.arange(n - 1, -1, -1))
        for row, u in zip(vals[codes], abs_idx):
            r = wedge_penalty(row)
            worst = max(worst, abs(r.omega - om[u]) / om[u])
            bad_part += _mask(r.witness.cuts) != masks[u]
        total += codes.shape[0]
    rng = np.random.default_rng(1)
    for _ in range(1000):
        b = rng.standard_normal(int(rng.integers(1, 13)))
        r, o = wedge_penalty(b), wedge_bruteforce(b)
        worst = max(worst, abs(r.omega - o.omega) / o.omega)
        bad_part += tuple(r.witness.cuts) != tuple(o.witness.cuts)
        total += 1
    secs = time.perf_counter() - t0
    ok = worst <= 1e-10 and bad_part == 0 and secs < 120
    assert report("1", ok, f"{total} vectors, max rel err {worst:.1e}, "
                  f"partition mismatches {bad_part}, {secs:.0f}s")


# ---------------------------------------------------------------- criterion 2

def test_c2_tree_matches_enumeration(report):
    rng = np.random.default_rng(2)
    worst, bad_part = 0.0, 0
    for _ in range(200):
        tree = RootedTree.random(int(rng.integers(1, 11)), rng)
        for _ in range(20):
            b = rng.standard_normal(tree.n)
            r, o = tree_penalty(b, tree), tree_bruteforce(b, tree)
            worst = max(worst, abs(r.omega - o.omega) / o.omega,
                        float(np.max(np.abs(r.lam - o.lam) / o.lam)))
            bad_part += r.witness.edges != o.witness.edges
    # path trees: same partition as the wedge, values equal up to roundoff
    path_worst, path_bad = 0.0, 0
    for _ in range(500):
        n = int(rng.integers(1, 40))
        b = rng.standard_normal(n)
        r, w = tree_penalty(b, RootedTree.path(n)), wedge_penalty(b)
        path_bad += sorted(c for _, c in r.witness.edges) != list(w.witness.cuts)
        path_worst = max(path_worst, abs(r.omega - w.omega) / w.omega,
                         float(np.max(np.abs(r.lam - w.lam) / w.lam)))
    ok = worst <= 1e-9 and bad_part == 0 and path_bad == 0 and path_worst <= 1e-14
    assert report("2", ok, f"4000 pairs, max rel err {worst:.1e}; path trees: "
                  f"partition mismatches {path_bad}, max rel err {path_worst:.1e}")


# ---------------------------------------------------------------- criterion 3

def _closed_form(b):
    b = np.abs(np.asarray(b, dtype=float))
    s = b * b
    if b.size == 2:
        return b.sum() if b[0] > b[1] else np.sqrt(2.0 * s.sum())
    if b[0] > b[1] > b[2]:
        return b.sum()
    if b[0] <= b[1] and (s[0] + s[1]) / 2 > s[2]:
        return np.sqrt(2.0 * (s[0] + s[1])) + b[2]
    if b[1] <= b[2] and s[0] > (s[1] + s[2]) / 2:
        return b[0] + np.sqrt(2.0 * (s[1] + s[2]))
    return np.sqrt(3.0 * s.sum())


@pytest.mark.parametrize("beta, expected", [
    ((2.0, 1.0), 3.0),
    ((1.0, 2.0), np.sqrt(10.0)),
    ((-1.0, 1.0), 2.0),
    ((3.0, 2.0, 1.0), 6.0),
    ((1.0, 2.0, 1.0), np.sqrt(10.0) + 1.0),
    ((3.0, 1.0, -2.0), 3.0 + np.sqrt(10.0)),
    ((1.0, 1.0, 1.0), 3.0),
    ((1.0, 2.0, 3.0), np.sqrt(42.0)),
])
def test_c3_closed_forms(report, beta, expected):
    got = wedge_penalty(beta).omega
    ok = got == _closed_form(beta) and got == pytest.approx(expected, rel=1e-15)
    assert report("3", ok, f"beta={beta}: {got!r}")


# ---------------------------------------------------------------- criterion 4

def _random_box(n, rng):
    a = rng.uniform(0.0, 1.0, n)
    return Box(a, a + rng.uniform(0.1, 1.0, n))


def _random_pair(i, rng):
    n = int(rng.integers(1, 11))
    kind = i % 5
    if kind == 0:
        pen = _random_box(n, rng)
    elif kind == 1:
        pen = WedgePenalty()
    elif kind == 2:
        pen = TreePenalty(RootedTree.random(n, rng))
    elif kind == 3:
        sizes = rng.integers(1, 4, int(rng.integers(1, 5)))
        pen = CompositePenalty(GroupPartition.contiguous(sizes), WedgePenalty())
        n = int(sizes.sum())
    else:
        pen = LassoPenalty()
    return pen, rng.standard_normal(n)


def _member(kind, rng):
    """(penalty, beta) with ``|beta|`` in the closure of the constraint set."""
    n = int(rng.integers(2, 9))
    sign = rng.choice([-1.0, 1.0], n)
    if kind == "box":
        box = _random_box(n, rng)
        return box, sign * rng.uniform(box.a, box.b)
    if kind == "wedge":
        return WedgePenalty(), sign * np.sort(rng.uniform(0.1, 2.0, n))[::-1]
    if kind == "tree":
        tree = RootedTree.random(n, rng)
        mag = np.empty(n)
        for v in tree.order:
            p = tree.parent[v]
            mag[v] = rng.uniform(0.5, 2.0) if p < 0 else mag[p] * rng.uniform(0.5, 1.0)
        return TreePenalty(tree), sign * mag
    k = int(rng.integers(1, min(3, n - 1) + 1))
    u = rng.uniform(0.0, 1.0, n)
    u[0] += 0.1
    for _ in range(k):
        u = np.cumsum(u)
    return ConePenalty(k_wedge_matrix(n, k), method="active-set"), sign * u


def _non_member(kind, rng):
    """Move one entry of a member out of the constraint set."""
    pen, b = _member(kind, rng)
    n = b.size
    if kind == "box":
        j = int(rng.integers(n))
        b[j] = np.sign(b[j]) * (pen.b[j] + rng.uniform(0.1, 1.0))
    elif kind == "wedge":
        j = int(rng.integers(1, n))
        b[j] = np.sign(b[j]) * abs(b[j - 1]) * rng.uniform(1.1, 2.0)
    elif kind == "tree":
        v = int(rng.choice([v for v in range(n) if pen.tree.parent[v] >= 0]))
        p = pen.tree.parent[v]
        b[v] = np.sign(b[v]) * abs(b[p]) * rng.uniform(1.1, 2.0)
    else:
        # raise an entry with a negative coefficient until its row goes negative
        A = pen.cone.A
        r = int(rng.integers(A.shape[0]))
        j = int(rng.choice(np.flatnonzero(A[r] < 0)))
        excess = A[r] @ np.abs(b) + 0.5 * np.max(np.abs(b))
        b[j] = np.sign(b[j]) * (abs(b[j]) + excess / -A[r, j])
    return pen, b


def test_c4_l1_lower_bound(report):
    rng = np.random.default_rng(4)
    worst_bound = np.inf
    for i in range(10_000):
        pen, b = _random_pair(i, rng)
        worst_bound = min(worst_bound, (pen(b).omega - l1_norm(b)) / l1_norm(b))
    eq_err, min_gap, n_cases = 0.0, np.inf, 0
    for kind in ("box", "wedge", "tree", "cone"):
        for _ in range(200):
            pen, b = _member(kind, rng)
            eq_err = max(eq_err, abs(pen(b).omega - l1_norm(b)))
            pen, b = _non_member(kind, rng)
            min_gap = min(min_gap, pen(b).omega - l1_norm(b))
            n_cases += 2
    ok = worst_bound >= -1e-14 and eq_err <= 1e-9 and min_gap >= 1e-6
    assert report("4", ok, f"10000 random pairs, min (Omega - l1)/l1 {worst_bound:.1e}; "
                  f"{n_cases} constructed: member err {eq_err:.1e}, "
                  f"non-member gap {min_gap:.1e}")


# ---------------------------------------------------------------- criterion 5

def test_c5_gradient(report):
    rng = np.random.default_rng(5)
    worst = 0.0
    for kind in ("box", "wedge", "tree"):
        for _ in range(100):
            n = int(rng.integers(2, 11))
            b = rng.choice([-1.0, 1.0], n) * rng.uniform(0.1, 2.0, n)
            if kind == "box":
                pen = _random_box(n, rng)
            elif kind == "wedge":
                pen = WedgePenalty()
            else:
                pen = TreePenalty(RootedTree.random(n, rng))
            g = penalty_gradient(b, pen(b))
            fd = finite_diff_gradient(pen, b)
            worst = max(worst, float(np.max(np.abs(g - fd)) / np.max(np.abs(g))))
    assert report("5", worst <= 1e-5, f"300 points, max rel err {worst:.1e}")


# ------------------------------------------------------- criteria 6, 7 and 8

def _instance_penalty(i, n, rng):
    kind = i % 5
    if kind == 0:
        return LassoPenalty()
    if kind == 1:
        return _random_box(n, rng)
    if kind == 2:
        return WedgePenalty()
    if kind == 3:
        return TreePenalty(RootedTree.random(n, rng))
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(n - 1, 3), replace=False))
    sizes = np.diff(np.concatenate([[0], cuts, [n]]))
    return CompositePenalty(GroupPartition.contiguous(sizes), WedgePenalty())


@pytest.fixture(scope="module")
def duality_runs():
    rng = np.random.default_rng(6)
    runs = []
    for i in range(50):
        m, n = (int(v) for v in rng.integers(2, 31, 2))
        prob = Problem(rng.standard_normal((m, n)), rng.standard_normal(m),
                       rng.uniform(0.05, 1.0))
        pen = _instance_penalty(i, n, rng)
        runs.append((prob, pen, alternating_solve(prob, pen)))
    return runs


@pytest.fixture(scope="module")
def orthogonal_runs():
    rng = np.random.default_rng(7)
    runs = []
    for i in range(100):
        X, _ = np.linalg.qr(rng.standard_normal((12, 8)))
        y, rho = rng.standard_normal(12), rng.uniform(0.1, 1.0)
        prob = Problem(X, y, rho)
        for kind, pen in (("lasso", LassoPenalty()), ("wedge", WedgePenalty())):
            res = alternating_solve(prob, pen)
            runs.append((kind, prob, res, orthogonal_solve(X.T @ y, rho, kind)[0]))
    return runs


def test_c6_duality(report, duality_runs):
    worst = 0.0
    for prob, pen, res in duality_runs:
        H = dual_objective(prob, res.lam)
        worst = max(worst, abs(H - objective(prob, res.beta, pen)) / (1 + abs(H)))
    assert report("6", worst <= 1e-6, f"50 instances, max |H - obj|/(1+|H|) {worst:.1e}")


def test_c7_orthogonal_design(report, orthogonal_runs):
    worst = {"lasso": 0.0, "wedge": 0.0}
    for kind, _, res, closed in orthogonal_runs:
        worst[kind] = max(worst[kind], float(np.max(np.abs(res.beta - closed))))
    ok = max(worst.values()) <= 1e-6
    assert report("7", ok, f"100 (y, rho), max l_inf err lasso {worst['lasso']:.1e}, "
                  f"wedge {worst['wedge']:.1e}")


def test_c8_monotone_and_converged(report, duality_runs, orthogonal_runs):
    results = [r for _, _, r in duality_runs] + [r for _, _, r, _ in orthogonal_runs]
    worst = max(r.trace.max_increase() for r in results)
    n_bad = sum(not r.converged for r in results)
    ok = worst <= 1e-12 and n_bad == 0
    assert report("8", ok, f"{len(results)} solves, max stage increase {worst:.1e}, "
                  f"not converged {n_bad}")


# ---------------------------------------------------------------- criterion 9

def test_c9_composite_vs_lifted_cone(report):
    rng = np.random.default_rng(9)
    worst = 0.0
    for i in range(50):
        L = int(rng.integers(2, 5))
        sizes = rng.integers(1, 4, L)
        n = int(sizes.sum())
        labels = rng.permutation(np.repeat(np.arange(L), sizes))
        part = GroupPartition([np.flatnonzero(labels == l) for l in range(L)], n)
        if i % 2 == 0 or L < 3:
            inner_cone, inner = wedge_cone(L), WedgePenalty()
        else:
            inner_cone = k_wedge_matrix(L, 2)
            inner = ConePenalty(inner_cone)
        b = rng.choice([-1.0, 1.0], n) * rng.uniform(0.2, 2.0, n)
        got = composite_penalty(b, part, inner).omega
        ref = cone_penalty_numeric(b, lift_cone(inner_cone, part)).omega
        worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    assert report("9", worst <= 1e-6, f"50 instances, max err {worst:.1e}")


# --------------------------------------------------------------- criterion 10

_EXPERIMENTS = {
    "box10": ("lasso", "box-a", "box-b", "box-c"),
    "wedge10": ("lasso", "wedge"),
    "composite6": ("lasso", "c-wedge"),
    "poly1": ("lasso", "w1"),
    "poly2": ("lasso", "w2"),
    "poly3": ("lasso", "w3"),
    "poly4": ("lasso", "w4"),
}


@pytest.fixture(scope="module")
def experiments():
    t0 = time.perf_counter()
    out = {kind: run_experiment(ExperimentSpec(model=kind, n=50, trials=20, seed=0,
                                               methods=methods))
           for kind, methods in _EXPERIMENTS.items()}
    return out, time.perf_counter() - t0


def _leq(a, b):
    return a <= b + ME_FLOOR


def _beats(a, b):
    return a < b or max(a, b) <= ME_FLOOR


def _check_chain(res, chain, m_min, rel):
    failures = []
    for m in res.spec.sample_sizes:
        if m < m_min:
            continue
        means = [res.mean(meth, m) for meth in chain]
        if not all(rel(x, y) for x, y in zip(means, means[1:])):
            failures.append(f"m={m}: " + ", ".join(f"{c}={v:.2e}" for c, v in zip(chain, means)))
    return failures


@pytest.mark.slow
def test_c10_runtime_and_convergence(report, experiments):
    results, secs = experiments
    n_bad = sum(not r[4] for res in results.values() for r in res.records)
    ok = secs <= 900 and n_bad == 0
    assert report("10 runtime", ok, f"{secs:.0f}s for all experiments, "
                  f"not converged {n_bad}")


@pytest.mark.slow
def test_c10a_box(report, experiments):
    fails = _check_chain(experiments[0]["box10"], ("box-c", "box-b", "box-a", "lasso"),
                         15, _leq)
    assert report("10a", not fails, "; ".join(fails) or "box-c <= box-b <= box-a <= lasso")


@pytest.mark.slow
def test_c10b_wedge(report, experiments):
    fails = _check_chain(experiments[0]["wedge10"], ("wedge", "lasso"), 20, _leq)
    assert report("10b", not fails, "; ".join(fails) or "wedge <= lasso")


@pytest.mark.slow
def test_c10c_composite(report, experiments):
    fails = _check_chain(experiments[0]["composite6"], ("c-wedge", "lasso"), 25, _leq)
    assert report("10c", not fails, "; ".join(fails) or "c-wedge <= lasso")


@pytest.mark.slow
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_c10d_polynomial(report, experiments, k):
    fails = _check_chain(experiments[0][f"poly{k}"], (f"w{k}", "lasso"), 25, _beats)
    assert report(f"10d k={k}", not fails, "; ".join(fails) or f"w{k} beats lasso")


# --------------------------------------------------------------- criterion 11

def _best_time(b, reps=3):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        wedge_penalty(b)
        best = min(best, time.perf_counter() - t0)
    return best


def test_c11_linear_time_wedge(report):
    rng = np.random.default_rng(11)
    t5 = _best_time(rng.standard_normal(10 ** 5))
    t6 = _best_time(rng.standard_normal(10 ** 6))
    ratio = t6 / t5
    assert report("11", ratio <= 20, f"time(1e6)/time(1e5) = {ratio:.1f} "
                  f"({t6:.2f}s / {t5:.3f}s)")
