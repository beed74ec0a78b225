"""Tree penalty: ``lam_parent >= lam_child`` along every edge of a rooted tree.

The minimizer is constant on the blocks of a cut of the tree (connected
pieces left after deleting the cut edges), equal there to the root mean
square of ``beta``. The line graph recovers the wedge penalty.
"""
import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from ..core import DomainError, PenaltyResult, as_vector
from .wedge import TIE_TOL

__all__ = [
    "RootedTree",
    "TreeCut",
    "TreeCertificates",
    "tree_penalty",
    "tree_certificates",
    "TreePenalty",
]


class RootedTree:
    """Rooted tree on vertices ``0..n-1`` given by a parent array.

    Parameters
    ----------
    parent : sequence of int
        ``parent[v]`` is the parent of ``v``; the root has parent ``-1``
        (``None`` is accepted too).

    Edges are directed parent -> child and ordered by child index. The
    incidence matrix has ``+1`` at the parent and ``-1`` at the child, so
    ``A @ lam >= 0`` says ``lam`` does not increase going down the tree.
    """

    def __init__(self, parent: Sequence):
        par = [-1 if p is None else int(p) for p in parent]
        n = len(par)
        if n == 0:
            raise DomainError("tree needs at least one vertex")
        roots = [v for v, p in enumerate(par) if p == -1]
        if len(roots) != 1:
            raise DomainError(f"tree needs exactly one root, found {len(roots)}")
        if any(p < -1 or p >= n or p == v for v, p in enumerate(par)):
            raise DomainError("parent index out of range")
        self.n = n
        self.root = roots[0]
        self.parent = np.array(par, dtype=np.intp)
        self.children = [[] for _ in range(n)]
        for v, p in enumerate(par):
            if p >= 0:
                self.children[p].append(v)
        order = [self.root]
        for v in order:
            order.extend(self.children[v])
        if len(order) != n:
            raise DomainError("parent array has a cycle or is disconnected")
        self.order = np.array(order, dtype=np.intp)  # parents before children
        self.edges = [(int(par[v]), v) for v in range(n) if par[v] >= 0]
        self.edge_index = {e: i for i, e in enumerate(self.edges)}

    @classmethod
    def path(cls, n: int) -> "RootedTree":
        """Line graph ``0 -> 1 -> ... -> n-1``."""
        return cls([-1] + list(range(n - 1)))

    @classmethod
    def star(cls, n: int) -> "RootedTree":
        return cls([-1] + [0] * (n - 1))

    @classmethod
    def random(cls, n: int, rng) -> "RootedTree":
        """Random recursive tree: vertex ``v`` attaches to a uniform earlier vertex."""
        return cls([-1] + [int(rng.integers(0, v)) for v in range(1, n)])

    @property
    def m(self):
        return len(self.edges)

    def incidence_matrix(self) -> np.ndarray:
        A = np.zeros((self.m, self.n))
        for i, (p, c) in enumerate(self.edges):
            A[i, p] = 1.0
            A[i, c] = -1.0
        return A

    def descendants(self, v: int) -> list:
        """Vertices reachable from ``v``, including ``v`` itself."""
        out = [v]
        for u in out:
            out.extend(self.children[u])
        return sorted(out)

    def __repr__(self):
        return f"RootedTree(parent={self.parent.tolist()})"


class TreeCut:
    """A set of cut edges and the vertex blocks it induces."""

    def __init__(self, tree: RootedTree, edges: Iterable[Tuple[int, int]]):
        edges = frozenset((int(p), int(c)) for p, c in edges)
        bad = [e for e in edges if e not in tree.edge_index]
        if bad:
            raise DomainError(f"not edges of the tree: {sorted(bad)}")
        self.tree = tree
        self.edges = edges
        top = np.empty(tree.n, dtype=np.intp)
        for v in tree.order:
            p = tree.parent[v]
            top[v] = v if p < 0 or (int(p), int(v)) in edges else top[p]
        self.labels = top  # block label = topmost vertex of the block
        groups = {}
        for v in range(tree.n):
            groups.setdefault(int(top[v]), []).append(v)
        self.blocks = sorted(groups.values())

    @classmethod
    def from_labels(cls, tree: RootedTree, labels) -> "TreeCut":
        return cls(tree, [(p, c) for p, c in tree.edges if labels[p] != labels[c]])

    def __eq__(self, other):
        return isinstance(other, TreeCut) and self.edges == other.edges

    def __hash__(self):
        return hash(self.edges)

    def __repr__(self):
        return f"TreeCut(edges={sorted(self.edges)})"


@dataclass(frozen=True)
class TreeCertificates:
    """``zeta`` per edge (tree edge order) and candidate minimizer ``delta``."""

    zeta: np.ndarray
    delta: np.ndarray
    feasible: bool


def tree_penalty(beta, tree: RootedTree, tol: float = TIE_TOL) -> PenaltyResult:
    """Tree penalty, its minimizer and the optimal cut.

    Vertices are visited children-first. Each vertex starts its own block,
    then repeatedly absorbs the adjacent child block with the largest mean
    square while its own mean square is not strictly larger. Absorbed blocks
    hand their child blocks over, so a merge can expose new violators.
    """
    beta = as_vector(beta)
    if beta.size != tree.n:
        raise DomainError(f"beta has length {beta.size}, tree has {tree.n} vertices")
    sq = (beta * beta).tolist()
    scale = 1.0 + tol
    ssum = [0.0] * tree.n
    cnt = [0] * tree.n
    heaps = [None] * tree.n
    members = [None] * tree.n
    for v in tree.order[::-1].tolist():
        s = sq[v]
        c = 1
        mem = [v]
        heap = [(-ssum[w] / cnt[w], w) for w in tree.children[v]]
        heapq.heapify(heap)
        while heap:
            w = heap[0][1]
            if s * cnt[w] > ssum[w] * c * scale:
                break
            heapq.heappop(heap)
            s += ssum[w]
            c += cnt[w]
            mem.extend(members[w])
            hw = heaps[w]
            if len(hw) > len(heap):
                heap, hw = hw, heap
            for item in hw:
                heapq.heappush(heap, item)
            heaps[w] = members[w] = None
        ssum[v], cnt[v], heaps[v], members[v] = s, c, heap, mem
    lam = np.empty(tree.n)
    labels = np.empty(tree.n, dtype=np.intp)
    omega = 0.0
    for v in range(tree.n):
        if members[v] is None:
            continue
        idx = members[v]
        lam[idx] = np.sqrt(ssum[v] / cnt[v])
        labels[idx] = v
        omega += np.sqrt(ssum[v] * cnt[v])
    return PenaltyResult(float(omega), lam, TreeCut.from_labels(tree, labels))


def tree_certificates(beta, tree: RootedTree, cut: TreeCut,
                      tol: float = TIE_TOL) -> TreeCertificates:
    """Multipliers and candidate minimizer induced by a cut.

    For an edge ``(p, c)`` inside block ``V``, ``zeta`` is
    ``|V| * ||beta_D||^2 / ||beta_V||^2 - |D|`` where ``D`` is the set of
    descendants of ``c`` inside ``V``; cut edges get 0. The cut is optimal
    exactly when ``zeta >= 0``, ``delta`` does not increase along edges and
    strictly decreases across cut edges.
    """
    beta = as_vector(beta)
    if np.any(beta == 0):
        raise DomainError("certificates are defined only for nonzero beta")
    if beta.size != tree.n:
        raise DomainError("beta length does not match the tree")
    if cut.tree is not tree:
        cut = TreeCut(tree, cut.edges)
    sq = beta * beta
    labels = cut.labels
    bsum = np.bincount(labels, weights=sq, minlength=tree.n)
    bcnt = np.bincount(labels, minlength=tree.n)
    ms = np.zeros(tree.n)
    nz = bcnt > 0
    ms[nz] = bsum[nz] / bcnt[nz]
    delta = np.sqrt(ms[labels])
    # within-block subtree sums, children first
    sub_s = sq.copy()
    sub_c = np.ones(tree.n)
    for v in tree.order[::-1]:
        p = tree.parent[v]
        if p >= 0 and labels[p] == labels[v]:
            sub_s[p] += sub_s[v]
            sub_c[p] += sub_c[v]
    zeta = np.zeros(tree.m)
    ok = True
    for i, (p, c) in enumerate(tree.edges):
        lp, lc = labels[p], labels[c]
        if lp == lc:
            zeta[i] = bcnt[lc] * sub_s[c] / bsum[lc] - sub_c[c]
            if zeta[i] < -tol * bcnt[lc]:
                ok = False
        elif not ms[lp] > ms[lc] * (1.0 + tol):
            ok = False
    return TreeCertificates(zeta, delta, ok)


class TreePenalty:
    """Callable wrapper: ``TreePenalty(tree)(beta) -> PenaltyResult``."""

    def __init__(self, tree: RootedTree):
        self.tree = tree

    def __call__(self, beta) -> PenaltyResult:
        return tree_penalty(beta, self.tree)

    def __repr__(self):
        return f"TreePenalty({self.tree!r})"
