"""Slow, independent references for the fast penalty evaluators.

Nothing here is meant for production use. The enumerations visit every
contiguous partition (resp. every tree cut), evaluate the optimality
certificates from scratch and insist that exactly one candidate passes.
``numeric_reference`` minimizes over a polyhedral cone by a route that
shares no code with the barrier method.
"""
import numpy as np

from .core import ConvergenceError, DomainError, PenaltyResult, as_vector
from .penalties.cone import ConeSpec, strictly_feasible_point
from .penalties.tree import RootedTree, TreeCut
from .penalties.wedge import TIE_TOL, ContiguousPartition

__all__ = [
    "WEDGE_MAX_N",
    "TREE_MAX_EDGES",
    "wedge_bruteforce",
    "wedge_bruteforce_batch",
    "tree_bruteforce",
    "numeric_reference",
    "finite_diff_gradient",
    "is_admissible",
    "merge_history",
]

WEDGE_MAX_N = 20
TREE_MAX_EDGES = 18


def _cut_bits(n_cuts):
    # every subset of n_cuts positions, one row per subset, lexicographic by mask
    masks = np.arange(2 ** n_cuts, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n_cuts)) & 1).astype(bool)


def _wedge_feasible(sq, bits, tol):
    """Feasibility of every partition in ``bits`` for every row of ``sq``.

    ``sq`` is (N, n), ``bits`` is (M, n-1); returns (N, M) booleans together
    with the (N, M) penalty values.
    """
    N, n = sq.shape
    M = bits.shape[0]
    c = np.concatenate([np.zeros((N, 1)), np.cumsum(sq, axis=1)], axis=1)
    idx = np.arange(n)
    is_start = np.concatenate([np.ones((M, 1), bool), bits], axis=1)
    st = np.maximum.accumulate(np.where(is_start, idx, 0), axis=1)
    is_end = np.concatenate([bits, np.ones((M, 1), bool)], axis=1)
    en = np.minimum.accumulate(np.where(is_end, idx + 1, n)[:, ::-1], axis=1)[:, ::-1]
    size = en - st                                  # (M, n)
    tot = c[:, en] - c[:, st]                       # (N, M, n)
    ms = tot / size
    # prefix condition at each non-cut boundary q (between q-1 and q)
    q = idx[1:]
    a = st[:, 1:]                                   # block start of element q
    sz = size[:, 1:]
    pref = c[:, q][:, None, :] - c[:, a]
    zeta = (q - a) - sz * pref / tot[:, :, 1:]
    inner_ok = np.all(bits | (zeta >= -tol * sz), axis=2)
    # strict decrease of mean squares across cuts
    drop_ok = np.all(~bits | (ms[:, :, :-1] > ms[:, :, 1:] * (1.0 + tol)), axis=2)
    # value: sum over blocks of sqrt(|J| * ||beta_J||^2), charged at block starts
    val = np.sum(np.where(is_start, np.sqrt(size * tot), 0.0), axis=2)
    return inner_ok & drop_ok, val


def wedge_bruteforce_batch(B, tol: float = TIE_TOL):
    """Enumerate all contiguous partitions for each row of ``B``.

    Parameters
    ----------
    B : ndarray, shape (N, n)
        Rows without zero entries; ``n <= 8`` keeps memory modest.

    Returns
    -------
    omega : ndarray, shape (N,)
    masks : ndarray of int, shape (N,)
        Cut set of the feasible partition as a bit mask (bit ``j-1`` set
        when there is a cut before index ``j``).
    count : ndarray of int, shape (N,)
        Number of feasible partitions; uniqueness means all ones.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise DomainError("B must be a matrix")
    if np.any(B == 0):
        raise DomainError("enumeration needs nonzero entries")
    n = B.shape[1]
    if n > WEDGE_MAX_N:
        raise DomainError(f"n={n} exceeds the enumeration limit {WEDGE_MAX_N}")
    if n == 1:
        N = B.shape[0]
        return np.abs(B[:, 0]), np.zeros(N, np.int64), np.ones(N, np.int64)
    bits = _cut_bits(n - 1)
    N = B.shape[0]
    omega = np.empty(N)
    first = np.empty(N, np.int64)
    count = np.empty(N, np.int64)
    step = max(1, (1 << 21) // (bits.shape[0] * n))
    for lo in range(0, N, step):
        hi = min(N, lo + step)
        ok, val = _wedge_feasible(B[lo:hi] ** 2, bits, tol)
        count[lo:hi] = ok.sum(axis=1)
        first[lo:hi] = np.argmax(ok, axis=1)
        omega[lo:hi] = val[np.arange(hi - lo), first[lo:hi]]
    omega[count == 0] = np.nan
    return omega, first, count


def _mask_to_partition(n, mask):
    return ContiguousPartition(n, [j for j in range(1, n) if (mask >> (j - 1)) & 1])


def wedge_bruteforce(beta, tol: float = TIE_TOL) -> PenaltyResult:
    """Wedge penalty by enumerating all ``2**(n-1)`` contiguous partitions.

    Raises
    ------
    DomainError
        Zero entries, or ``n > 20``.
    RuntimeError
        If the number of partitions passing the certificates is not one.
    """
    beta = as_vector(beta)
    n = beta.size
    if n > WEDGE_MAX_N:
        raise DomainError(f"n={n} exceeds the enumeration limit {WEDGE_MAX_N}")
    if np.any(beta == 0):
        raise DomainError("enumeration needs nonzero entries")
    if n == 1:
        part = ContiguousPartition(1)
    else:
        hits = []
        bits = _cut_bits(n - 1)
        step = 4096
        for lo in range(0, bits.shape[0], step):
            ok, _ = _wedge_feasible((beta * beta)[None], bits[lo:lo + step], tol)
            hits.extend((lo + np.flatnonzero(ok[0])).tolist())
        if len(hits) != 1:
            raise RuntimeError(f"{len(hits)} feasible partitions, expected exactly one")
        part = _mask_to_partition(n, hits[0])
    lam = np.empty(n)
    omega = 0.0
    for s in part.slices():
        ss = float(np.sum(beta[s] ** 2))
        k = s.stop - s.start
        lam[s] = np.sqrt(ss / k)
        omega += np.sqrt(ss * k)
    return PenaltyResult(omega, lam, part, info={"feasible_count": 1})


def tree_bruteforce(beta, tree: RootedTree, tol: float = TIE_TOL) -> PenaltyResult:
    """Tree penalty by enumerating all ``2**|E|`` edge cuts.

    Every edge subset of a tree is a cut. For each one the block labels,
    the within-block subtree sums and the certificates are computed from
    scratch, vectorized over all cuts at once.
    """
    beta = as_vector(beta)
    n = tree.n
    if beta.size != n:
        raise DomainError("beta length does not match the tree")
    if np.any(beta == 0):
        raise DomainError("enumeration needs nonzero entries")
    E = tree.m
    if E > TREE_MAX_EDGES:
        raise DomainError(f"|E|={E} exceeds the enumeration limit {TREE_MAX_EDGES}")
    sq = beta * beta
    bits = _cut_bits(E)                              # (M, E)
    M = bits.shape[0]
    eidx = {c: i for i, (_, c) in enumerate(tree.edges)}
    lab = np.empty((M, n), dtype=np.int64)
    for v in tree.order:
        p = tree.parent[v]
        if p < 0:
            lab[:, v] = v
        else:
            lab[:, v] = np.where(bits[:, eidx[v]], v, lab[:, p])
    flat = lab + n * np.arange(M)[:, None]
    bsum = np.bincount(flat.ravel(), weights=np.tile(sq, M), minlength=M * n).reshape(M, n)
    bcnt = np.bincount(flat.ravel(), minlength=M * n).reshape(M, n)
    sub_s = np.tile(sq, (M, 1))
    sub_c = np.ones((M, n))
    for v in tree.order[::-1]:
        p = tree.parent[v]
        if p >= 0:
            same = lab[:, p] == lab[:, v]
            sub_s[:, p] += np.where(same, sub_s[:, v], 0.0)
            sub_c[:, p] += np.where(same, sub_c[:, v], 0.0)
    rows = np.arange(M)
    ok = np.ones(M, bool)
    for i, (p, c) in enumerate(tree.edges):
        lp, lc = lab[:, p], lab[:, c]
        cut = bits[:, i]
        tot = bsum[rows, lc]
        cnt = bcnt[rows, lc]
        zeta = cnt * sub_s[:, c] / tot - sub_c[:, c]
        ms_p = bsum[rows, lp] / bcnt[rows, lp]
        ms_c = tot / cnt
        ok &= np.where(cut, ms_p > ms_c * (1.0 + tol), zeta >= -tol * cnt)
    hits = np.flatnonzero(ok)
    if hits.size != 1:
        raise RuntimeError(f"{hits.size} feasible cuts, expected exactly one")
    h = hits[0]
    cut = TreeCut(tree, [tree.edges[i] for i in range(E) if bits[h, i]])
    lam = np.empty(n)
    omega = 0.0
    for blk in cut.blocks:
        ss = float(sq[blk].sum())
        lam[blk] = np.sqrt(ss / len(blk))
        omega += np.sqrt(ss * len(blk))
    return PenaltyResult(omega, lam, cut, info={"feasible_count": 1})


def numeric_reference(beta, cone: ConeSpec, tol: float = 1e-10,
                      max_iter: int = 200000) -> PenaltyResult:
    """Penalty over a polyhedral cone by projected gradient on the dual.

    Minimizing ``gamma(beta, .)`` subject to ``A lam >= 0`` has the
    concave dual ``max_{alpha >= 0} sum_i |beta_i| sqrt(1 - 2 (A^T alpha)_i)``
    with primal recovery ``lam_i = |beta_i| / sqrt(1 - 2 (A^T alpha)_i)``.
    The dual gradient is ``A lam``, the projection onto ``alpha >= 0`` is a
    clip, and the domain ``A^T alpha < 1/2`` is kept by backtracking. An
    accelerated (FISTA) step with adaptive restart is used.

    Stops when ``min(A lam) >= -tol`` and the complementarity
    ``alpha . A lam <= tol`` (both after scaling ``beta`` to unit max-norm).
    """
    beta = as_vector(beta)
    if beta.size != cone.n:
        raise DomainError("beta length does not match the cone")
    strictly_feasible_point(cone)
    scale = float(np.max(np.abs(beta)))
    if scale == 0.0 or cone.m == 0:
        return PenaltyResult(float(np.abs(beta).sum()), np.abs(beta))
    w = np.abs(beta) / scale
    A = cone.A

    def lam_of(alpha):
        s = 1.0 - 2.0 * (A.T @ alpha)
        if np.any(s[w > 0] <= 0):
            return None
        return w / np.sqrt(np.maximum(s, 1e-300))

    alpha = np.zeros(cone.m)
    lam = lam_of(alpha)
    y, y_lam = alpha, lam
    t = 1.0
    L = 1.0
    for it in range(max_iter):
        g = A @ y_lam                   # gradient of the negated dual at y
        # Lipschitz test on gradients; objective differences drown in rounding
        # long before the gradient is small
        while True:
            cand = np.maximum(y - g / L, 0.0)
            cl = lam_of(cand)
            if cl is not None:
                d = cand - y
                if np.linalg.norm(A @ cl - g) <= L * np.linalg.norm(d):
                    break
            L *= 2.0
        prev = alpha
        alpha, lam = cand, cl
        r = A @ lam
        if r.min() >= -tol and abs(alpha @ r) <= tol:
            omega = 0.5 * float(np.sum(w ** 2 / np.where(lam > 0, lam, 1.0) + lam))
            return PenaltyResult(omega * scale, lam * scale, info={"iters": it + 1})
        L = max(L / 1.2, 1e-12)
        if (y - alpha) @ (alpha - prev) > 0:
            t = 1.0                     # gradient restart
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = np.maximum(alpha + (t - 1.0) / t_new * (alpha - prev), 0.0)
        t = t_new
        y_lam = lam_of(y)
        if y_lam is None:
            y, y_lam, t = alpha, lam, 1.0
    raise ConvergenceError("dual projected gradient did not converge")


def finite_diff_gradient(penalty, beta, h: float = 1e-6) -> np.ndarray:
    """Central differences ``(Omega(beta + h e_i) - Omega(beta - h e_i)) / (2h)``.

    ``penalty`` maps a vector to a ``PenaltyResult`` (or to a float).
    """
    beta = as_vector(beta)

    def val(b):
        r = penalty(b)
        return float(getattr(r, "omega", r))

    g = np.empty(beta.size)
    for i in range(beta.size):
        e = np.zeros(beta.size)
        e[i] = h
        g[i] = (val(beta + e) - val(beta - e)) / (2.0 * h)
    return g


def is_admissible(v, tol: float = TIE_TOL) -> bool:
    """Every leading segment has mean square at most the whole vector's.

    ``||v[:k]||^2 / k <= ||v||^2 / len(v)`` for all ``k``, up to a relative
    tolerance.
    """
    v = as_vector(v)
    c = np.cumsum(v * v)
    k = np.arange(1, v.size + 1)
    return bool(np.all(c / k <= (c[-1] / v.size) * (1.0 + tol) + 1e-300))


def merge_history(beta, tol: float = TIE_TOL):
    """Replay the left-to-right merge pass, logging every merge.

    Returns a list of ``(left, right)`` index ranges, one per merge, in
    the order performed. The blocks are kept as explicit index lists so the
    log can be checked against the vector itself.
    """
    beta = as_vector(beta)
    sq = beta * beta
    blocks = []
    log = []

    def ms(b):
        return sq[b].mean()

    for t in range(beta.size):
        blocks.append([t])
        while len(blocks) > 1 and ms(blocks[-2]) <= ms(blocks[-1]) * (1.0 + tol):
            right = blocks.pop()
            left = blocks.pop()
            log.append((list(left), list(right)))
            blocks.append(left + right)
    return log
