"""Alternating minimization against the closed form for orthogonal designs.

With ``X^T X = I`` the Lasso reduces to soft thresholding and the wedge
estimate shrinks the wedge minimizer of ``X^T y`` by ``rho``.
"""
import numpy as np

from structpen import LassoPenalty, Problem, WedgePenalty, alternating_solve
from structpen.solver import orthogonal_solve

rng = np.random.default_rng(0)
X, _ = np.linalg.qr(rng.standard_normal((12, 8)))
y = rng.standard_normal(12)
rho = 0.4
prob = Problem(X, y, rho)

for kind, pen in (("lasso", LassoPenalty()), ("wedge", WedgePenalty())):
    res = alternating_solve(prob, pen)
    closed, _ = orthogonal_solve(X.T @ y, rho, kind)
    print(f"{kind}: {res.iters} iterations, converged={res.converged}, "
          f"max |beta - closed form| = {np.max(np.abs(res.beta - closed)):.1e}")
    print("   beta:", np.round(res.beta, 4))
