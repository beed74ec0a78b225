"""A quick tour of the penalty evaluators.

Run with ``python demos/penalty_tour.py``.
"""
import numpy as np

from structpen import (Box, RootedTree, box_penalty, composite_penalty, l1_norm,
                       tree_penalty, wedge_penalty)
from structpen.core import GroupPartition
from structpen.penalties import WedgePenalty, cone_penalty_numeric, k_wedge_matrix

beta = np.array([1.0, 2.0, 1.0])

# The wedge penalty pools the first two entries: sqrt(2 * 5) + 1.
r = wedge_penalty(beta)
print("wedge   ", r.omega, r.lam, r.witness)

# Every penalty sits above the l1 norm, with equality when |beta| is admissible.
print("l1      ", l1_norm(beta))
print("sorted  ", wedge_penalty(np.sort(beta)[::-1]).omega)

# A box around |beta| leaves the l1 norm untouched; a tight box charges more.
print("box wide ", box_penalty(beta, Box([0.5] * 3, [3.0] * 3)).omega)
print("box tight", box_penalty(beta, Box([0.5] * 3, [1.0] * 3)).omega)

# Trees: lam may not increase from a parent to its child.
tree = RootedTree([-1, 0, 0])
print("tree    ", tree_penalty(beta, tree).omega, tree_penalty(beta, tree).witness)

# A wedge over group totals: the totals (1, 3) increase, so the blocks are pooled.
part = GroupPartition([[0], [1, 2]])
print("c-wedge ", composite_penalty(beta, part, WedgePenalty()).omega)

# Generic cones go through the barrier method; here convex lam.
x = np.array([3.0, 1.0, 0.5, 1.0, 3.0])
print("W^2     ", cone_penalty_numeric(x, k_wedge_matrix(5, 2)).omega, l1_norm(x))
