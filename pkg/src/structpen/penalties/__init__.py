"""Evaluators of ``Omega(beta | Lambda)`` for the supported constraint sets.

Every evaluator, given ``beta``, returns a :class:`~structpen.core.PenaltyResult`
holding the penalty value and its minimizing ``lam``. The callable wrapper
classes (``WedgePenalty()``, ``BoxPenalty(box)``, ...) plug straight into
:func:`structpen.solver.alternating_solve`.
"""
from .box import Box, box_penalty
from .cone import (BarrierConfig, ConePenalty, ConeSpec, cone_penalty_active_set,
                   cone_penalty_numeric, dual_norm, dual_norm_lp, k_wedge_matrix,
                   orthant_cone, strictly_feasible_point, wedge_cone)
from .group import (CompositePenalty, GroupLassoPenalty, composite_penalty,
                    group_lasso_penalty, lift_cone)
from .lasso import LassoPenalty, lasso_penalty, penalty_gradient
from .tree import (RootedTree, TreeCertificates, TreeCut, TreePenalty,
                   tree_certificates, tree_penalty)
from .wedge import (TIE_TOL, ContiguousPartition, WedgeCertificates, WedgePenalty,
                    wedge_certificates, wedge_penalty)

BoxPenalty = Box

__all__ = [
    "Box", "BoxPenalty", "box_penalty",
    "BarrierConfig", "ConePenalty", "ConeSpec", "cone_penalty_active_set",
    "cone_penalty_numeric", "dual_norm", "dual_norm_lp", "k_wedge_matrix", "orthant_cone", "strictly_feasible_point",
    "wedge_cone",
    "CompositePenalty", "GroupLassoPenalty", "composite_penalty",
    "group_lasso_penalty", "lift_cone",
    "LassoPenalty", "lasso_penalty", "penalty_gradient",
    "RootedTree", "TreeCertificates", "TreeCut", "TreePenalty",
    "tree_certificates", "tree_penalty",
    "TIE_TOL", "ContiguousPartition", "WedgeCertificates", "WedgePenalty",
    "wedge_certificates", "wedge_penalty",
]
