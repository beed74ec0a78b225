import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from structpen.core import DomainError, GroupPartition
from structpen.penalties import (CompositePenalty, GroupLassoPenalty, LassoPenalty,
                                 composite_penalty, cone_penalty_numeric,
                                 group_lasso_penalty, lift_cone, wedge_cone, wedge_penalty)


def test_group_lasso_examples():
    beta = np.array([3.0, 4.0, 5.0])
    assert group_lasso_penalty(beta, GroupPartition.singletons(3)) == 12.0
    assert group_lasso_penalty(beta, GroupPartition([[0, 1, 2]])) == pytest.approx(
        math.sqrt(3) * np.linalg.norm(beta), rel=1e-15)
    assert group_lasso_penalty(beta, GroupPartition([[0, 1], [2]])) == pytest.approx(
        math.sqrt(2) * 5 + 5, rel=1e-15)
    with pytest.raises(DomainError):
        group_lasso_penalty(beta, GroupPartition([[0, 1]]))


def test_group_lasso_lambda():
    P = GroupPartition([[0, 1], [2]])
    r = GroupLassoPenalty(P)([3.0, 4.0, 5.0])
    np.testing.assert_allclose(r.lam, [5 / math.sqrt(2), 5 / math.sqrt(2), 5.0])
    from structpen.core import gamma
    assert gamma([3.0, 4.0, 5.0], r.lam) == pytest.approx(r.omega, rel=1e-14)


def test_composite_singletons_is_wedge_of_abs():
    beta = np.array([1.0, -3.0, 2.0, 0.5])
    r = composite_penalty(beta, GroupPartition.singletons(4), wedge_penalty)
    assert r.omega == pytest.approx(wedge_penalty(np.abs(beta)).omega, rel=1e-15)


def test_composite_hand_example():
    P = GroupPartition([[0, 1], [2]])
    r = composite_penalty([1.0, 1.0, 4.0], P, wedge_penalty)
    assert r.omega == pytest.approx(math.sqrt(2) * math.sqrt(20), rel=1e-14)
    theta = math.sqrt(10)
    np.testing.assert_allclose(r.lam, [theta / 2, theta / 2, theta], rtol=1e-14)


def test_composite_zero_block_uniform_split():
    P = GroupPartition([[0, 1], [2]])
    r = composite_penalty([0.0, 0.0, 4.0], P, LassoPenalty())
    assert r.omega == 4.0
    assert r.lam.tolist() == [0.0, 0.0, 4.0]
    # wedge on group sums (0, 3) merges both groups, so the zero block gets theta > 0
    r = composite_penalty([0.0, 0.0, 3.0], P, wedge_penalty)
    theta = math.sqrt(4.5)
    np.testing.assert_allclose(r.lam, [theta / 2, theta / 2, theta], rtol=1e-14)


@given(st.integers(2, 4), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_composite_equals_lifted_cone(k, size, seed):
    rng = np.random.default_rng(seed)
    P = GroupPartition.contiguous([size] * k)
    beta = rng.uniform(0.2, 2.0, P.n) * rng.choice([-1, 1], P.n)
    a = composite_penalty(beta, P, wedge_penalty).omega
    b = cone_penalty_numeric(beta, lift_cone(wedge_cone(k), P)).omega
    assert a == pytest.approx(b, rel=1e-6)


def test_composite_penalty_wrapper():
    P = GroupPartition.contiguous([2, 2])
    pen = CompositePenalty(P, wedge_penalty)
    assert pen([1.0, 2.0, 0.5, 0.5]).omega == composite_penalty([1.0, 2.0, 0.5, 0.5], P,
                                                                 wedge_penalty).omega
    with pytest.raises(DomainError):
        lift_cone(wedge_cone(3), P)
