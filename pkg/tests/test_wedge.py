import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from structpen.core import DomainError
from structpen.oracle import (finite_diff_gradient, is_admissible, merge_history,
                              wedge_bruteforce)
from structpen.penalties import (ContiguousPartition, WedgePenalty, penalty_gradient,
                                 wedge_certificates, wedge_penalty)

nonzero = st.floats(0.01, 10).flatmap(lambda x: st.sampled_from([x, -x]))
wvec = st.integers(1, 10).flatmap(lambda n: arrays(float, n, elements=nonzero))


def test_two_entries():
    r = wedge_penalty([2.0, 1.0])
    assert r.omega == 3.0
    assert r.lam.tolist() == [2.0, 1.0]
    assert r.witness == ContiguousPartition(2, [1])
    r = wedge_penalty([1.0, 2.0])
    assert r.omega == pytest.approx(math.sqrt(10.0), rel=1e-15)
    assert len(r.witness) == 1


def test_three_entries():
    r = wedge_penalty([1.0, 2.0, 1.0])
    assert r.omega == pytest.approx(math.sqrt(10) + 1, rel=1e-15)
    assert r.witness.cuts == (2,)
    np.testing.assert_allclose(r.lam, [math.sqrt(2.5), math.sqrt(2.5), 1.0], rtol=1e-15)
    r = wedge_penalty([1.0, 1.0, 1.0])
    assert r.omega == pytest.approx(3.0, rel=1e-15)
    assert r.witness.cuts == ()


def test_zeros_allowed():
    r = wedge_penalty([3.0, 0.0, 0.0])
    assert r.omega == 3.0
    assert r.lam.tolist() == [3.0, 0.0, 0.0]
    r = wedge_penalty([0.0, 0.0])
    assert r.omega == 0.0


def test_certificates_examples():
    c = wedge_certificates([2.0, 1.0], ContiguousPartition(2, [1]))
    assert c.feasible and c.delta.tolist() == [2.0, 1.0] and np.all(c.zeta == 0)
    assert not wedge_certificates([1.0, 2.0], ContiguousPartition(2, [1])).feasible
    c = wedge_certificates([1.0, 2.0], ContiguousPartition(2))
    assert c.feasible
    assert c.zeta[1] == pytest.approx(0.6, rel=1e-14)
    with pytest.raises(DomainError):
        wedge_certificates([1.0, 0.0], ContiguousPartition(2))


def test_partition_validation():
    with pytest.raises(DomainError):
        ContiguousPartition(3, [2, 1])
    with pytest.raises(DomainError):
        ContiguousPartition(3, [3])
    p = ContiguousPartition.from_sizes([2, 1, 3])
    assert p.cuts == (2, 3) and p.blocks() == [[0, 1], [2], [3, 4, 5]]


def test_example_vector_regression():
    beta = [1.0732, -0.4872, 0.2961, -1.3692, 1.4731, -0.0073, -0.2133]
    r = wedge_penalty(beta)
    assert r.witness.cuts == (1, 5)
    assert r.omega == pytest.approx(5.555827950417212, rel=1e-13)
    assert wedge_bruteforce(beta).witness == r.witness


@given(wvec)
def test_matches_bruteforce(beta):
    r = wedge_penalty(beta)
    o = wedge_bruteforce(beta)
    assert r.witness == o.witness
    assert r.omega == pytest.approx(o.omega, rel=1e-10)
    assert wedge_certificates(beta, r.witness).feasible


@given(wvec)
def test_sign_invariance_and_blocks(beta):
    r = wedge_penalty(beta)
    assert wedge_penalty(np.abs(beta)).omega == r.omega
    for s in r.witness.slices():
        mu = np.linalg.norm(beta[s]) / math.sqrt(s.stop - s.start)
        np.testing.assert_allclose(r.lam[s], mu, rtol=1e-14)
    means = [np.mean(beta[s] ** 2) for s in r.witness.slices()]
    assert all(a > b for a, b in zip(means, means[1:]))


@given(wvec, st.floats(-5, 5))
def test_homogeneous(beta, t):
    assert wedge_penalty(t * beta).omega == pytest.approx(abs(t) * wedge_penalty(beta).omega,
                                                          rel=1e-9, abs=1e-12)


@given(wvec)
def test_merged_blocks_admissible(beta):
    for left, right in merge_history(beta):
        assert is_admissible(beta[left + right])


def test_gradient_matches_finite_differences(rng):
    for _ in range(20):
        beta = rng.uniform(0.1, 3.0, 8) * rng.choice([-1, 1], 8)
        g = penalty_gradient(beta, wedge_penalty(beta))
        fd = finite_diff_gradient(WedgePenalty(), beta)
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-8)
