import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kyfan2k.norms import kyfan_2k_norm
from kyfan2k.subdiff import (
    is_differentiable,
    matrix_subgrad_check,
    matrix_subgrad_report,
    partition_spectrum,
    subgradient,
    vector_subgrad_check,
)


def numeric_gradient(A, k, h):
    G = np.zeros_like(A)
    for idx in np.ndindex(A.shape):
        E = np.zeros_like(A)
        E[idx] = h
        G[idx] = (kyfan_2k_norm(A + E, k) - kyfan_2k_norm(A - E, k)) / (2 * h)
    return G


@pytest.mark.parametrize(
    "S,k,t,s",
    [((3, 2, 2, 2, 1), 3, 2, 1), ((3, 2, 1), 2, 1, 0), ((1, 1, 1, 1), 2, 2, 2), ((5,), 1, 1, 0)],
)
def test_partition_examples(S, k, t, s):
    part = partition_spectrum(S, k)
    assert (part.t, part.s) == (t, s)
    assert part.sigma_k == S[k - 1]


def test_partition_tolerance():
    assert partition_spectrum((2.0, 1.0 + 1e-12, 1.0), 2).s == 1
    assert partition_spectrum((2.0, 1.0 + 1e-6, 1.0), 2).s == 0
    assert partition_spectrum((2.0, 1.0 + 1e-6, 1.0), 2, tie_tol=1e-5).s == 1


def test_partition_bad_k():
    with pytest.raises(ValueError):
        partition_spectrum((1.0, 0.5), 3)


def test_vector_examples():
    s5 = math.sqrt(5)
    assert vector_subgrad_check((3, 2, 1), np.array([3, 2, 0]) / math.sqrt(13), 2)
    assert vector_subgrad_check((2, 1, 1), np.array([2, 0.5, 0.5]) / s5, 2)
    assert not vector_subgrad_check((2, 1, 1), np.array([2, 1.2, -0.2]) / s5, 2)
    assert vector_subgrad_check((2, 1, 1), np.array([2, 1, 0]) / s5, 2)
    assert not vector_subgrad_check((2, 1, 1), np.array([2, 0.5, 0.4]) / s5, 2)
    assert not vector_subgrad_check((2, 1, 1), np.array([2.1, 0.5, 0.5]) / s5, 2)
    assert not vector_subgrad_check((3, 2, 1), np.array([3, 2, 0.1]) / math.sqrt(13), 2)


def test_vector_check_input_validation():
    with pytest.raises(ValueError):
        vector_subgrad_check((1, 2), (0, 1), 1)
    with pytest.raises(ValueError):
        vector_subgrad_check((2, 1), (1, 0, 0), 1)


def test_matrix_examples():
    s5 = math.sqrt(5)
    assert matrix_subgrad_check(np.diag([3.0, 2, 1]), np.diag([3.0, 2, 0]) / math.sqrt(13), 2)
    G = (np.diag([2.0, 0, 0]) + np.diag([0, 0.5, 0.5])) / s5
    assert matrix_subgrad_check(np.diag([2.0, 1, 1]), G, 2)
    # rotated choice inside the tied subspace is also valid
    c, s = math.cos(0.3), math.sin(0.3)
    Rot = np.array([[1, 0, 0], [0, c, -s], [0, s, c]])
    assert matrix_subgrad_check(np.diag([2.0, 1, 1]), Rot @ G @ Rot.T, 2)
    bad = G.copy()
    bad[2, 0] = 0.1
    assert not matrix_subgrad_check(np.diag([2.0, 1, 1]), bad, 2)
    assert matrix_subgrad_report(np.diag([2.0, 1, 1]), bad, 2).outside > 0.09


def test_matrix_tied_block_violations():
    s5 = math.sqrt(5)
    A = np.diag([2.0, 1, 1])
    assert not matrix_subgrad_check(A, np.diag([2, 1.2, -0.2]) / s5, 2)  # T not PSD
    assert not matrix_subgrad_check(A, np.diag([2, 0.4, 0.4]) / s5, 2)  # trace T != t
    off = np.diag([2, 0.5, 0.5]) / s5
    off[1, 2] = 0.2 / s5
    assert not matrix_subgrad_check(A, off, 2)  # T not symmetric


def test_matrix_check_on_rectangular(rng):
    A = rng.standard_normal((5, 3))
    assert matrix_subgrad_check(A, subgradient(A, 2), 2)
    assert not matrix_subgrad_check(A, 1.01 * subgradient(A, 2), 2)


@pytest.mark.parametrize("A,k,expected", [(np.diag([3.0, 2, 1]), 2, True), (np.diag([2.0, 1, 1]), 2, False),
                                          (np.diag([1.0, 0, 0]), 2, True)])
def test_is_differentiable_examples(A, k, expected):
    assert is_differentiable(A, k) is expected


def test_zero_matrix_rejected():
    with pytest.raises(ValueError):
        is_differentiable(np.zeros((2, 2)), 1)
    with pytest.raises(ValueError):
        subgradient(np.zeros((2, 2)), 1)


def test_rank_deficient_subgradient():
    A = np.zeros((3, 3))
    A[0, 0] = 2.0
    assert matrix_subgrad_check(A, subgradient(A, 2), 2)
    G = subgradient(A, 2)
    G[1, 1] = 0.5
    assert not matrix_subgrad_check(A, G, 2)


def test_finite_difference_gradient(rng):
    checked = 0
    while checked < 40:
        A = rng.standard_normal(tuple(rng.integers(2, 6, size=2)))
        k = int(rng.integers(1, min(A.shape) + 1))
        if not is_differentiable(A, k, tie_tol=1e-3):
            continue
        h = 1e-6 * np.linalg.norm(A)
        np.testing.assert_allclose(numeric_gradient(A, k, h), subgradient(A, k), atol=1e-5)
        checked += 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_subgradient_consistent_with_norm(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 6, size=2)
    A = rng.standard_normal((m, n))
    k = int(rng.integers(1, min(m, n) + 1))
    G = subgradient(A, k)
    assert matrix_subgrad_check(A, G, k)
    assert np.vdot(G, A) == pytest.approx(kyfan_2k_norm(A, k), rel=1e-10)
    for _ in range(5):
        X = rng.standard_normal((m, n))
        assert np.vdot(G, X) <= kyfan_2k_norm(X, k) * (1 + 1e-8) + 1e-12


tau_values = st.sampled_from([-0.1, 0.0, 0.25, 1 / 3, 0.5, 2 / 3, 0.75, 1.0, 1.1])


@settings(max_examples=300, deadline=None)
@given(st.lists(tau_values, min_size=3, max_size=3), st.booleans(), st.booleans())
def test_vector_and_matrix_checks_agree_on_diagonals(tau, perturb_lead, perturb_tail):
    # sigma = (2, 1, 1, 1, 0.5) with k = 2: t = 1, s = 2
    sigma = np.array([2.0, 1.0, 1.0, 1.0, 0.5])
    norm = math.sqrt(5)
    v = np.zeros(5)
    v[0] = 2 / norm + (0.05 if perturb_lead else 0.0)
    v[1:4] = np.array(tau) / norm
    v[4] = 0.05 if perturb_tail else 0.0
    vec = vector_subgrad_check(sigma, v, 2)
    mat = matrix_subgrad_check(np.diag(sigma), np.diag(v), 2)
    assert vec == mat
    expected = (not perturb_lead and not perturb_tail and min(tau) >= 0 and max(tau) <= 1
                and abs(sum(tau) - 1) < 1e-12)
    assert vec == expected
