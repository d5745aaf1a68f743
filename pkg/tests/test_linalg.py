import numpy as np
import pytest
from hypothesis import given, settings

from kyfan2k.linalg import (
    as_matrix,
    frobenius_norm,
    inner,
    l1_norm,
    linf_norm,
    read_matrix,
    singular_values,
    svd,
    write_matrix,
)
from strategies import matrices


def test_svd_identity():
    np.testing.assert_allclose(svd(np.eye(3)).S, [1, 1, 1])


def test_svd_diagonal_keeps_order_and_signs():
    U, S, V = svd(np.diag([3.0, 2.0, 1.0]))
    np.testing.assert_allclose(S, [3, 2, 1])
    np.testing.assert_allclose(U, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(V, np.eye(3), atol=1e-15)


def test_svd_against_eigendecomposition(rng):
    A = rng.standard_normal((5, 4))
    U, S, V = svd(A)
    assert np.linalg.norm(U * S @ V.T - A) <= 1e-8
    ev = np.sort(np.linalg.eigvalsh(A.T @ A))[::-1]
    np.testing.assert_allclose(S, np.sqrt(ev), atol=1e-8)


def test_svd_sign_convention(rng):
    U, _, _ = svd(rng.standard_normal((6, 4)))
    for j in range(U.shape[1]):
        col = U[:, j]
        assert col[np.flatnonzero(col)[0]] >= 0


def test_svd_reconstruction_many(rng):
    for _ in range(500):
        m, n = rng.integers(1, 31, size=2)
        A = rng.standard_normal((m, n)) * rng.uniform(0.1, 10)
        U, S, V = svd(A)
        assert np.linalg.norm(U * S @ V.T - A) <= 1e-8 * max(1.0, np.linalg.norm(A))
        assert np.all(np.diff(S) <= 0)


def test_svd_deterministic(rng):
    A = rng.standard_normal((7, 5))
    a, b = svd(A), svd(A.copy())
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_small_norms():
    assert l1_norm(np.ones((2, 2))) == 4
    assert inner(np.eye(2), np.eye(2)) == 2
    assert linf_norm([[1, -3], [2, 0]]) == 3
    assert frobenius_norm([[3, 4]]) == 5


def test_inner_shape_mismatch():
    with pytest.raises(ValueError):
        inner(np.eye(2), np.eye(3))


@pytest.mark.parametrize("bad", [np.array([1.0, 2.0]), np.zeros((0, 2)), np.array([[np.nan]]), np.array([[np.inf]])])
def test_as_matrix_rejects(bad):
    with pytest.raises(ValueError):
        as_matrix(bad)


@settings(max_examples=200, deadline=None)
@given(matrices(max_side=8))
def test_singular_values_match_gram_eigs(A):
    S = singular_values(A)
    ev = np.sort(np.clip(np.linalg.eigvalsh(A.T @ A), 0, None))[::-1][: S.size]
    np.testing.assert_allclose(S**2, ev, atol=1e-8 * max(1.0, np.linalg.norm(A) ** 2))


@settings(max_examples=200, deadline=None)
@given(matrices(max_side=6), matrices(max_side=6))
def test_inner_bounded_by_spectral_times_nuclear(A, X):
    X = np.resize(X, A.shape)
    assert inner(A, X) <= singular_values(A)[0] * singular_values(X).sum() + 1e-8


def test_matrix_round_trip(tmp_path, rng):
    A = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-12, 12, size=(4, 3))
    write_matrix(tmp_path / "a.txt", A)
    B = read_matrix(tmp_path / "a.txt")
    np.testing.assert_allclose(B, A, rtol=1e-15, atol=0)
    assert (tmp_path / "a.txt").read_text().splitlines()[0] == "4 3"


def test_read_matrix_bad_header(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2 2\n1 2\n3\n")
    with pytest.raises(ValueError):
        read_matrix(p)
