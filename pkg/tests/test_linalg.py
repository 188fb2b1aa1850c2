import numpy as np
import pytest

from sparsetime.exceptions import NumericalError, ShapeError, SvdConvergenceError
from sparsetime.linalg import as_matrix, frobenius_norm, matmul, truncated_svd


def test_matmul_rejects_inner_dimension_mismatch():
    with pytest.raises(ShapeError, match=r"\(2, 3\) x \(2, 3\)"):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_is_associative_on_random_inputs():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b, c = rng.normal(size=(4, 5)), rng.normal(size=(5, 3)), rng.normal(size=(3, 6))
        left = matmul(matmul(a, b), c)
        right = matmul(a, matmul(b, c))
        assert np.allclose(left, right, rtol=1e-10, atol=1e-12)


def test_frobenius_norm_examples():
    assert frobenius_norm([[3.0, 4.0]]) == 5.0
    assert frobenius_norm(np.zeros((3, 2))) == 0.0


def test_as_matrix_promotes_vector_and_rejects_nan():
    assert as_matrix([1.0, 2.0, 3.0]).shape == (3, 1)
    with pytest.raises(NumericalError, match="NaN or Inf"):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ShapeError, match="2-D"):
        as_matrix(np.zeros((2, 2, 2)))


def test_truncated_svd_diagonal_example():
    svd = truncated_svd(np.diag([3.0, 1.0]), 1)
    assert svd.k == 1
    assert np.allclose(svd.sigma, [3.0])
    assert np.allclose(svd.u[:, 0], [1.0, 0.0])
    assert np.allclose(svd.reconstruct(), [[3.0, 0.0], [0.0, 0.0]])


def test_truncated_svd_orthonormal_sorted_and_sign_fixed():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(12, 5))
    svd = truncated_svd(x, 3)
    assert np.allclose(svd.u.T @ svd.u, np.eye(3), atol=1e-10)
    assert np.allclose(svd.v.T @ svd.v, np.eye(3), atol=1e-10)
    assert np.all(np.diff(svd.sigma) <= 0)
    assert np.all(svd.sigma >= 0)
    pivots = np.argmax(np.abs(svd.u), axis=0)
    assert np.all(svd.u[pivots, np.arange(3)] >= 0)


def test_truncated_svd_full_rank_reconstructs_input():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(6, 4))
    assert np.allclose(truncated_svd(x, 4).reconstruct(), x, atol=1e-10)


def test_truncated_svd_beats_random_rank_k_projections():
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.normal(size=(10, 6))
        k = 2
        svd = truncated_svd(x, k)
        best = frobenius_norm(x - svd.u @ (svd.u.T @ x))
        for _ in range(100):
            q, _ = np.linalg.qr(rng.normal(size=(10, k)))
            assert frobenius_norm(x - q @ (q.T @ x)) >= best - 1e-10


def test_truncated_svd_rank_out_of_range():
    with pytest.raises(ShapeError, match="out of range"):
        truncated_svd(np.ones((3, 2)), 3)
    with pytest.raises(ShapeError, match="out of range"):
        truncated_svd(np.ones((3, 2)), 0)


def test_truncated_svd_reports_iteration_cap_on_non_convergence(monkeypatch):
    def _fail(*args, **kwargs):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setattr(np.linalg, "svd", _fail)
    with pytest.raises(SvdConvergenceError, match="1000 sweeps"):
        truncated_svd(np.eye(3), 1)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_truncated_svd_is_best_rank_k_approximation_on_8x5(k):
    rng = np.random.default_rng(10 + k)
    for _ in range(5):
        x = rng.normal(size=(8, 5))
        best = frobenius_norm(x - truncated_svd(x, k).reconstruct())
        for _ in range(100):
            q, _ = np.linalg.qr(rng.normal(size=(8, k)))
            assert best <= frobenius_norm(x - q @ (q.T @ x)) + 1e-10


def test_truncated_svd_of_identity():
    svd = truncated_svd(np.eye(3), 3)
    assert np.allclose(svd.sigma, [1.0, 1.0, 1.0], rtol=0, atol=1e-12)
    assert np.allclose(svd.reconstruct(), np.eye(3), rtol=0, atol=1e-12)


def test_truncated_svd_exact_rank_one_input():
    x = np.outer([1.0, -2.0, 0.5, 3.0], [2.0, 1.0, -1.0])
    svd = truncated_svd(x, 1)
    assert frobenius_norm(x - svd.reconstruct()) < 1e-8
