"""Solver checks against dense references and the worked tridiagonal case."""

import numpy as np
import pytest
import scipy.sparse as sp

from interface_surrogates.linalg import (
    NotConvergedError,
    SingularMatrixError,
    assemble_csr,
    cg_solve,
    load_matrix_market,
    lu_solve,
    save_matrix_market,
)


def laplacian_1d(n):
    main = 2.0 * np.ones(n)
    off = -1.0 * np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1]).tocsr()


def test_cg_worked_tridiagonal():
    # unit load at the middle of a 5-point discrete Laplacian
    A = laplacian_1d(5)
    b = np.zeros(5)
    b[2] = 1.0
    x, info = cg_solve(A, b, tol=1e-12)
    assert np.allclose(x, [0.5, 1.0, 1.5, 1.0, 0.5], atol=1e-10)
    assert 0 < info["iterations"] <= 5


def test_cg_matches_dense_solve():
    rng = np.random.default_rng(0)
    n = 120
    Q = rng.normal(size=(n, n))
    A_dense = Q @ Q.T + n * np.eye(n)
    A = sp.csr_matrix(A_dense)
    b = rng.normal(size=n)
    x, info = cg_solve(A, b, tol=1e-12)
    assert np.allclose(x, np.linalg.solve(A_dense, b), atol=1e-8)


def test_cg_preconditioned_residual_monotone():
    # badly scaled SPD system where Jacobi actually matters
    rng = np.random.default_rng(3)
    n = 200
    scales = 10.0 ** rng.uniform(-3, 3, n)
    Q = rng.normal(size=(n, n))
    A = sp.csr_matrix((np.diag(scales) @ (Q @ Q.T / n + np.eye(n)) @ np.diag(scales)))
    b = rng.normal(size=n)
    _, info = cg_solve(A, b, tol=1e-10, maxit=5000)
    res = np.array(info["residual_norms"])
    assert np.all(np.diff(res) <= res[:-1] * 1e-12 + 1e-300)


def test_cg_iteration_count_drops_with_jacobi():
    rng = np.random.default_rng(5)
    n = 300
    scales = 10.0 ** rng.uniform(-2, 2, n)
    body = sp.random(n, n, density=0.02, random_state=7)
    A_dense = (body @ body.T).toarray() + np.eye(n)
    A = sp.csr_matrix(np.diag(scales) @ A_dense @ np.diag(scales))
    b = rng.normal(size=n)
    _, plain = cg_solve(A, b, tol=1e-10, maxit=100_000, precond="none")
    _, jac = cg_solve(A, b, tol=1e-10, maxit=100_000, precond="jacobi")
    assert jac["iterations"] < plain["iterations"]


def test_cg_raises_past_maxit():
    A = laplacian_1d(50)
    b = np.ones(50)
    with pytest.raises(NotConvergedError):
        cg_solve(A, b, tol=1e-14, maxit=3)


def test_cg_rejects_indefinite():
    A = sp.csr_matrix(np.diag([1.0, -1.0, 2.0]))
    with pytest.raises(SingularMatrixError):
        cg_solve(A, np.ones(3))


def test_assemble_sums_duplicates():
    rows = np.array([0, 0, 1, 2, 2])
    cols = np.array([0, 0, 1, 2, 2])
    vals = np.array([1.0, 2.0, 5.0, 1.5, 1.5])
    A = assemble_csr(rows, cols, vals, 3)
    assert np.allclose(A.toarray(), np.diag([3.0, 5.0, 3.0]))


def test_lu_real_and_complex():
    rng = np.random.default_rng(1)
    n = 80
    A_dense = rng.normal(size=(n, n)) + n * np.eye(n)
    b = rng.normal(size=n)
    x = lu_solve(sp.csr_matrix(A_dense), b)
    assert np.allclose(A_dense @ x, b, atol=1e-9)

    C_dense = A_dense + 1j * rng.normal(size=(n, n))
    bc = b + 1j * rng.normal(size=n)
    xc = lu_solve(sp.csr_matrix(C_dense), bc)
    assert np.allclose(C_dense @ xc, bc, atol=1e-9)


def test_lu_detects_singular():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(SingularMatrixError):
        lu_solve(A, np.ones(2))


def test_matrix_market_roundtrip(tmp_path):
    A = laplacian_1d(7)
    path = tmp_path / "lap.mtx"
    save_matrix_market(path, A)
    B = load_matrix_market(path)
    assert np.allclose(A.toarray(), B.toarray())
