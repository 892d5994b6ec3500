import numpy as np
import pytest
import scipy.sparse as sp

from layered_fsi import SolverError
from layered_fsi.fem.linalg import Factorization, eliminate, is_symmetric, solve_sparse


def _spd(n, rng):
    A = rng.standard_normal((n, n))
    return sp.csc_matrix(A @ A.T + n * np.eye(n))


def test_spd_solve(rng):
    A = _spd(20, rng)
    b = rng.standard_normal(20)
    x = solve_sparse(A, b, "spd")
    np.testing.assert_allclose(x, np.linalg.solve(A.toarray(), b), rtol=1e-10)


def test_indefinite_rejected_as_spd():
    A = sp.csc_matrix(np.diag([1.0, -2.0, 3.0]))
    with pytest.raises(SolverError, match="positive definite"):
        Factorization(A, "spd")
    x = Factorization(A, "symmetric-indefinite").solve(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(x, [1.0, -1.0, 1.0])


def test_singular_matrix():
    A = sp.csc_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SolverError):
        Factorization(A).solve(np.array([1.0, 0.0]))


def test_bad_inputs():
    with pytest.raises(ValueError):
        Factorization(sp.eye(2), "cholesky")
    with pytest.raises(SolverError):
        Factorization(sp.eye(3)).solve(np.ones(2))


def test_eliminate_with_values(rng):
    A = _spd(6, rng).toarray()
    x_true = rng.standard_normal(6)
    b = A @ x_true
    fixed = [0, 4]
    Ar, br, free = eliminate(A, b, fixed, x_true[fixed])
    np.testing.assert_allclose(solve_sparse(Ar, br), x_true[free], rtol=1e-10)
    assert is_symmetric(sp.csr_matrix(Ar), 1e-12)
