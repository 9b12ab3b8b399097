import numpy as np
import pytest
from scipy import sparse

from reggecurv.errors import SolverError
from reggecurv.solve import assemble_matrix, assemble_vector, solve_spd


def laplacian(n):
    return sparse.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")


def identity_test(rng):
    b = rng.standard_normal(7)
    np.testing.assert_allclose(solve_spd(sparse.identity(7), b), b)


def tridiagonal_test():
    x = solve_spd(laplacian(4), np.ones(4))
    np.testing.assert_allclose(x, [2.0, 3.0, 3.0, 2.0], rtol=1e-13)


def constrained_test(rng):
    n = 10
    A = laplacian(n)
    mask = np.zeros(n, dtype=bool)
    mask[[0, 6]] = True
    values = np.zeros(n)
    values[6] = 5.0

    x = solve_spd(A, rng.standard_normal(n), mask, values)
    assert x[6] == 5.0
    assert x[0] == 0.0


def constrained_harmonic_test():
    # discrete harmonic with prescribed ends is linear
    n = 9
    mask = np.zeros(n, dtype=bool)
    mask[[0, -1]] = True
    values = np.zeros(n)
    values[-1] = 8.0
    x = solve_spd(laplacian(n), np.zeros(n), mask, values)
    np.testing.assert_allclose(x, np.arange(n), atol=1e-12)


def rejects_unsymmetric_test():
    A = sparse.csr_matrix(np.array([[2.0, 1.0], [0.0, 2.0]]))
    with pytest.raises(ValueError):
        solve_spd(A, np.ones(2))


def rejects_indefinite_test():
    A = sparse.csr_matrix(np.array([[-1.0, 0.0], [0.0, 2.0]]))
    with pytest.raises(SolverError):
        solve_spd(A, np.ones(2))


def assembly_test():
    cell_dofs = np.array([[0, 1], [1, 2]])
    local = np.array([[[1.0, -1.0], [-1.0, 1.0]]] * 2)
    A = assemble_matrix(cell_dofs, local, 3).toarray()
    np.testing.assert_array_equal(A, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])

    b = assemble_vector(cell_dofs, np.ones((2, 2)), 3)
    np.testing.assert_array_equal(b, [1, 2, 1])
