"""
Sparse assembly and symmetric positive definite solves with constraints.
"""

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .errors import SolverError


def assemble_matrix(cell_dofs, local, size):
    """Sum local matrices (T, n, n) into a CSR matrix of shape (size, size)."""
    n = cell_dofs.shape[1]
    rows = np.repeat(cell_dofs, n, axis=1).ravel()
    cols = np.tile(cell_dofs, (1, n)).ravel()
    matrix = sparse.coo_matrix((np.asarray(local).ravel(), (rows, cols)), shape=(size, size))
    return matrix.tocsr()


def assemble_vector(cell_dofs, local, size):
    """Sum local vectors (T, n) into a vector of length ``size``."""
    return np.bincount(cell_dofs.ravel(), weights=np.asarray(local).ravel(), minlength=size)


def relative_residual(A, x, b):
    r = np.linalg.norm(A @ x - b)
    scale = np.linalg.norm(b)
    return r / scale if scale > 0 else r


def solve_spd(A, b, fixed_mask=None, fixed_values=None, tol=1e-12, verbosity=0):
    """Solve A x = b for symmetric positive definite A with some entries of x prescribed.

    Prescribed entries are eliminated symmetrically: their columns move to the
    right-hand side and their rows are dropped. The reduced system is solved
    with a sparse LU factorization; when that fails or misses ``tol`` a
    conjugate gradient iteration takes over.

    Parameters
    ----------
    A : sparse matrix
        Square, symmetric system matrix.
    b : ndarray
        Right-hand side.
    fixed_mask : ndarray of bool, optional
        Entries of x that are prescribed.
    fixed_values : ndarray, optional
        Values of the prescribed entries, either full length or one per
        prescribed entry.
    tol : float
        Required relative residual of the reduced system.
    verbosity : int

    Returns
    -------
    x : ndarray
    """
    A = sparse.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError("Incompatible system shapes {} and {}".format(A.shape, b.shape))

    asym = abs(A - A.T).max() if A.nnz else 0.0
    scale = abs(A).max() if A.nnz else 1.0
    if asym > 1e-12 * scale:
        raise ValueError("System matrix is not symmetric (asymmetry {:.3e})".format(asym))

    x = np.zeros(n)
    if fixed_mask is None:
        fixed_mask = np.zeros(n, dtype=bool)
    fixed_mask = np.asarray(fixed_mask, dtype=bool)
    if fixed_values is not None:
        fixed_values = np.asarray(fixed_values, dtype=float)
        x[fixed_mask] = fixed_values[fixed_mask] if fixed_values.shape == (n,) else fixed_values
    free = np.flatnonzero(~fixed_mask)
    fixed = np.flatnonzero(fixed_mask)

    if len(free) == 0:
        return x

    A_free = A[free][:, free]
    rhs = b[free] - A[free][:, fixed] @ x[fixed]

    diagonal = A_free.diagonal()
    if np.any(diagonal <= 0.0):
        raise SolverError("Reduced system is not positive definite (non-positive diagonal entry)")

    try:
        solution = splinalg.splu(A_free.tocsc()).solve(rhs)
        residual = relative_residual(A_free, solution, rhs)
    except RuntimeError as error:
        if verbosity >= 3:
            print("[solve] Direct factorization failed ({}); falling back to CG".format(error))
        solution = np.zeros_like(rhs)
        residual = np.inf

    if not np.isfinite(residual) or residual > tol:
        if verbosity >= 3:
            print("[solve] Refining with CG (residual {:.3e} > {:.1e})".format(residual, tol))
        preconditioner = sparse.diags(1.0 / diagonal)
        solution, info = splinalg.cg(A_free, rhs, x0=solution, rtol=tol, atol=0.0, maxiter=20 * len(free), M=preconditioner)
        residual = relative_residual(A_free, solution, rhs)
        if info != 0 or not np.isfinite(residual) or residual > 10 * tol:
            raise SolverError("Linear solve of {} unknowns did not converge".format(len(free)), residual=residual)

    if verbosity >= 5:
        print("[solve] {} unknowns ({} prescribed), relative residual {:.3e}".format(n, len(fixed), residual))

    x[free] = solution
    return x
