"""Preconditioned conjugate gradients for the SPD reduced Dirichlet systems."""
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from staticineq.config import CG_ITER_FACTOR, CG_RTOL, DEBUG_PRINT_SOLVER
from staticineq.errors import NumericError


def jacobi_preconditioner(A: sp.spmatrix) -> LinearOperator:
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise NumericError("Jacobi preconditioner needs a positive diagonal")
    inv = 1.0 / diag
    n = A.shape[0]
    return LinearOperator((n, n), matvec=lambda r: inv * np.ravel(r), dtype=float)


def solve_spd(A: sp.spmatrix, b: np.ndarray, x0: Optional[np.ndarray] = None,
              rtol: float = CG_RTOL, maxiter: Optional[int] = None) -> Tuple[np.ndarray, int]:
    """
    CG with diagonal preconditioning, ||r|| <= rtol ||b||, capped at
    CG_ITER_FACTOR * sqrt(dof) iterations. Returns (x, iterations).
    """
    n = A.shape[0]
    if n == 0:
        return np.zeros(0), 0
    if maxiter is None:
        maxiter = max(1, int(np.ceil(CG_ITER_FACTOR * np.sqrt(n))))
    iterations = 0

    def count(_):
        nonlocal iterations
        iterations += 1

    x, info = cg(A, b, x0=x0, rtol=rtol, atol=0.0, maxiter=maxiter,
                 M=jacobi_preconditioner(A), callback=count)
    if info > 0:
        raise NumericError(f"CG did not converge in {iterations} iterations (dof {n}, rtol {rtol:g})",
                           iterations=iterations)
    if info < 0:
        raise NumericError("CG reported an illegal input or breakdown", iterations=iterations)
    if DEBUG_PRINT_SOLVER:
        res = np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), np.finfo(float).tiny)
        print(f"[Solver] CG converged: {iterations} iterations, dof {n}, relative residual {res:.2e}")
    return x, iterations
