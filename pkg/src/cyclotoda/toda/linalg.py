"""Preconditioned conjugate gradients for the symmetric positive definite Newton systems."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class LinearSolveError(RuntimeError):
    pass


def conjugate_gradient(a: sp.spmatrix, b: np.ndarray, tol: float = 1e-12,
                       x0: np.ndarray | None = None, maxiter: int | None = None,
                       precond: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Solve ``a x = b`` to relative residual ``tol``.

    ``precond`` is the diagonal used as a Jacobi preconditioner (defaults to
    ``diag(a)``).  Returns the solution and the iteration count.
    """
    n = b.size
    maxiter = maxiter or 20 * n
    dinv = 1.0 / (a.diagonal() if precond is None else precond)
    x = np.zeros(n) if x0 is None else x0.copy()
    r = b - a @ x
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(n), 0
    z = dinv * r
    p = z.copy()
    rz = r @ z
    for it in range(1, maxiter + 1):
        ap = a @ p
        pap = p @ ap
        if pap <= 0:
            raise LinearSolveError("matrix is not positive definite")
        step = rz / pap
        x += step * p
        r -= step * ap
        if np.linalg.norm(r) <= tol * bnorm:
            return x, it
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise LinearSolveError(f"CG did not reach tol={tol:g} in {maxiter} iterations")


def solve_spd(a: sp.spmatrix, b: np.ndarray, method: str = "cg", tol: float = 1e-12,
              x0: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Dispatch between the in-house CG and a sparse direct factorisation."""
    if method == "cg":
        return conjugate_gradient(a.tocsr(), b, tol=tol, x0=x0)
    if method == "direct":
        return spla.spsolve(a.tocsc(), b), 0
    raise ValueError(f"unknown linear solver {method!r}")
