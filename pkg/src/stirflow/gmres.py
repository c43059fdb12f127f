"""Restart-free GMRES with modified Gram-Schmidt and Givens rotations."""

from __future__ import annotations

import numpy as np

__all__ = ["gmres", "GmresResult"]


class GmresResult:
    __slots__ = ("x", "iterations", "relres", "converged")

    def __init__(self, x, iterations, relres, converged):
        self.x = x
        self.iterations = iterations
        self.relres = relres
        self.converged = converged


def gmres(matvec, b: np.ndarray, tol: float = 1e-14, maxiter: int = 100,
          x0: np.ndarray | None = None) -> GmresResult:
    """Solve A x = b with A given as a matvec callable.

    Relative residual ||b - A x|| / ||b|| is driven below ``tol``; no
    restarting, so at most ``maxiter`` Krylov vectors are kept.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return GmresResult(np.zeros(n), 0, 0.0, True)
    if x0 is None:
        x0 = np.zeros(n)
        r = b.copy()
    else:
        r = b - matvec(x0)
    rnorm = np.linalg.norm(r)
    if rnorm / bnorm <= tol:
        return GmresResult(x0.copy(), 0, rnorm / bnorm, True)

    maxiter = min(maxiter, n)
    V = np.empty((maxiter + 1, n))
    H = np.zeros((maxiter + 1, maxiter))
    cs = np.zeros(maxiter)
    sn = np.zeros(maxiter)
    g = np.zeros(maxiter + 1)
    g[0] = rnorm
    V[0] = r / rnorm

    k = 0
    relres = rnorm / bnorm
    for k in range(maxiter):
        # copy: matvec may return (a view of) its input, which would let the
        # in-place Gram-Schmidt update corrupt the Krylov basis
        w = np.array(matvec(V[k]), dtype=float)
        # modified Gram-Schmidt
        for i in range(k + 1):
            H[i, k] = np.dot(V[i], w)
            w -= H[i, k] * V[i]
        H[k + 1, k] = np.linalg.norm(w)
        # previous Givens rotations
        for i in range(k):
            tmp = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
            H[i, k] = tmp
        denom = np.hypot(H[k, k], H[k + 1, k])
        if denom == 0.0:  # exact breakdown
            k -= 1
            break
        cs[k] = H[k, k] / denom
        sn[k] = H[k + 1, k] / denom
        H[k, k] = denom
        hlast = H[k + 1, k]
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]
        relres = abs(g[k + 1]) / bnorm
        if relres <= tol or hlast == 0.0:
            break
        V[k + 1] = w / hlast

    kk = k + 1
    y = np.linalg.solve(H[:kk, :kk], g[:kk]) if kk else np.zeros(0)
    x = x0 + y @ V[:kk]
    return GmresResult(x, kk, relres, relres <= tol)
