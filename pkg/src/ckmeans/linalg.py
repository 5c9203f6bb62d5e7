"""Small linear-algebra helpers shared by the solver updates."""

from __future__ import annotations

import numpy as np


def cg(matvec, b, x0=None, tol=1e-8, maxiter=None):
    """Conjugate gradient for a symmetric positive definite operator.

    Stops once ``||b - A x|| <= tol * ||b||``. Returns ``(x, converged,
    iterations)``; on breakdown or exhaustion the last iterate is returned.
    """
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    if maxiter is None:
        maxiter = 10 * b.size
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), True, 0
    r = b - matvec(x)
    p = r.copy()
    rs = r @ r
    thresh = (tol * bnorm) ** 2
    if rs <= thresh:
        return x, True, 0
    for it in range(1, maxiter + 1):
        Ap = matvec(p)
        pAp = p @ Ap
        if pAp <= 0.0:
            return x, False, it
        alpha = rs / pAp
        x += alpha * p
        r -= alpha * Ap
        rs_new = r @ r
        if rs_new <= thresh:
            return x, True, it
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, False, maxiter


def rank_one_solve(a, alpha, beta, r):
    """Solve ``(alpha a a^T + beta I) z = r`` by the Sherman-Morrison identity."""
    a = np.asarray(a, dtype=float)
    r = np.asarray(r, dtype=float)
    return r / beta - (alpha * (a @ r) / (beta * (beta + alpha * (a @ a)))) * a
