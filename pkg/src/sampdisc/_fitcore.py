"""Weighted discrete fitting: least squares, IRLS, and minimax.

All fits minimize a (weighted) p-seminorm of the residual y - A c over
coefficients c.  Non-uniqueness is resolved by the minimum-Euclidean-norm
solution: least squares and IRLS inherit it from ``lstsq``; the real
minimax path solves an LP for the optimal level and then projects the
origin onto the (slightly relaxed) optimal set with a small dense QP.
Complex minimax fits use Lawson iteration with an upper/lower bound gap
certificate, since modulus constraints are conic rather than linear.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .errors import ConvergenceError, InvalidParameterError

_DEF_IRLS_TOL = 1e-8


def wls_fit(design: np.ndarray, target: np.ndarray, weights=None) -> np.ndarray:
    """Weighted least squares, minimum-norm solution."""
    A = np.asarray(design)
    y = np.asarray(target)
    if weights is not None:
        sw = np.sqrt(np.asarray(weights, dtype=float))
        A = A * sw[:, None]
        y = y * sw
    c, *_ = np.linalg.lstsq(A, y, rcond=None)
    return c


def irls_fit(
    design: np.ndarray,
    target: np.ndarray,
    weights,
    p: float,
    tol: float = _DEF_IRLS_TOL,
    max_iter: int = 400,
) -> np.ndarray:
    """Minimize sum_j w_j |y_j - (Ac)_j|^p by iterative reweighting.

    Safeguarded with step halving so the objective never increases.
    Raises ConvergenceError (carrying the last iterate) on stagnation.
    """
    if p < 1 or np.isinf(p):
        raise InvalidParameterError("irls handles finite p >= 1")
    A = np.asarray(design)
    y = np.asarray(target)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    scale = max(float(np.max(np.abs(y))), 1e-30)
    floor = 1e-12 * scale

    def objective(c):
        return float(np.sum(w * np.abs(y - A @ c) ** p))

    c = wls_fit(A, y, w)
    obj = objective(c)
    # undamped reweighting diverges for p > 2; damp by 1/(p-1)
    damp = 1.0 if p <= 2 else 1.0 / (p - 1.0)
    for _ in range(max_iter):
        r = np.abs(y - A @ c)
        iw = w * np.maximum(r, floor) ** (p - 2.0)
        c_hat = wls_fit(A, y, iw)
        direction = c_hat - c
        t = damp
        c_new = c + t * direction
        obj_new = objective(c_new)
        stuck = False
        for _ in range(50):
            if obj_new <= obj * (1 + 1e-15):
                break
            t *= 0.5
            c_new = c + t * direction
            obj_new = objective(c_new)
        else:
            stuck = True
        if stuck:
            return c  # no descent left at working precision
        moved = np.linalg.norm(c_new - c) / max(np.linalg.norm(c_new), 1e-30)
        improved = abs(obj - obj_new) / max(obj, 1e-300)
        c, obj = c_new, obj_new
        if moved < tol and improved < 1e-12:
            return c
    raise ConvergenceError(
        f"IRLS did not reach tolerance {tol} in {max_iter} iterations", last=c
    )


def _minimax_real(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    m, n = A.shape
    cobj = np.zeros(n + 1)
    cobj[-1] = 1.0
    A_ub = np.vstack(
        [np.hstack([A, -np.ones((m, 1))]), np.hstack([-A, -np.ones((m, 1))])]
    )
    b_ub = np.concatenate([y, -y])
    res = linprog(cobj, A_ub=A_ub, b_ub=b_ub,
                  bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status != 0:
        raise ConvergenceError(f"minimax LP failed with status {res.status}")
    c_lp = res.x[:n]
    t_opt = float(res.fun)
    # minimum-norm point of the optimal set, via a slightly relaxed QP
    scale = max(float(np.max(np.abs(y))), t_opt, 1e-30)
    t_rel = t_opt + 1e-9 * scale
    try:
        from cvxopt import matrix, solvers

        G = np.vstack([A, -A])
        h = np.concatenate([y + t_rel, t_rel - y])
        solvers.options.setdefault("show_progress", False)
        sol = solvers.qp(
            matrix(np.eye(n)), matrix(np.zeros(n)), matrix(G), matrix(h)
        )
        if sol["status"] == "optimal":
            c_qp = np.asarray(sol["x"]).reshape(-1)
            if np.max(np.abs(y - A @ c_qp)) <= t_rel * (1 + 1e-9) + 1e-300:
                return c_qp
    except Exception:
        pass
    return c_lp


def _minimax_lawson(A: np.ndarray, y: np.ndarray,
                    tol: float = 1e-11, max_iter: int = 20000) -> np.ndarray:
    m = A.shape[0]
    w = np.full(m, 1.0 / m)
    best_c, best_ub = None, np.inf
    scale = max(float(np.max(np.abs(y))), 1e-30)
    for _ in range(max_iter):
        c = wls_fit(A, y, w)
        r = np.abs(y - A @ c)
        ub = float(r.max())
        lb = float(np.sqrt(np.sum(w * r * r)))
        if ub < best_ub:
            best_c, best_ub = c, ub
        if ub - lb <= tol * max(ub, scale * 1e-6):
            return best_c
        w = w * r
        s = w.sum()
        if s <= 0:
            return best_c
        w = w / s
    raise ConvergenceError(
        f"Lawson iteration did not close the gap in {max_iter} steps", last=best_c
    )


def minimax_fit(design: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Chebyshev (discrete sup-norm) fit of target by the design columns."""
    A = np.asarray(design)
    y = np.asarray(target)
    if np.iscomplexobj(A) or np.iscomplexobj(y):
        return _minimax_lawson(A.astype(complex), y.astype(complex))
    return _minimax_real(A.astype(float), y.astype(float))


def pfit(design, target, p, weights=None) -> np.ndarray:
    """Dispatch to the fit minimizing the (weighted) p-seminorm of the residual."""
    if np.isinf(p):
        A = np.asarray(design)
        y = np.asarray(target)
        if weights is not None:
            mask = np.asarray(weights, dtype=float) > 0
            A, y = A[mask], y[mask]
        return minimax_fit(A, y)
    if p == 2:
        return wls_fit(design, target, weights)
    return irls_fit(design, target, weights, p)
