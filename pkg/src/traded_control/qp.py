"""Box-constrained convex quadratic programming.

Solves ``min 0.5 x'Hx + g'x  s.t.  lower <= x <= upper`` with a projected
Newton / active-set iteration: variables pinned at a bound whose gradient
points outward are clamped, a Newton step is taken in the free subspace, and
an Armijo search along the projected arc keeps iterates feasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ControllerError


@dataclass
class QPResult:
    x: np.ndarray
    value: float
    iterations: int
    kkt_residual: float


def objective(h: np.ndarray, g: np.ndarray, x: np.ndarray) -> float:
    return float(0.5 * x @ h @ x + g @ x)


def kkt_residual(h, g, x, lower, upper) -> float:
    """Norm of the projected gradient; zero exactly at the optimum."""
    grad = h @ x + g
    return float(np.max(np.abs(x - np.clip(x - grad, lower, upper)), initial=0.0))


def solve_box_qp(h, g, lower, upper, x0=None, *, max_iter=200, tol=1e-10) -> QPResult:
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
    if np.any(lower > upper):
        raise ControllerError("infeasible box: lower > upper")

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    x = np.clip(x, lower, upper)
    value = objective(h, g, x)

    for it in range(1, max_iter + 1):
        grad = h @ x + g
        res = float(np.max(np.abs(x - np.clip(x - grad, lower, upper)), initial=0.0))
        if res <= tol * max(1.0, float(np.max(np.abs(g), initial=0.0))):
            return QPResult(x, value, it - 1, res)

        eps = min(1e-8, res)
        clamped = ((x <= lower + eps) & (grad > 0)) | ((x >= upper - eps) & (grad < 0))
        free = ~clamped
        step = np.zeros(n)
        if np.any(free):
            try:
                factor = cho_factor(h[np.ix_(free, free)])
            except LinAlgError as exc:
                raise ControllerError(
                    "QP Hessian not positive definite on free set",
                    {"iteration": it, "free": int(free.sum())},
                ) from exc
            step[free] = -cho_solve(factor, grad[free])

        alpha = 1.0
        while True:
            x_new = np.clip(x + alpha * step, lower, upper)
            new_value = objective(h, g, x_new)
            # Armijo condition on the projected arc
            if new_value <= value + 1e-4 * grad @ (x_new - x) or alpha < 1e-12:
                break
            alpha *= 0.5
        if alpha < 1e-12 or np.array_equal(x_new, x):
            # Newton direction stalled; fall back to a projected-gradient step
            lip = float(np.linalg.norm(h, 2))
            x_new = np.clip(x - grad / lip, lower, upper)
            new_value = objective(h, g, x_new)
        x, value = x_new, new_value

    res = kkt_residual(h, g, x, lower, upper)
    raise ControllerError(
        "box QP did not converge",
        {"iterations": max_iter, "kkt_residual": res, "value": value},
    )
