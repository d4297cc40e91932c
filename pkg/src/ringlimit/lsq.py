"""Bound-constrained damped least squares.

A Levenberg-style solver: the normal equations are damped by
``lam * diag(J^T J)``, ``lam`` is divided by 3 after an accepted step
and doubled after a rejected one, and every trial point is projected onto
the box ``[lower, upper]``. Accepted steps never increase the residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import SingularSystemError

ACCEPT_FACTOR = 1.0 / 3.0
REJECT_FACTOR = 2.0
MAX_DAMPING = 1e20


@dataclass
class LsqResult:
    params: np.ndarray
    residual: np.ndarray
    iterations: int
    converged: bool
    message: str
    trace: List[float] = field(default_factory=list)
    """Sum of squared residuals at the start point and after every accepted step."""

    @property
    def ssr(self) -> float:
        return float(self.residual @ self.residual)

    @property
    def rms(self) -> float:
        return float(np.sqrt(self.ssr / self.residual.size))


def central_jacobian(
    fun: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    rel_step: float = 1e-6,
    scale: Optional[np.ndarray] = None,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Central-difference Jacobian, one-sided where a bound would be crossed."""
    p = np.asarray(p, dtype=float)
    scale = np.ones_like(p) if scale is None else scale
    lower = np.full_like(p, -np.inf) if lower is None else lower
    upper = np.full_like(p, np.inf) if upper is None else upper
    columns = []
    for i in range(p.size):
        h = rel_step * max(abs(p[i]), scale[i])
        hi, lo = p.copy(), p.copy()
        hi[i] = p[i] + h
        lo[i] = p[i] - h
        if hi[i] > upper[i]:
            hi[i] = p[i]
        if lo[i] < lower[i]:
            lo[i] = p[i]
        columns.append((fun(hi) - fun(lo)) / (hi[i] - lo[i]))
    return np.stack(columns, axis=1)


def damped_least_squares(
    residual: Callable[[np.ndarray], np.ndarray],
    p0,
    *,
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    scale=None,
    lower=None,
    upper=None,
    xtol: float = 1e-9,
    max_iter: int = 200,
    rel_step: float = 1e-6,
    damping: float = 1e-3,
) -> LsqResult:
    """Minimise ``sum(residual(p)**2)`` from ``p0``.

    Convergence is declared when every component of a step satisfies
    ``|dp_i| <= xtol * (|p_i| + scale_i)``, or when the gradient vanishes.
    Running out of iterations returns the best point with
    ``converged=False``; singular normal equations raise
    :class:`SingularSystemError`.
    """
    p = np.asarray(p0, dtype=float).copy()
    n = p.size
    scale = np.ones(n) if scale is None else np.asarray(scale, dtype=float)
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    p = np.clip(p, lower, upper)

    if jacobian is None:
        def jacobian(q):
            return central_jacobian(residual, q, rel_step, scale, lower, upper)

    r = residual(p)
    cost = float(r @ r)
    trace = [cost]
    lam = damping

    for iteration in range(1, max_iter + 1):
        if cost == 0.0:
            return LsqResult(p, r, iteration - 1, True, "exact fit", trace)
        J = jacobian(p) * scale
        A = J.T @ J
        g = J.T @ r
        if not np.any(g):
            return LsqResult(p, r, iteration - 1, True, "zero gradient", trace)
        diag = np.diag(A).copy()
        while True:
            M = A + lam * np.diag(diag)
            try:
                delta = np.linalg.solve(M, -g)
            except np.linalg.LinAlgError as exc:
                raise SingularSystemError(f"normal equations are singular: {exc}") from exc
            if not np.all(np.isfinite(delta)):
                raise SingularSystemError("normal equations produced a non-finite step")
            trial = np.clip(p + delta * scale, lower, upper)
            step = trial - p
            small = bool(np.all(np.abs(step) <= xtol * (np.abs(p) + scale)))
            with np.errstate(over="ignore", invalid="ignore"):
                r_trial = residual(trial)
                cost_trial = float(r_trial @ r_trial)
            # NaN compares False, so a non-finite trial is rejected
            if cost_trial < cost:
                p, r, cost = trial, r_trial, cost_trial
                trace.append(cost)
                lam *= ACCEPT_FACTOR
                if small:
                    return LsqResult(p, r, iteration, True, "step below tolerance", trace)
                break
            lam *= REJECT_FACTOR
            if small or lam > MAX_DAMPING:
                return LsqResult(p, r, iteration, True, "no further reduction", trace)

    return LsqResult(p, r, max_iter, False, f"no convergence after {max_iter} iterations", trace)


def covariance(jac: np.ndarray, res: np.ndarray, rcond: float = 1e-15):
    """Parameter covariance ``s**2 (J^T J)^-1`` and the condition number of ``J^T J``.

    The condition number is computed after normalising the columns of
    ``J`` so that it reflects parameter degeneracy, not units.
    """
    m, n = jac.shape
    dof = max(m - n, 1)
    s2 = float(res @ res) / dof
    norms = np.linalg.norm(jac, axis=0)
    norms[norms == 0] = 1.0
    Jn = jac / norms
    An = Jn.T @ Jn
    cond = float(np.linalg.cond(An))
    cov = np.linalg.pinv(An, rcond=rcond) / np.outer(norms, norms) * s2
    return cov, cond
