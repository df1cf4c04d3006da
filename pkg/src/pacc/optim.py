"""Small-scale numerical optimization used by learning and control.

Two entry points: an unconstrained quasi-Newton minimizer for the three
free spline coefficients, and a bound/inequality-constrained minimizer
for the short acceleration sequence of the controller.  Both use
numeric central-difference gradients; both guarantee never to return a
point worse than the start.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import ValidationError, _require

GRADIENT_STEP = 1e-6
GRADIENT_TOL = 1e-8
MAX_ITERATIONS = 200
CONSTRAINT_TOL = 1e-6


class InfeasibleError(RuntimeError):
    """No point satisfying the constraints could be found."""


@dataclass
class OptResult:
    x: np.ndarray
    value: float
    converged: bool
    iterations: int = 0


@dataclass(frozen=True)
class BoxedProblem:
    """A box-bounded minimization with inequality constraints ``g(x) >= 0``.

    Each constraint callable may return a scalar or an array; all
    returned components must be nonnegative at a feasible point.
    """

    dimension: int
    objective: Callable[[np.ndarray], float]
    lower: np.ndarray
    upper: np.ndarray
    constraints: tuple = ()

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        _require(lower.shape == (self.dimension,) and upper.shape == (self.dimension,),
                 "bounds must match the problem dimension")
        _require(bool(np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))),
                 "bounds must be finite")
        _require(bool(np.all(lower <= upper)), "lower bounds must not exceed upper bounds")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def violation(self, x: np.ndarray) -> float:
        """Worst constraint violation at ``x`` (0 when feasible, > 0 otherwise)."""
        worst = 0.0
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.upper, initial=0.0)))
        for g in self.constraints:
            vals = np.atleast_1d(np.asarray(g(x), dtype=float))
            worst = max(worst, float(np.max(-vals, initial=0.0)))
        return worst

    def is_feasible(self, x: np.ndarray, tol: float = CONSTRAINT_TOL) -> bool:
        return self.violation(x) <= tol


def central_gradient(f: Callable[[np.ndarray], float], x: np.ndarray,
                     step: float = GRADIENT_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = np.zeros_like(x)
        h[i] = step
        grad[i] = (f(x + h) - f(x - h)) / (2.0 * step)
    return grad


def minimize_unconstrained(objective: Callable[[np.ndarray], float],
                           start: Sequence[float],
                           gradient_tol: float = GRADIENT_TOL,
                           max_iterations: int = MAX_ITERATIONS) -> OptResult:
    """Quasi-Newton (BFGS) minimization with numeric gradients.

    Terminates when the gradient infinity-norm drops below
    ``gradient_tol`` or the iteration budget runs out; in the latter
    case the best point found so far is returned with
    ``converged=False``.  The returned value never exceeds the
    objective at the start point.
    """
    x0 = np.asarray(start, dtype=float)
    f0 = float(objective(x0))
    if not np.isfinite(f0):
        raise ValidationError("objective is not finite at the start point")

    res = minimize(
        objective, x0, method="BFGS",
        jac=lambda x: central_gradient(objective, x),
        options={"gtol": gradient_tol, "maxiter": max_iterations},
    )
    x = np.asarray(res.x, dtype=float)
    value = float(res.fun)
    if not np.isfinite(value) or value > f0:
        x, value = x0, f0
    grad_norm = float(np.max(np.abs(central_gradient(objective, x))))
    return OptResult(x=x, value=value, converged=grad_norm < gradient_tol,
                     iterations=int(res.nit))


def minimize_constrained(problem: BoxedProblem,
                         start: Sequence[float]) -> OptResult:
    """SQP (SLSQP) minimization of a :class:`BoxedProblem`.

    The returned point always lies inside the bounds and satisfies every
    inequality constraint to within ``CONSTRAINT_TOL``; when the start
    is feasible the returned objective is never worse than the start's.
    Raises :class:`InfeasibleError` when no feasible point is found.
    """
    x0 = np.clip(np.asarray(start, dtype=float), problem.lower, problem.upper)
    _require(x0.shape == (problem.dimension,), "start must match the problem dimension")

    cons = [{"type": "ineq",
             "fun": (lambda x, g=g: np.atleast_1d(np.asarray(g(x), dtype=float)))}
            for g in problem.constraints]
    res = minimize(
        problem.objective, x0, method="SLSQP",
        jac=lambda x: central_gradient(problem.objective, x),
        bounds=list(zip(problem.lower, problem.upper)),
        constraints=cons,
        options={"ftol": 1e-10, "maxiter": 200},
    )
    # Bounds hold exactly after clipping; SLSQP may overshoot by rounding only.
    x = np.clip(np.asarray(res.x, dtype=float), problem.lower, problem.upper)

    candidates = []
    if problem.is_feasible(x) and np.isfinite(res.fun):
        candidates.append((float(problem.objective(x)), x))
    if problem.is_feasible(x0):
        candidates.append((float(problem.objective(x0)), x0))
    if not candidates:
        raise InfeasibleError("no feasible point found")
    value, best = min(candidates, key=lambda c: c[0])
    return OptResult(x=best, value=value,
                     converged=bool(res.success),
                     iterations=int(res.get("nit", 0)))
