"""Projected and proximal gradient iterations with descent monitoring.

Both algorithms share one driver: the projected method is the proximal
method applied to the indicator of the constraint set, so the two produce
bitwise-identical iterates on matching inputs.  The iteration is

    x_{k+1} in prox_{gamma g}(x_k - gamma grad f(x_k)),

which for gamma * L < 1 descends F = f + g by at least
((1 - gamma L) / (2 gamma)) ||x_{k+1} - x_k||^2 per step.

Stopping is increment-driven: the run ends with reason ``increment_tol``
when the step length falls below the tolerance, provided the tangent-cone
residual (when the set exposes one) has also reached ``residual_tol`` --
an increment stall without a certified residual keeps iterating.  Exact
fixed points always stop.  When ``increment_tol`` is configured to zero,
the residual criterion alone stops the run with reason ``residual_tol``.
Isolated-point sets (grids, finite lists) have identically-zero residuals,
so for them only the exact fixed-point rule ends a run early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Point, SolverConfig, Trace, as_point
from .errors import CapabilityError, ConfigError, FeasibilityError, NumericError
from .prox import IndicatorProx, ProxOperator

#: Iterates beyond this norm abort the run: the theory constrains only
#: accumulation points, so unbounded escapes must fail loudly.
DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class SolveResult:
    final_point: Point
    iterations_used: int
    stop_reason: str  # "increment_tol" | "residual_tol" | "max_iters"
    trace: Optional[Trace]
    gamma: float


def _norm(v: np.ndarray) -> float:
    return math.sqrt(float(v @ v))


def projected_gradient(obj, constraint, x0, cfg: SolverConfig = None) -> SolveResult:
    """Minimize f over the constraint set from a feasible start.

    Iterates the deterministic projection representative of
    x_k - gamma grad f(x_k) and records tangent-cone residuals when the set
    provides that oracle.
    """
    cfg = cfg or SolverConfig()
    x0 = as_point(x0)
    if not constraint.contains(x0):
        raise FeasibilityError(f"initial point {x0} is not in the constraint set")
    return _run(obj, IndicatorProx(constraint), x0, cfg)


def proximal_gradient(obj, g: ProxOperator, x0, cfg: SolverConfig = None) -> SolveResult:
    """Minimize f + g from a point with finite penalty.

    The prox step applies the gamma-scaled penalty (hard-threshold weights
    scale with gamma; indicator projections are scale-free).
    """
    cfg = cfg or SolverConfig()
    x0 = as_point(x0)
    if not np.isfinite(g.value(x0)):
        raise FeasibilityError(f"penalty is infinite at the initial point {x0}")
    return _run(obj, g, x0, cfg)


def _residual_fn(g: ProxOperator):
    """Tangent-cone residual callback for indicator penalties over capable sets."""
    if not isinstance(g, IndicatorProx):
        return None
    constraint = g.constraint
    probe = np.zeros(constraint.dim)
    try:
        constraint.tangent_project(constraint.project_one(probe), probe)
    except CapabilityError:
        return None
    except Exception:
        pass  # probe point may be infeasible for exotic sets; the oracle exists
    def residual(x, grad):
        return _norm(constraint.tangent_project(x, -grad))
    return residual


def _run(obj, g: ProxOperator, x0: Point, cfg: SolverConfig) -> SolveResult:
    L = obj.lipschitz_bound
    gamma = cfg.gamma if cfg.gamma is not None else (0.9 / L if L > 0 else 1.0)
    if gamma * L >= 1.0:
        raise ConfigError(f"step size {gamma} too large: need gamma * L < 1 with L = {L}")

    residual = _residual_fn(g)
    x = x0.copy()
    grad = obj.gradient(x)
    if not np.all(np.isfinite(grad)):
        raise NumericError(f"non-finite gradient at {x}")

    trace = None
    if cfg.record_trace:
        trace = Trace()
        trace.iterates.append(x.copy())
        trace.values.append(obj.value(x) + g.value(x))
        trace.residuals.append(residual(x, grad) if residual else None)

    reason = "max_iters"
    used = cfg.max_iters
    for k in range(1, cfg.max_iters + 1):
        y = x - gamma * grad
        xn = g.prox(y, scale=gamma)
        if not np.all(np.isfinite(xn)):
            raise NumericError(f"non-finite iterate at step {k}")
        if _norm(xn) > DIVERGENCE_LIMIT:
            raise NumericError(f"iterate norm exceeded {DIVERGENCE_LIMIT:g} at step {k}: diverging")
        inc = _norm(xn - x)
        grad_n = obj.gradient(xn)
        if not np.all(np.isfinite(grad_n)):
            raise NumericError(f"non-finite gradient at step {k}")

        res = None
        if trace is not None:
            res = residual(xn, grad_n) if residual else None
            F = obj.value(xn) + g.value(xn)
            if not np.isfinite(F):
                raise NumericError(f"non-finite objective value at step {k}")
            trace.iterates.append(xn.copy())
            trace.values.append(F)
            trace.increments.append(inc)
            trace.residuals.append(res)
            trace.subdiff_dist_bounds.append(inc + _norm(grad - grad_n))

        stop = None
        if inc <= cfg.increment_tol:
            if res is None and residual is not None:
                res = residual(xn, grad_n)
            if res is None or res <= cfg.residual_tol or inc == 0.0:
                stop = "increment_tol"
        elif cfg.increment_tol == 0.0 and residual is not None:
            if res is None:
                res = residual(xn, grad_n)
            if res <= cfg.residual_tol:
                stop = "residual_tol"

        x, grad = xn, grad_n
        if stop:
            reason = stop
            used = k
            break

    return SolveResult(final_point=x, iterations_used=used, stop_reason=reason,
                       trace=trace, gamma=gamma)
