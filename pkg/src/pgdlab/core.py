"""Ambient vectors, objectives, solver configuration, and gradient validators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, EvaluationError

#: Ambient points are plain 1-d float arrays.
Point = np.ndarray

#: Default absolute tolerance for set membership on coordinate residuals.
DEFAULT_MEMBERSHIP_TOL = 1e-9


def as_point(coords) -> Point:
    """Coerce to a finite 1-d float vector; reject NaN/Inf, empty, or higher-rank input."""
    x = np.array(coords, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"expected a non-empty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite coordinates")
    return x


def spectral_norm(Q: np.ndarray, tol: float = 1e-10, max_iters: int = 10000) -> float:
    """Largest-magnitude eigenvalue of a symmetric matrix, by power iteration.

    Iterates v <- Qv / ||Qv|| from a fixed random start until the norm ratio
    stabilizes within ``tol``.  The estimate converges from below, so the
    returned value carries a one-part-in-1e9 inflation to stay a valid upper
    bound for Lipschitz purposes.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = Q @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= tol * max(1.0, nw):
            lam = nw
            break
        lam = nw
    return lam * (1.0 + 1e-9)


class Objective:
    """Differentiable function with exact value/gradient callables.

    ``lipschitz_bound`` is a declared constant dominating
    ``||gradient(x) - gradient(y)|| / ||x - y||``; it is trusted, not
    estimated (see :func:`check_lipschitz` for a sampled validator).
    ``convex`` must only be set when the function is known convex.
    """

    def __init__(self, value: Callable, gradient: Callable,
                 lipschitz_bound: float, convex: bool = False):
        if not np.isfinite(lipschitz_bound) or lipschitz_bound < 0:
            raise ConfigError(f"lipschitz_bound must be a finite nonnegative real, got {lipschitz_bound}")
        self._value_fn = value
        self._gradient_fn = gradient
        self.lipschitz_bound = float(lipschitz_bound)
        self.convex = bool(convex)

    def value(self, x: Point) -> float:
        return float(self._value_fn(x))

    def gradient(self, x: Point) -> Point:
        return np.asarray(self._gradient_fn(x), dtype=float)


class Quadratic(Objective):
    """f(x) = x'Qx/2 + b'x + c with symmetric Q.

    The gradient Lipschitz bound is the spectral norm of Q, computed by power
    iteration (tol 1e-10, at most 10000 iterations).  The convexity flag is
    set from the sign of the smallest eigenvalue.
    """

    def __init__(self, Q, b=None, c: float = 0.0, *, _bound=None, _convex=None):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise ConfigError(f"Q must be square, got shape {Q.shape}")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise ConfigError("Q must be symmetric")
        n = Q.shape[0]
        b = np.zeros(n) if b is None else as_point(b)
        if b.size != n:
            raise ConfigError(f"b has dim {b.size}, Q is {n}x{n}")
        bound = spectral_norm(Q) if _bound is None else float(_bound)
        convex = bool(np.linalg.eigvalsh(Q).min() >= -1e-12) if _convex is None else bool(_convex)
        super().__init__(value=None, gradient=None, lipschitz_bound=bound, convex=convex)
        self.Q = Q
        self.b = b
        self.c = float(c)

    def value(self, x: Point) -> float:
        return float(0.5 * (x @ self.Q @ x) + self.b @ x + self.c)

    def gradient(self, x: Point) -> Point:
        return self.Q @ x + self.b

    @classmethod
    def squared_distance(cls, center) -> "Quadratic":
        """f(x) = ||x - center||^2  (gradient Lipschitz constant 2)."""
        center = as_point(center)
        n = center.size
        return cls(2.0 * np.eye(n), -2.0 * center, float(center @ center))

    @classmethod
    def half_squared_distance(cls, center) -> "Quadratic":
        """f(x) = ||x - center||^2 / 2  (gradient Lipschitz constant 1)."""
        center = as_point(center)
        n = center.size
        return cls(np.eye(n), -center, float(center @ center) / 2.0)


def linear_objective(slope) -> Objective:
    """f(x) = <slope, x>.  The gradient is constant, so the exact Lipschitz
    constant 0 is declared and any step size is admissible."""
    slope = as_point(slope)
    return Objective(value=lambda x: float(slope @ x),
                     gradient=lambda x: slope.copy(),
                     lipschitz_bound=0.0, convex=True)


@dataclass(frozen=True)
class SolverConfig:
    """Step size and stopping rules for the gradient iterations.

    ``gamma=None`` defers to 0.9/L at solve time.  The requirement
    gamma * L < 1 is enforced when a solve starts, not at construction.
    When ``increment_tol`` is zero the increment rule only fires at exact
    fixed points and the residual rule becomes the practical stop.
    """

    gamma: Optional[float] = None
    max_iters: int = 1000
    increment_tol: float = 1e-10
    residual_tol: float = 1e-8
    record_trace: bool = True

    def __post_init__(self):
        if self.gamma is not None and not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError(f"gamma must be a positive real, got {self.gamma}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.increment_tol < 0 or self.residual_tol < 0:
            raise ConfigError("tolerances must be nonnegative")


@dataclass
class Trace:
    """Per-iteration history of a solve.

    ``iterates``, ``values`` and ``residuals`` have one entry per recorded
    point (including the start); ``increments`` and ``subdiff_dist_bounds``
    have one entry per transition.  Residual entries are None when the set
    has no tangent-cone projection.
    """

    iterates: list = field(default_factory=list)
    values: list = field(default_factory=list)
    increments: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    subdiff_dist_bounds: list = field(default_factory=list)

    def __len__(self):
        return len(self.iterates)


def finite_diff_gradient(obj: Objective, x: Point, h: float) -> Point:
    """Central-difference gradient: (f(x + h e_i) - f(x - h e_i)) / (2h) per axis.

    A validator for user-supplied gradients; never used inside the solver.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    x = as_point(x)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp = obj.value(x + e)
        fm = obj.value(x - e)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise EvaluationError(f"non-finite objective value near coordinate {i} of {x}")
        g[i] = (fp - fm) / (2.0 * h)
    return g


@dataclass(frozen=True)
class LipschitzCheck:
    """Sampled gradient-Lipschitz validation.  ``worst_pair`` witnesses ``max_ratio``."""

    max_ratio: float
    bound: float
    ok: bool
    worst_pair: tuple

    def __bool__(self):
        return self.ok


def check_lipschitz(obj: Objective, samples: int, radius: float, seed: int,
                    dim: int) -> LipschitzCheck:
    """Estimate max ||grad(x) - grad(y)|| / ||x - y|| over sampled pairs.

    Returns a report rather than raising: ``ok`` is False and ``worst_pair``
    names the offending pair when the declared bound is exceeded (beyond a
    1e-12 relative rounding allowance).
    """
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    rng = np.random.default_rng(seed)
    max_ratio = 0.0
    worst = (None, None)
    for _ in range(samples):
        x = rng.uniform(-radius, radius, dim)
        y = rng.uniform(-radius, radius, dim)
        dxy = float(np.linalg.norm(x - y))
        if dxy == 0.0:
            continue
        ratio = float(np.linalg.norm(obj.gradient(x) - obj.gradient(y))) / dxy
        if ratio > max_ratio:
            max_ratio = ratio
            worst = (x, y)
    ok = max_ratio <= obj.lipschitz_bound * (1.0 + 1e-12) + 1e-300
    return LipschitzCheck(max_ratio=max_ratio, bound=obj.lipschitz_bound,
                          ok=ok, worst_pair=worst)
