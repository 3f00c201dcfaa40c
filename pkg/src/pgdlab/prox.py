"""Proximity operators for lower-semicontinuous extended-real penalties.

Each operator solves argmin_z  scale * g(z) + ||z - x||^2 / 2, enumerating
the full tie set for the separable built-ins.  ``delta`` certifies that
g + ((1 - delta)/2) ||.||^2 is bounded below, which keeps the prox map
nonempty, locally bounded, and upper semicontinuous.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DEFAULT_MEMBERSHIP_TOL, Point, as_point
from .errors import CapabilityError, ConfigError
from .sets import ConstraintSet, _dedupe


class ProxOperator:
    """Penalty g with its (possibly multivalued) proximity map.

    ``value`` evaluates g (may be +inf); ``prox_all``/``prox`` solve the
    scaled subproblem.  ``certified`` marks operators whose boundedness
    hypothesis holds analytically, letting :func:`check_prox_wellposed`
    skip its numeric probe.
    """

    kind: str = "custom"
    delta: float = 1.0
    certified: bool = False

    def value(self, x: Point) -> float:
        raise NotImplementedError

    def prox_all(self, x: Point, scale: float = 1.0) -> list:
        raise NotImplementedError

    def prox(self, x: Point, scale: float = 1.0) -> Point:
        return self.prox_all(x, scale)[0]


class IndicatorProx(ProxOperator):
    """g = 0 on a closed set, +inf outside; the prox map is the projection."""

    kind = "indicator"
    certified = True  # g >= 0, so delta = 1 works

    def __init__(self, constraint: ConstraintSet, membership_tol: float = DEFAULT_MEMBERSHIP_TOL):
        self.constraint = constraint
        self.membership_tol = membership_tol
        self.delta = 1.0

    def value(self, x):
        return 0.0 if self.constraint.contains(x, self.membership_tol) else math.inf

    def prox_all(self, x, scale=1.0):
        # scaling an indicator changes nothing: the prox is the projection
        return self.constraint.project_all(x)

    def prox(self, x, scale=1.0):
        return self.constraint.project_one(x)


class L0Prox(ProxOperator):
    """g(x) = lam * (number of nonzero coordinates): componentwise hard threshold.

    With effective weight w = lam * scale the threshold is tau = sqrt(2 w):
    coordinates above tau in magnitude are kept, below are zeroed, and an
    exact tie enumerates both variants (the representative zeroes ties).
    """

    kind = "l0_penalty"
    certified = True  # g >= 0

    def __init__(self, lam: float):
        if not (np.isfinite(lam) and lam > 0):
            raise ConfigError(f"l0 weight must be positive, got {lam}")
        self.lam = float(lam)
        self.delta = 1.0

    def value(self, x):
        return self.lam * int(np.count_nonzero(np.asarray(x, dtype=float)))

    def prox(self, x, scale=1.0):
        x = np.asarray(x, dtype=float)
        tau = math.sqrt(2.0 * self.lam * scale)
        out = x.copy()
        out[np.abs(x) <= tau] = 0.0
        return out

    def prox_all(self, x, scale=1.0):
        x = as_point(x)
        tau = math.sqrt(2.0 * self.lam * scale)
        variants = []
        for xi in x:
            if abs(xi) > tau:
                variants.append((xi,))
            elif abs(xi) == tau:
                variants.append((0.0, xi))
            else:
                variants.append((0.0,))
        points = []
        for combo in itertools.product(*variants):
            points.append(np.array(combo, dtype=float))
        return _dedupe(points)


def _cholesky_solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A y = rhs for symmetric positive definite A via its Cholesky factor."""
    L = np.linalg.cholesky(A)  # raises LinAlgError when A is not PD
    n = rhs.size
    y = np.zeros(n)
    for i in range(n):
        y[i] = (rhs[i] - L[i, :i] @ y[:i]) / L[i, i]
    z = np.zeros(n)
    for i in range(n - 1, -1, -1):
        z[i] = (y[i] - L[i + 1:, i] @ z[i + 1:]) / L[i, i]
    return z


class QuadraticProx(ProxOperator):
    """g(x) = x'Qx/2 + b'x with symmetric PSD Q: a single-valued smooth prox.

    The subproblem is strongly convex, so prox(x) = (I + scale Q)^{-1} (x - scale b),
    solved by Cholesky factorization.
    """

    kind = "quadratic"
    certified = True

    def __init__(self, Q, b=None):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise ConfigError(f"Q must be square, got {Q.shape}")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise ConfigError("Q must be symmetric")
        eigs = np.linalg.eigvalsh(Q)
        if eigs.min() < -1e-12:
            raise ConfigError("Q must be positive semidefinite")
        n = Q.shape[0]
        self.Q = Q
        self.b = np.zeros(n) if b is None else as_point(b)
        if self.b.size != n:
            raise ConfigError(f"b has dim {self.b.size}, Q is {n}x{n}")
        # delta = 1 iff g itself is bounded below: Q PD, or b orthogonal to
        # the null space of Q; otherwise any delta < 1 works
        if eigs.min() > 1e-12:
            self.delta = 1.0
        else:
            _, vecs = np.linalg.eigh(Q)
            null = vecs[:, np.abs(eigs) <= 1e-12]
            self.delta = 1.0 if np.all(np.abs(null.T @ self.b) <= 1e-12) else 0.5

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * (x @ self.Q @ x) + self.b @ x)

    def prox(self, x, scale=1.0):
        x = np.asarray(x, dtype=float)
        A = np.eye(self.Q.shape[0]) + scale * self.Q
        return _cholesky_solve(A, x - scale * self.b)

    def prox_all(self, x, scale=1.0):
        return [self.prox(as_point(x), scale)]


class CustomProx(ProxOperator):
    """User-supplied penalty; ``delta`` must be certified by the caller.

    Only a single-valued prox is supported, and only at unit scale unless
    the supplied callable accepts a scale argument itself.
    """

    kind = "custom"
    certified = False

    def __init__(self, value, delta: float, prox=None):
        if not 0.0 < delta <= 1.0:
            raise ConfigError(f"delta must lie in (0, 1], got {delta}")
        self._value_fn = value
        self._prox_fn = prox
        self.delta = float(delta)

    def value(self, x):
        return float(self._value_fn(x))

    def prox(self, x, scale=1.0):
        if self._prox_fn is None:
            raise CapabilityError("no prox callable supplied for this penalty")
        if scale != 1.0:
            raise CapabilityError("custom penalties only support unit-scale prox")
        return as_point(self._prox_fn(x))

    def prox_all(self, x, scale=1.0):
        return [self.prox(x, scale)]


@dataclass(frozen=True)
class WellPosedCheck:
    """Outcome of the boundedness screen; ``witness`` is a point on a
    detected decreasing-to-minus-infinity trend."""

    ok: bool
    probed: bool
    witness: Optional[Point] = None
    witness_value: Optional[float] = None

    def __bool__(self):
        return self.ok

def check_prox_wellposed(op: ProxOperator, probes: int = 16, seed: int = 0,
                         dim: int = 2) -> WellPosedCheck:
    """Screen g + ((1 - delta)/2)||.||^2 for unboundedness below.

    Samples directions and geometrically growing radii; a strictly
    decreasing tail that falls below -1e6 is reported as a violation with
    a witness.  A heuristic screen only: analytically certified built-ins
    skip the probe.
    """
    if probes < 1:
        raise ValueError(f"probes must be >= 1, got {probes}")
    if op.certified:
        return WellPosedCheck(ok=True, probed=False)
    rng = np.random.default_rng(seed)
    radii = [2.0 ** j for j in range(0, 21)]
    shift = 0.5 * (1.0 - op.delta)
    for _ in range(probes):
        d = rng.standard_normal(dim)
        nd = np.linalg.norm(d)
        if nd == 0.0:
            continue
        d /= nd
        vals = []
        for r in radii:
            x = r * d
            vals.append(op.value(x) + shift * float(x @ x))
        tail = vals[-8:]
        decreasing = all(b < a for a, b in zip(tail, tail[1:]))
        if decreasing and tail[-1] < -1e6:
            w = radii[-1] * d
            return WellPosedCheck(ok=False, probed=True, witness=w, witness_value=tail[-1])
    return WellPosedCheck(ok=True, probed=True)
