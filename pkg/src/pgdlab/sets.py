"""Constraint sets with exact projections, tie enumeration, and cone oracles.

Every set is a closed subset of R^p exposing membership, the full projection
tie set where enumerable, a deterministic projection representative, and,
where closed forms are known, projection onto the tangent cone and a
membership test for the limiting normal cone.  Tie-breaking is deterministic
(lexicographically smallest support for sparse sets, round-toward minus
infinity for grid half-spacing ties) so that runs are reproducible.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .core import DEFAULT_MEMBERSHIP_TOL, Point, as_point
from .errors import CapabilityError, ConfigError, FeasibilityError, NumericError


class ConstraintSet:
    """Closed-set oracle bundle.

    Subclasses set ``dim`` and implement ``contains``, ``project_all`` and
    ``project_one``.  ``projections_complete`` declares whether
    ``project_all`` returns the full argmin set (needed by the projection
    uniqueness probe); sets without that guarantee return a singleton and
    set the flag False.  Cone oracles raise :class:`CapabilityError` unless
    overridden with a closed form.
    """

    dim: int
    projections_complete: bool = True

    def contains(self, x: Point, tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def project_all(self, x: Point) -> list:
        raise NotImplementedError

    def project_one(self, x: Point) -> Point:
        raise NotImplementedError

    def tangent_project(self, base: Point, v: Point,
                        tol: float = DEFAULT_MEMBERSHIP_TOL) -> Point:
        raise CapabilityError(f"{type(self).__name__} has no tangent-cone projection")

    def limiting_normal_contains(self, base: Point, v: Point,
                                 tol: float = DEFAULT_MEMBERSHIP_TOL) -> bool:
        raise CapabilityError(f"{type(self).__name__} has no limiting-normal test")

    def _require_member(self, base: Point, tol: float) -> Point:
        base = as_point(base)
        if not self.contains(base, tol):
            raise FeasibilityError(f"point {base} is not in {type(self).__name__} (tol {tol})")
        return base


def _dedupe(points) -> list:
    """Drop exact duplicates, preserving first-seen order."""
    seen = set()
    out = []
    for p in points:
        key = p.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


class SparseSet(ConstraintSet):
    """Vectors with at most k nonzero coordinates: a union of coordinate subspaces."""

    def __init__(self, dim: int, k: int):
        if not 1 <= k <= dim:
            raise ConfigError(f"need 1 <= k <= dim, got k={k}, dim={dim}")
        self.dim = int(dim)
        self.k = int(k)

    def support(self, x: Point, tol: float = DEFAULT_MEMBERSHIP_TOL) -> np.ndarray:
        return np.flatnonzero(np.abs(x) > tol)

    def contains(self, x, tol=DEFAULT_MEMBERSHIP_TOL):
        return int(np.count_nonzero(np.abs(np.asarray(x, dtype=float)) > tol)) <= self.k

    def project_one(self, x):
        # stable sort on -|x|: magnitude ties resolve to the smallest indices,
        # i.e. the lexicographically smallest support
        x = np.asarray(x, dtype=float)
        if self.k >= self.dim:
            return x.copy()
        order = np.argsort(-np.abs(x), kind="stable")
        out = np.zeros_like(x)
        keep = order[:self.k]
        out[keep] = x[keep]
        return out

    def project_all(self, x):
        x = as_point(x)
        if x.size != self.dim:
            raise ValueError(f"point has dim {x.size}, set has dim {self.dim}")
        if self.k >= self.dim:
            return [x.copy()]
        a = np.abs(x)
        kth = np.partition(a, self.dim - self.k)[self.dim - self.k]
        sure = np.flatnonzero(a > kth)
        tied = np.flatnonzero(a == kth)
        need = self.k - sure.size
        points = []
        for combo in itertools.combinations(tied, need):
            out = np.zeros_like(x)
            keep = np.concatenate([sure, np.array(combo, dtype=int)]).astype(int)
            out[keep] = x[keep]
            points.append(out)
        return _dedupe(points)

    def tangent_project(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        # T at base with support J: directions free on J plus at most k - |J|
        # extra coordinates; the projection keeps v on J and its k - |J|
        # largest off-support magnitudes (ties to the smallest index)
        base = self._require_member(base, tol)
        v = as_point(v)
        supp = self.support(base, tol)
        free = self.k - supp.size
        out = np.zeros_like(v)
        out[supp] = v[supp]
        if free > 0:
            off = np.setdiff1d(np.arange(self.dim), supp)
            order = off[np.argsort(-np.abs(v[off]), kind="stable")]
            keep = order[:free]
            out[keep] = v[keep]
        return out

    def limiting_normal_contains(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        # limits of regular normals at nearby full-support points: v must
        # vanish on the support of base and have at most dim - k nonzeros
        base = self._require_member(base, tol)
        v = as_point(v)
        supp = self.support(base, tol)
        if np.any(np.abs(v[supp]) > tol):
            return False
        return int(np.count_nonzero(np.abs(v) > tol)) <= self.dim - self.k


class GridSet(ConstraintSet):
    """Scaled integer lattice clipped to axis bounds; finite, every point isolated."""

    def __init__(self, spacing: float, bounds):
        if not (np.isfinite(spacing) and spacing > 0):
            raise ConfigError(f"spacing must be positive, got {spacing}")
        bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
        if bounds.ndim != 2 or bounds.shape[1] != 2:
            raise ConfigError(f"bounds must be (dim, 2), got shape {bounds.shape}")
        if not np.all(np.isfinite(bounds)):
            raise ConfigError("grid bounds must be finite")
        self.spacing = float(spacing)
        self.bounds = bounds
        self.dim = bounds.shape[0]
        # integer index range per axis; a small relative nudge absorbs the
        # rounding of lo/h at representable bounds
        eps = 1e-9
        self._zmin = np.array([math.ceil(lo / spacing - eps) for lo, _ in bounds], dtype=int)
        self._zmax = np.array([math.floor(hi / spacing + eps) for _, hi in bounds], dtype=int)
        if np.any(self._zmin > self._zmax):
            raise ConfigError(f"grid is empty: bounds {bounds.tolist()} contain no multiple of {spacing}")

    @property
    def size(self) -> int:
        return int(np.prod(self._zmax - self._zmin + 1))

    def points(self):
        """Iterate over every grid point (diagnostics-scale enumeration)."""
        ranges = [range(lo, hi + 1) for lo, hi in zip(self._zmin, self._zmax)]
        for z in itertools.product(*ranges):
            yield self.spacing * np.array(z, dtype=float)

    def contains(self, x, tol=DEFAULT_MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        z = np.rint(x / self.spacing).astype(int)
        if np.any(z < self._zmin) or np.any(z > self._zmax):
            return False
        return bool(np.all(np.abs(x - self.spacing * z) <= tol))

    def _axis_candidates(self, i: int, xi: float):
        """Nearest clipped lattice indices along axis i; two entries on an exact tie."""
        q = xi / self.spacing
        lo = math.floor(q)
        cands = sorted({min(max(z, self._zmin[i]), self._zmax[i]) for z in (lo, lo + 1)})
        if len(cands) == 2:
            d = [abs(xi - self.spacing * z) for z in cands]
            if d[0] < d[1]:
                cands = cands[:1]
            elif d[1] < d[0]:
                cands = cands[1:]
        return cands

    def project_one(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for i in range(self.dim):
            out[i] = self.spacing * self._axis_candidates(i, x[i])[0]  # ties round toward -inf
        return out

    def project_all(self, x):
        x = as_point(x)
        per_axis = [self._axis_candidates(i, x[i]) for i in range(self.dim)]
        points = []
        for z in itertools.product(*per_axis):
            points.append(self.spacing * np.array(z, dtype=float))
        return _dedupe(points)

    def tangent_project(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        # isolated points: the tangent cone is {0}
        self._require_member(base, tol)
        return np.zeros(self.dim)

    def limiting_normal_contains(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        # isolated points: every vector is a (limiting) normal
        self._require_member(base, tol)
        return True


class BoxSet(ConstraintSet):
    """Axis-aligned box: the convex control case with a unique projection."""

    def __init__(self, bounds):
        bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
        if bounds.ndim != 2 or bounds.shape[1] != 2:
            raise ConfigError(f"bounds must be (dim, 2), got shape {bounds.shape}")
        if not np.all(np.isfinite(bounds)) or np.any(bounds[:, 0] > bounds[:, 1]):
            raise ConfigError("box bounds must be finite with lo <= hi")
        self.bounds = bounds
        self.dim = bounds.shape[0]

    def contains(self, x, tol=DEFAULT_MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.bounds[:, 0] - tol) and np.all(x <= self.bounds[:, 1] + tol))

    def project_one(self, x):
        return np.clip(np.asarray(x, dtype=float), self.bounds[:, 0], self.bounds[:, 1])

    def project_all(self, x):
        return [self.project_one(as_point(x))]

    def tangent_project(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        base = self._require_member(base, tol)
        v = as_point(v)
        out = v.copy()
        at_lo = base - self.bounds[:, 0] <= tol
        at_hi = self.bounds[:, 1] - base <= tol
        out[at_lo] = np.maximum(out[at_lo], 0.0)
        out[at_hi] = np.minimum(out[at_hi], 0.0)
        return out

    def limiting_normal_contains(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        # convex set: limiting and regular normals coincide
        base = self._require_member(base, tol)
        v = as_point(v)
        at_lo = base - self.bounds[:, 0] <= tol
        at_hi = self.bounds[:, 1] - base <= tol
        if np.any(np.abs(v[~at_lo & ~at_hi]) > tol):
            return False
        if np.any(v[at_lo & ~at_hi] > tol):
            return False
        if np.any(v[at_hi & ~at_lo] < -tol):
            return False
        return True


class FinitePointSet(ConstraintSet):
    """An explicit finite list of points: the exhaustively checkable substrate."""

    def __init__(self, points):
        pts = [as_point(p) for p in points]
        if not pts:
            raise ConfigError("point list must be nonempty")
        dim = pts[0].size
        if any(p.size != dim for p in pts):
            raise ConfigError("all points must share one dimension")
        self.points = _dedupe(pts)
        self.dim = dim
        self._array = np.vstack(self.points)

    def contains(self, x, tol=DEFAULT_MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        return bool(np.any(np.max(np.abs(self._array - x), axis=1) <= tol))

    def project_all(self, x):
        x = as_point(x)
        d2 = np.sum((self._array - x) ** 2, axis=1)
        dmin = float(np.sqrt(d2.min()))
        ties = np.flatnonzero(np.sqrt(d2) <= dmin * (1.0 + 1e-12))
        tied = sorted((self._array[i].copy() for i in ties), key=tuple)
        return _dedupe(tied)

    def project_one(self, x):
        return self.project_all(x)[0]  # lexicographically smallest on ties

    def tangent_project(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        self._require_member(base, tol)
        return np.zeros(self.dim)

    def limiting_normal_contains(self, base, v, tol=DEFAULT_MEMBERSHIP_TOL):
        self._require_member(base, tol)
        return True


def jacobi_svd(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Full SVD of a small dense matrix by one-sided Jacobi rotations.

    Columns are pairwise rotated until every normalized off-diagonal Gram
    entry |u_i . u_j| / (||u_i|| ||u_j||) is at most ``tol``.  Returns
    (U, s, Vt) with A = U @ diag(s) @ Vt and s sorted descending (stable on
    ties).  Raises :class:`NumericError` after ``max_sweeps`` sweeps without
    convergence.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    transposed = m < n
    W = A.T.copy() if transposed else A.copy()
    rows, cols = W.shape
    V = np.eye(cols)
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                ui = W[:, i]
                uj = W[:, j]
                aa = float(ui @ ui)
                bb = float(uj @ uj)
                cc = float(ui @ uj)
                if aa == 0.0 or bb == 0.0:
                    continue
                rel = abs(cc) / math.sqrt(aa * bb)
                if rel > off:
                    off = rel
                if rel <= tol:
                    continue
                zeta = (bb - aa) / (2.0 * cc)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                wi = cs * ui - sn * uj
                wj = sn * ui + cs * uj
                W[:, i] = wi
                W[:, j] = wj
                vi = cs * V[:, i] - sn * V[:, j]
                vj = sn * V[:, i] + cs * V[:, j]
                V[:, i] = vi
                V[:, j] = vj
        if off <= tol:
            break
    else:
        raise NumericError(f"one-sided Jacobi SVD did not converge in {max_sweeps} sweeps")
    s = np.linalg.norm(W, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    W = W[:, order]
    V = V[:, order]
    U = np.zeros_like(W)
    nz = s > 0
    U[:, nz] = W[:, nz] / s[nz]
    if transposed:
        return V, s, U.T
    return U, s, V.T


class RankBoundedSet(ConstraintSet):
    """Matrices (flattened row-major) of rank at most r.

    Projection truncates the singular value decomposition, computed by
    one-sided Jacobi iteration.  No tangent or normal cone oracle is
    exposed; diagnostics fall back to fixed-point and quantitative
    certificates.  ``project_all`` is a representative singleton
    (``projections_complete`` is False): the argmin set is a continuum when
    trailing singular values tie.
    """

    projections_complete = False

    def __init__(self, shape, max_rank: int):
        m, n = int(shape[0]), int(shape[1])
        if m < 1 or n < 1 or m > 32 or n > 32:
            raise ConfigError(f"matrix shape must be within 1..32 per side, got {(m, n)}")
        if max_rank < 1:
            raise ConfigError(f"rank bound must be >= 1, got {max_rank}")
        self.shape = (m, n)
        self.max_rank = int(max_rank)
        self.dim = m * n

    def _as_matrix(self, x) -> np.ndarray:
        x = as_point(x)
        if x.size != self.dim:
            raise ValueError(f"point has dim {x.size}, set needs {self.dim}")
        return x.reshape(self.shape)

    def contains(self, x, tol=DEFAULT_MEMBERSHIP_TOL):
        if self.max_rank >= min(self.shape):
            return True
        _, s, _ = jacobi_svd(self._as_matrix(x))
        return bool(np.all(s[self.max_rank:] <= tol))

    def project_one(self, x):
        M = self._as_matrix(x)
        r = min(self.max_rank, min(self.shape))
        U, s, Vt = jacobi_svd(M)
        out = (U[:, :r] * s[:r]) @ Vt[:r, :]
        return out.reshape(-1)

    def project_all(self, x):
        return [self.project_one(x)]
