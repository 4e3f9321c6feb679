"""Geometry of the round sphere S^d and of projective space RP^d.

Points are unit vectors in R^{d+1}.  Most functions accept either a
:class:`SpherePoint` or a plain array; point sets are ``(m, d+1)`` arrays.
"""

from __future__ import annotations

import numpy as np

NORM_TOL = 1e-12


class DimensionError(ValueError):
    """Raised when points of different dimension are combined."""


class SpherePoint:
    """A unit vector in R^{d+1}, i.e. a point of S^d.

    The coordinates are renormalized on construction.
    """

    __slots__ = ("coords",)

    def __init__(self, coords):
        x = np.array(coords, dtype=float).reshape(-1)
        if x.size < 2:
            raise DimensionError("a point of S^d needs at least 2 coordinates")
        nrm = np.linalg.norm(x)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise ValueError("cannot normalize a zero or non-finite vector")
        if abs(nrm - 1.0) > NORM_TOL:
            x = x / nrm
        x.flags.writeable = False
        self.coords = x

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    def __neg__(self) -> SpherePoint:
        return antipode(self)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, SpherePoint):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(
            np.all(self.coords == other.coords))

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"SpherePoint({self.coords.tolist()!r})"


def as_vector(x) -> np.ndarray:
    if isinstance(x, SpherePoint):
        return x.coords
    return np.asarray(x, dtype=float)


def as_points(points) -> np.ndarray:
    """Stack points into an ``(m, d+1)`` array of unit rows.

    Raises ``ValueError`` for an empty set and :class:`DimensionError` for
    mixed dimensions.
    """
    if isinstance(points, np.ndarray) and points.ndim == 2:
        X = points.astype(float, copy=True)
    else:
        rows = [as_vector(p) for p in points]
        if not rows:
            raise ValueError("empty point set")
        sizes = {r.size for r in rows}
        if len(sizes) != 1:
            raise DimensionError(f"mixed dimensions in point set: {sorted(sizes)}")
        X = np.vstack(rows).astype(float)
    if X.shape[0] == 0:
        raise ValueError("empty point set")
    if X.shape[1] < 2:
        raise DimensionError("points must live in R^{d+1} with d >= 1")
    return normalize_rows(X)


def normalize_rows(X: np.ndarray) -> np.ndarray:
    """Unit rows; rows already unit within NORM_TOL are left bit-identical,
    matching SpherePoint."""
    nrm = np.linalg.norm(X, axis=-1, keepdims=True)
    return np.where(np.abs(nrm - 1.0) > NORM_TOL, X / nrm, X)


def _check_same_dim(x: np.ndarray, y: np.ndarray):
    if x.shape[-1] != y.shape[-1]:
        raise DimensionError(
            f"dimension mismatch: S^{x.shape[-1] - 1} vs S^{y.shape[-1] - 1}")


def geodesic_distance(x, y) -> float:
    """Great-circle distance in [0, pi] between unit vectors.

    Computed as ``2 atan2(|x - y|, |x + y|)``, which equals the clamped
    ``arccos <x, y>`` but keeps full precision near 0 and pi.
    """
    x, y = as_vector(x), as_vector(y)
    _check_same_dim(x, y)
    # same kernel as pairwise_geodesic so both agree to the last bit
    return float(pairwise_geodesic(x, y)[0, 0])


def projective_distance(x, y) -> float:
    """Angle in [0, pi/2] between the lines spanned by ``x`` and ``y``."""
    x, y = as_vector(x), as_vector(y)
    _check_same_dim(x, y)
    return float(pairwise_projective(np.vstack([x, y]))[0, 1])


def antipode(x):
    if isinstance(x, SpherePoint):
        return SpherePoint(-x.coords)
    return -as_vector(x)


def pairwise_geodesic(X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    X = np.atleast_2d(X)
    Y = X if Y is None else np.atleast_2d(Y)
    _check_same_dim(X, Y)
    diff = np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=-1)
    summ = np.linalg.norm(X[:, None, :] + Y[None, :, :], axis=-1)
    return 2 * np.arctan2(diff, summ)


def pairwise_projective(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    diff = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    summ = np.linalg.norm(X[:, None, :] + X[None, :, :], axis=-1)
    return 2 * np.arctan2(np.minimum(diff, summ), np.maximum(diff, summ))


def set_diameter(points) -> float:
    """Largest pairwise geodesic distance; 0 for a singleton."""
    X = as_points(points)
    if X.shape[0] == 1:
        return 0.0
    return float(pairwise_geodesic(X).max())


def random_sphere_point(d: int, seed) -> SpherePoint:
    """Uniform point of S^d (normalized Gaussian), deterministic in ``seed``."""
    if d < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    return SpherePoint(_gaussian_unit(rng, 1, d)[0])


def random_sphere_points(d: int, m: int, rng: np.random.Generator) -> np.ndarray:
    if d < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {d}")
    return _gaussian_unit(rng, m, d)


def _gaussian_unit(rng, m, d):
    X = rng.standard_normal((m, d + 1))
    nrm = np.linalg.norm(X, axis=1, keepdims=True)
    # a Gaussian sample is zero with probability 0, but guard anyway
    while np.any(nrm == 0.0):
        bad = nrm[:, 0] == 0.0
        X[bad] = rng.standard_normal((int(bad.sum()), d + 1))
        nrm = np.linalg.norm(X, axis=1, keepdims=True)
    return X / nrm


def circle_point(t) -> np.ndarray:
    """Point(s) of S^1 at angle ``t`` (radians)."""
    t = np.asarray(t, dtype=float)
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


def circle_angle(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.arctan2(X[..., 1], X[..., 0])


def sphere_grid(d: int, count: int, seed: int = 0) -> np.ndarray:
    """Sample points covering S^d fairly evenly.

    Equally spaced on the circle; a Fibonacci spiral on S^2; seeded uniform
    samples above.
    """
    if d == 1:
        return circle_point(2 * np.pi * np.arange(count) / count)
    if d == 2:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        r = np.sqrt(1 - z ** 2)
        phi = np.pi * (3 - np.sqrt(5)) * k
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return random_sphere_points(d, count, np.random.default_rng(seed))


def geodesic_toward(x: np.ndarray, y: np.ndarray, s: float) -> np.ndarray:
    """Point at fraction ``s`` along the shortest arc from ``x`` to ``y``."""
    theta = 2 * np.arctan2(np.linalg.norm(x - y), np.linalg.norm(x + y))
    if theta < 1e-15:
        return x.copy()
    v = y - np.cos(theta) * x
    v /= np.linalg.norm(v)
    return np.cos(s * theta) * x + np.sin(s * theta) * v
