"""The metric thickening S^d_delta as data.

Elements are finitely supported probability measures on the sphere; the
metric is the 1-Wasserstein distance with geodesic ground cost.  Also here:
linear extension of maps to measures, and the odd maps used to bound the
topology of S^d_delta from both sides (crosspolytope map from a projective
code, covering map from a ball cover of RP^d, index map from a basis of odd
functions, and the normalized moment-curve map on S^1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .codes import ProjectiveCode
from .geom import (DimensionError, as_points, as_vector, pairwise_geodesic,
                   set_diameter)
from .oddmaps import SMMap

MERGE_TOL = 1e-12
MAX_ATOMS = 64


class FiniteMeasure:
    """Probability measure sum_i w_i delta_{x_i} on S^d.

    Zero-weight atoms are dropped and atoms closer than 1e-12 are merged.
    """

    __slots__ = ("atoms", "weights", "support_diameter")

    def __init__(self, atoms, weights=None):
        X = as_points(atoms)
        w = (np.full(X.shape[0], 1.0 / X.shape[0]) if weights is None
             else np.asarray(weights, dtype=float).reshape(-1))
        if w.shape[0] != X.shape[0]:
            raise ValueError("atoms and weights differ in length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total!r}, not 1")
        keep = w > 0
        X, w = X[keep], w[keep] / total
        X, w = _merge(X, w)
        X.flags.writeable = False
        w.flags.writeable = False
        self.atoms = X
        self.weights = w
        self.support_diameter = set_diameter(X)

    @classmethod
    def dirac(cls, x) -> FiniteMeasure:
        return cls([as_vector(x)], [1.0])

    @property
    def d(self) -> int:
        return self.atoms.shape[1] - 1

    def __len__(self):
        return self.atoms.shape[0]

    def __neg__(self) -> FiniteMeasure:
        return FiniteMeasure(-self.atoms, self.weights)

    def __repr__(self):
        return (f"FiniteMeasure(d={self.d}, atoms={len(self)}, "
                f"diameter={self.support_diameter:.6g})")


def _merge(X, w):
    if X.shape[0] < 2:
        return X, w
    D = pairwise_geodesic(X)
    owner = np.full(X.shape[0], -1)
    for i in range(X.shape[0]):
        if owner[i] < 0:
            owner[(D[i] <= MERGE_TOL) & (owner < 0)] = i
    reps = np.unique(owner)
    W = np.array([w[owner == r].sum() for r in reps])
    return X[reps], W


def support_diameter(mu: FiniteMeasure) -> float:
    return mu.support_diameter


@dataclass(frozen=True)
class TransportPlan:
    flows: np.ndarray
    cost: float
    source_potential: np.ndarray | None = None
    target_potential: np.ndarray | None = None

    def feasibility_error(self, mu: FiniteMeasure, nu: FiniteMeasure) -> float:
        rows = np.abs(self.flows.sum(axis=1) - mu.weights).max()
        cols = np.abs(self.flows.sum(axis=0) - nu.weights).max()
        return float(max(rows, cols, -min(self.flows.min(), 0.0)))


def wasserstein1(mu: FiniteMeasure, nu: FiniteMeasure) -> tuple[float, TransportPlan]:
    """Exact W1 distance with geodesic ground cost, and an optimal plan.

    Diracs are handled in closed form; otherwise the transport LP is solved
    with HiGHS and its dual potentials are returned on the plan so that
    optimality can be checked independently.
    """
    if mu.d != nu.d:
        raise DimensionError(f"measures on S^{mu.d} and S^{nu.d}")
    m, k = len(mu), len(nu)
    if max(m, k) > MAX_ATOMS:
        raise ValueError(f"wasserstein1 is capped at {MAX_ATOMS} atoms per measure")
    C = pairwise_geodesic(mu.atoms, nu.atoms)
    if m == 1 or k == 1:
        flows = mu.weights[:, None] * nu.weights[None, :]
        return float(np.sum(flows * C)), TransportPlan(flows, float(np.sum(flows * C)))
    A = np.zeros((m + k, m * k))
    for i in range(m):
        A[i, i * k:(i + 1) * k] = 1.0
    for j in range(k):
        A[m + j, j::k] = 1.0
    b = np.concatenate([mu.weights, nu.weights])
    res = linprog(C.ravel(), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    flows = np.clip(res.x.reshape(m, k), 0.0, None)
    duals = res.eqlin.marginals
    cost = float(np.sum(flows * C))
    return cost, TransportPlan(flows, cost, duals[:m], duals[m:])


def linear_extension(f, mu: FiniteMeasure) -> np.ndarray:
    """``sum_i w_i f(x_i)`` for a vectorized map ``f``."""
    F = np.asarray(f(mu.atoms), dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != len(mu):
        raise DimensionError("map output does not match the number of atoms")
    return mu.weights @ F


def crosspolytope_map(code: ProjectiveCode, u) -> FiniteMeasure:
    """Send ``u`` on the l1 unit sphere of R^{n+1} to sum_j |u_j| delta(sign(u_j) x_j).

    With a code of n+1 lines at min angle alpha the support diameter is at
    most pi - alpha, and ``crosspolytope_map(code, -u)`` is the antipodal
    measure.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != code.size:
        raise DimensionError(f"u has {u.size} coordinates, code has {code.size} lines")
    if abs(np.abs(u).sum() - 1.0) > 1e-9:
        raise ValueError("u is not on the l1 unit sphere")
    nz = u != 0
    atoms = np.sign(u[nz])[:, None] * code.lines[nz]
    return FiniteMeasure(atoms, np.abs(u[nz]) / np.abs(u[nz]).sum())


class CoveringError(ValueError):
    """A measure's support meets both balls B(c) and B(-c)."""


def covering_component(mu: FiniteMeasure, center, delta: float) -> float:
    """W1 distance from ``mu`` to the measures avoiding the open ball B_delta(c).

    Evaluated in closed form: each atom inside the ball moves straight out to
    the boundary.  Signed negatively (odd extension) when the support meets
    B_delta(-c) instead.
    """
    c = as_vector(center)
    c = c / np.linalg.norm(c)
    if c.size != mu.d + 1:
        raise DimensionError("center and measure live on different spheres")
    dist = pairwise_geodesic(mu.atoms, c[None, :])[:, 0]
    near = np.maximum(0.0, delta - dist)
    far = np.maximum(0.0, delta - (np.pi - dist))
    hit_near, hit_far = np.any(dist < delta), np.any(np.pi - dist < delta)
    if hit_near and hit_far:
        raise CoveringError(
            "support meets both B(c) and B(-c); its diameter exceeds pi - 2 delta")
    if hit_far:
        return -float(mu.weights @ far)
    return float(mu.weights @ near)


def covering_map(mu: FiniteMeasure, centers, delta: float) -> np.ndarray:
    """Normalized vector of covering components (an odd map S^d_{pi-2 delta} -> S^{n-1}).

    The centers are assumed to cover RP^d at radius ``delta``; this is not
    checked.
    """
    if mu.support_diameter > np.pi - 2 * delta + 1e-12:
        raise ValueError(
            f"support diameter {mu.support_diameter:.6g} exceeds pi - 2 delta "
            f"= {np.pi - 2 * delta:.6g}")
    C = as_points(centers)
    f = np.array([covering_component(mu, c, delta) for c in C])
    nrm = np.linalg.norm(f)
    if nrm == 0.0:
        raise ValueError("all covering components vanish: the balls do not "
                         "cover the support of this measure")
    return f / nrm


def index_bound_map(basis, mu: FiniteMeasure) -> np.ndarray:
    """``(f(mu))_{f in basis}``: linear extensions of the basis functions.

    ``basis`` is a vector-valued map or a sequence of scalar maps.
    """
    if callable(basis):
        return linear_extension(basis, mu)
    cols = [np.asarray(g(mu.atoms), dtype=float).reshape(len(mu)) for g in basis]
    return mu.weights @ np.stack(cols, axis=1)


def sm_sphere_map(k: int, mu: FiniteMeasure) -> np.ndarray:
    """Normalized linear extension of SM_{2k}; defined on S^1_delta for
    delta < 2 pi k / (2k+1)."""
    if mu.d != 1:
        raise DimensionError("sm_sphere_map needs a measure on S^1")
    v = linear_extension(SMMap(k), mu)
    nrm = np.linalg.norm(v)
    if nrm < 1e-9:
        raise ValueError(f"linear extension vanishes (norm {nrm:.3g}); the "
                         f"support is too spread out for k={k}")
    return v / nrm
