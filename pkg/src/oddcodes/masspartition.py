"""Ham-sandwich type partitions of weighted point masses by linear hyperplanes.

Halfspace masses use a boundary-splitting rule (atoms on the hyperplane count
half to each side), which makes the bisection residual exactly odd in the
normal direction.  Searches run on tanh-smoothed residuals of increasing
sharpness and are then verified with exact indicators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .caratheodory import CapturedSet, find_matching_measure, find_zero_capture
from .geom import random_sphere_points, set_diameter
from .oddmaps import FunctionMap
from .options import SearchOptions

BOUNDARY_TOL = 1e-12
SHARPNESS = (10.0, 100.0, 1e3, 1e4)


class Mass:
    """Finite weighted point mass in R^D.

    ``disk=True`` marks a mass in the unit disk D^{d+1} embedded in R^{d+2}
    with last coordinate 0.
    """

    def __init__(self, points, weights=None, disk: bool = False):
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if P.shape[0] == 0:
            raise ValueError("a mass needs at least one atom")
        w = (np.ones(P.shape[0]) if weights is None
             else np.asarray(weights, dtype=float).reshape(-1))
        if w.shape[0] != P.shape[0]:
            raise ValueError("points and weights differ in length")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
        if disk:
            if P.shape[1] < 2 or np.any(np.abs(P[:, -1]) > BOUNDARY_TOL):
                raise ValueError("disk masses need last coordinate 0")
            if np.any(np.linalg.norm(P, axis=1) > 1 + 1e-12):
                raise ValueError("disk mass atoms must lie in the unit ball")
        P.flags.writeable = False
        w.flags.writeable = False
        self.points, self.weights, self.disk = P, w, bool(disk)
        self.total = float(w.sum())
        nrm = np.linalg.norm(P, axis=1, keepdims=True)
        self._dirs = np.divide(P, nrm, out=np.zeros_like(P), where=nrm > 0)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def max_weight(self) -> float:
        return float(self.weights.max())

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        kind = "disk " if self.disk else ""
        return f"Mass({kind}atoms={len(self)}, dim={self.dim}, total={self.total:.6g})"


def disk_mass(points, weights=None) -> Mass:
    """Embed points of the unit disk D^{d+1} into R^{d+2} with last coordinate 0."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    return Mass(np.hstack([P, np.zeros((P.shape[0], 1))]), weights, disk=True)


def _check_direction(m: Mass, p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size != m.dim:
        raise ValueError(f"direction has {p.size} coordinates, mass lives in R^{m.dim}")
    if abs(np.linalg.norm(p) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    return p


def _signs(m: Mass, p) -> np.ndarray:
    s = m._dirs @ p
    return np.where(np.abs(s) <= BOUNDARY_TOL, 0.0, np.sign(s))


def halfspace_mass(m: Mass, p) -> float:
    """Weight with <x, p> > 0 plus half the weight on the hyperplane."""
    p = _check_direction(m, p)
    return float(m.weights @ ((1.0 + _signs(m, p)) / 2.0))


def bisection_residual(m: Mass, p) -> float:
    """halfspace_mass(m, p) - halfspace_mass(m, -p); exactly odd in p."""
    p = _check_direction(m, p)
    return float(m.weights @ _signs(m, p))


def _residual_matrix(masses, P, sharpness=None) -> np.ndarray:
    """(N, n) bisection residuals at unit rows of P, exact or tanh-smoothed."""
    cols = []
    for m in masses:
        S = m._dirs @ P.T
        if sharpness is None:
            S = np.where(np.abs(S) <= BOUNDARY_TOL, 0.0, np.sign(S))
        else:
            S = np.tanh(sharpness * S)
        cols.append(m.weights @ S)
    return np.column_stack(cols)


def residual_map(masses, sharpness=None, lift=None) -> FunctionMap:
    """p -> (bisection_residual(m_i, p))_i as an odd map on the unit sphere.

    ``lift`` embeds search points before evaluation (used for disk masses,
    whose normals carry a trailing zero).
    """
    masses = list(masses)
    D = masses[0].dim if lift is None else masses[0].dim - 1

    def func(X):
        Y = X if lift is None else lift(X)
        return _residual_matrix(masses, Y, sharpness)

    name = "exact" if sharpness is None else f"tanh s={sharpness:g}"
    return FunctionMap(D - 1, len(masses), func, odd=True, name=f"bisection {name}")


def _halfspace_map(masses, sharpness=None, lift=None) -> FunctionMap:
    """p -> (halfspace_mass(m_i, p))_i (not odd)."""
    g = residual_map(masses, sharpness, lift)
    totals = np.array([m.total for m in masses])
    return FunctionMap(g.d, g.n, lambda X: (totals + g(X)) / 2.0,
                       name=g.name.replace("bisection", "halfspace"))


def _tolerance(masses, tol):
    return max(m.max_weight for m in masses) if tol is None else float(tol)


# --- exact polish ---------------------------------------------------------

def _through_atom_polish(masses, p, tol, candidates: int = 12):
    """Try hyperplanes through d atoms near the current one; keep the best.

    Discrete masses generally cannot be bisected by a generic hyperplane, but
    one through d atoms (boundary-split) achieves residuals within one atom
    weight.
    """
    D = p.size
    def score(q):
        return float(np.max(np.abs(_residual_matrix(masses, q[None, :])[0])))

    best_q, best = p, score(p)
    if best <= tol or D < 2:
        return best_q, best
    dirs = np.vstack([m._dirs[np.linalg.norm(m._dirs, axis=1) > 0] for m in masses])
    near = dirs[np.argsort(np.abs(dirs @ p))[:candidates]]
    for combo in itertools.combinations(range(near.shape[0]), D - 1):
        A = near[list(combo)]
        q = np.linalg.svd(A)[2][-1]
        if q @ p < 0:
            q = -q
        s = score(q)
        if s < best - 1e-15:
            best_q, best = q, s
            if best <= tol:
                break
    return best_q, best


# --- classical ham sandwich ----------------------------------------------

@dataclass
class HamSandwichResult:
    success: bool
    direction: np.ndarray
    residuals: np.ndarray
    tol: float
    restarts_used: int


def solve_ham_sandwich(masses, opts: SearchOptions | None = None,
                       tol: float | None = None) -> HamSandwichResult:
    """A unit normal p bisecting each of d masses in R^{d+1}.

    Each restart minimizes the sum of squared tanh-smoothed residuals
    (normalized by mass totals) with the sharpness annealed 10 -> 1e4, then
    tries hyperplanes through nearby atoms and verifies with exact indicators.
    """
    masses = list(masses)
    if not masses:
        raise ValueError("need at least one mass")
    D = masses[0].dim
    if any(m.dim != D for m in masses):
        raise ValueError("masses live in different dimensions")
    if len(masses) > D - 1:
        raise ValueError(f"{len(masses)} masses in R^{D}: at most {D - 1} can be "
                         "bisected by one hyperplane; use halving_directions")
    opts = opts or SearchOptions()
    tol = _tolerance(masses, tol)
    totals = np.array([m.total for m in masses])

    best = None
    for r in range(opts.restarts):
        y = random_sphere_points(D - 1, 1, opts.rng(r))[0]
        for s in SHARPNESS:
            def fun(z, s=s):
                q = z / np.linalg.norm(z)
                res = _residual_matrix(masses, q[None, :], s)[0] / totals
                return np.append(res, 0.1 * (np.linalg.norm(z) - 1.0))
            y = least_squares(fun, y, method="trf", max_nfev=200).x
        p = y / np.linalg.norm(y)
        p, worst = _through_atom_polish(masses, p, tol)
        res = _residual_matrix(masses, p[None, :])[0]
        out = HamSandwichResult(worst <= tol, p, res, tol, r + 1)
        if best is None or worst < np.max(np.abs(best.residuals)):
            best = out
        if out.success:
            break
    best.restarts_used = r + 1
    return best


# --- halving directions on S^d --------------------------------------------

@dataclass
class HalvingResult:
    """Directions A (rows) and, per mass i, indices a_i, b_i into A with
    residual_i(A[a_i]) <= tol and residual_i(A[b_i]) >= -tol."""

    success: bool
    directions: np.ndarray
    negative_witness: list
    positive_witness: list
    residuals: np.ndarray
    tol: float
    capture: CapturedSet = field(repr=False, default=None)


def halving_directions(masses, delta: float, opts: SearchOptions | None = None,
                       tol: float | None = None) -> HalvingResult:
    """Directions of diameter <= delta such that each mass is at least halved
    on the negative side of one and on the positive side of another."""
    masses = list(masses)
    tol = _tolerance(masses, tol)
    exact = residual_map(masses)
    smooth = [residual_map(masses, s) for s in SHARPNESS]
    cap = find_zero_capture(exact, delta, opts, continuation=smooth,
                            residual_tol=tol)
    A = cap.atoms
    if A.shape[0] == 1:
        p, _ = _through_atom_polish(masses, A[0], tol)
        A = p[None, :]
    R = exact(A)
    neg, pos = [], []
    for i in range(len(masses)):
        a, b = int(np.argmin(R[:, i])), int(np.argmax(R[:, i]))
        neg.append(a if R[a, i] <= tol else None)
        pos.append(b if R[b, i] >= -tol else None)
    ok = all(v is not None for v in neg + pos)
    return HalvingResult(ok, A, neg, pos, R, tol, cap)


# --- log bundle -----------------------------------------------------------

@dataclass
class LogPartition:
    """Cut times 0 = t_0 <= ... <= t_{k+1} = 1 and normals p_1..p_{k+1}.

    Slab i (between t_{i-1} and t_i) of every mass is split by H(p_i).  For
    ``affine`` partitions the masses are lifted by a homogenizing coordinate
    and the normals live one dimension up.
    """

    times: np.ndarray
    directions: np.ndarray
    residuals: np.ndarray
    delta: float
    success: bool = True
    affine: bool = False
    capture: CapturedSet = field(repr=False, default=None)

    @property
    def k(self) -> int:
        return self.directions.shape[0] - 1

    def max_angle(self) -> float:
        P = self.directions
        return set_diameter(P) if P.shape[0] > 1 else 0.0


def _append_zero(X):
    return np.hstack([X, np.zeros((X.shape[0], 1))])


def _lift_affine(masses):
    """Replace the zero last coordinate of disk masses by 1 (x -> (x, 1))."""
    out = []
    for m in masses:
        P = np.array(m.points)
        P[:, -1] = 1.0
        out.append(Mass(P, m.weights))
    return out


def solve_log_bundle(masses, delta: float, opts: SearchOptions | None = None,
                     tol: float | None = None, affine: bool = False) -> LogPartition:
    """Equipartition of the masses A_j x [0, 1] by horizontal cuts and one
    linear cut per slab, with all cut normals within angle delta.

    A matching measure sum_i l_i delta_{p_i} for p -> (halfspace_mass(A_j, p))_j
    gives the normals; cut times are the cumulative weights.  With
    ``affine=True`` the hyperplanes need not pass through the origin.
    """
    masses = list(masses)
    if not all(m.disk for m in masses):
        raise ValueError("log bundle masses must be disk masses (see disk_mass)")
    if any(m.dim != masses[0].dim for m in masses):
        raise ValueError("masses live in different dimensions")
    tol = _tolerance(masses, tol)

    if affine:
        work, lift = _lift_affine(masses), None
    else:
        work, lift = masses, _append_zero
    exact = _halfspace_map(work, None, lift)
    smooth = [_halfspace_map(work, s, lift) for s in SHARPNESS]
    cap = find_matching_measure(exact, delta, opts, continuation=smooth,
                                residual_tol=tol)
    P = cap.atoms if affine else _append_zero(cap.atoms)
    times = np.concatenate([[0.0], np.cumsum(cap.weights)])
    times[-1] = 1.0
    part = LogPartition(times, P, np.zeros(len(masses)), float(delta),
                        affine=affine, capture=cap)
    part.residuals = verify_partition(masses, part)
    part.success = bool(np.all(np.abs(part.residuals) <= tol)
                        and part.max_angle() <= delta + 1e-6)
    return part


def verify_partition(masses, partition: LogPartition) -> np.ndarray:
    """Per-mass imbalance sum_i (t_i - t_{i-1}) * bisection_residual(A_j, p_i).

    Exact indicators only; reads nothing but the times and directions.
    """
    t = np.asarray(partition.times, dtype=float)
    P = np.atleast_2d(np.asarray(partition.directions, dtype=float))
    if t.ndim != 1 or t.size != P.shape[0] + 1:
        raise ValueError("a partition needs one more cut time than directions")
    if abs(t[0]) > 1e-12 or abs(t[-1] - 1.0) > 1e-12 or np.any(np.diff(t) < -1e-15):
        raise ValueError("cut times must rise from 0 to 1")
    masses = list(masses)
    if partition.affine:
        masses = _lift_affine(masses)
    elif np.any(np.abs(P[:, -1]) > 1e-12):
        raise ValueError("linear log-bundle normals must have last coordinate 0")
    lam = np.diff(t)
    out = np.zeros(len(masses))
    for i, p in enumerate(P):
        if lam[i] == 0.0:
            continue
        out += lam[i] * np.array([bisection_residual(m, p) for m in masses])
    return out


def random_disk_mass(d: int, count: int, seed, center=None, spread: float = 0.3) -> Mass:
    """Gaussian blob clipped to the unit disk D^{d+1}, unit weights."""
    rng = np.random.default_rng(seed)
    c = (rng.uniform(-0.5, 0.5, d + 1) if center is None
         else np.asarray(center, dtype=float))
    P = c + spread * rng.standard_normal((count, d + 1))
    nrm = np.linalg.norm(P, axis=1, keepdims=True)
    P = np.where(nrm > 1, P / nrm * 0.999, P)
    return disk_mass(P)


def random_cloud(dim: int, count: int, seed, spread: float = 1.0) -> Mass:
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(dim)
    return Mass(c + spread * rng.standard_normal((count, dim)))


__all__ = [
    "HalvingResult", "HamSandwichResult", "LogPartition", "Mass",
    "bisection_residual", "disk_mass", "halfspace_mass", "halving_directions",
    "random_cloud", "random_disk_mass", "residual_map", "solve_ham_sandwich",
    "solve_log_bundle", "verify_partition",
]
