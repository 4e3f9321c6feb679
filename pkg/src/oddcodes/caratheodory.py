"""Capturing the origin with images of small sets.

For an odd map f: S^d -> R^n the search looks for at most n+1 points of
diameter <= delta whose images have the origin in their convex hull (a zero
of the linear extension of f on S^d_delta).  A code of n+1 lines with min
angle alpha guarantees such a set exists once delta >= pi - alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .codes import best_known_code
from .geom import (circle_angle, geodesic_toward, normalize_rows, pairwise_geodesic,
                   random_sphere_points, set_diameter, sphere_grid)
from .hull import (HullCertificate, caratheodory_reduce, hull_distance,
                   min_norm_point, origin_in_hull)
from .oddmaps import AntipodalDifference, FunctionMap, SMMap, sm_curve
from .options import SearchOptions

__all__ = [
    "ArcSet", "CapSet", "CapturedSet", "CoverSet", "HullCertificate",
    "LSBResult", "OracleSet", "SweepRow", "caratheodory_reduce",
    "find_matching_measure", "find_zero_capture", "hull_distance",
    "lsb_threshold", "lsb_witness", "min_norm_point", "origin_in_hull",
    "sm_hull_certificate", "sm_polygon", "sm_threshold", "sm_threshold_sweep",
    "verify_sm_lemma",
]

RESIDUAL_TOL = 1e-6
DIAMETER_TOL = 1e-6
WEIGHT_FLOOR = 1e-12


@dataclass
class CapturedSet:
    """Outcome of a zero-capture search.

    On success, ``atoms``/``weights`` certify ``|sum w_i f(x_i)| = residual``
    with ``diameter(atoms) <= delta``.  On failure they hold the best feasible
    configuration found; failure is inconclusive, not a proof of nonexistence.
    """

    success: bool
    atoms: np.ndarray
    weights: np.ndarray
    diameter: float
    residual: float
    delta: float
    restarts_used: int
    info: dict = field(default_factory=dict)

    def replay(self, f, atoms=None) -> tuple[float, float]:
        """Recompute (residual, diameter) from the stored atoms and weights."""
        X = self.atoms if atoms is None else atoms
        F = np.atleast_2d(f(X))
        return float(np.linalg.norm(self.weights @ F)), set_diameter(X)


# --- the search -----------------------------------------------------------

def _initial_points(d, m, delta, rng, kind="cluster"):
    """Starting points: a cluster inside delta, uniform, or a jittered odd polygon.

    Sets of small diameter need not sit inside a cap (an odd regular polygon
    on a great circle has diameter pi (j-1)/j), and the penalty path from a
    cluster rarely reaches them, so restarts cycle through all three kinds.
    """
    c = random_sphere_points(d, 1, rng)[0]
    if delta >= math.pi or kind == "uniform":
        return random_sphere_points(d, m, rng)
    if kind == "polygon":
        j = 3
        while j + 2 <= m and math.pi * (j + 1) / (j + 2) <= delta:
            j += 2
        if j > m or math.pi * (j - 1) / j > delta:
            kind = "cluster"
        else:
            u = random_sphere_points(d, 1, rng)[0]
            u -= (u @ c) * c
            u /= np.linalg.norm(u)
            t = rng.uniform(0, 2 * math.pi) + 2 * math.pi * np.arange(j) / j
            P = np.outer(np.cos(t), c) + np.outer(np.sin(t), u)
            P = P[np.arange(m) % j]
            jitter = 0.02 * rng.standard_normal(P.shape)
            return normalize_rows(P + jitter)
    V = rng.standard_normal((m, d + 1))
    V -= np.outer(V @ c, c)
    V /= np.maximum(np.linalg.norm(V, axis=1, keepdims=True), 1e-300)
    r = rng.uniform(0, 0.45 * delta, size=(m, 1))
    return np.cos(r) * c + np.sin(r) * V


START_KINDS = ("cluster", "polygon", "uniform")


def _pair_angles(X, iu, ju):
    A, B = X[iu], X[ju]
    diff = np.sqrt(np.einsum("ij,ij->i", A - B, A - B))
    summ = np.sqrt(np.einsum("ij,ij->i", A + B, A + B))
    return 2 * np.arctan2(diff, summ)


class _Problem:
    def __init__(self, f, d, m, delta):
        self.f, self.d, self.m, self.delta = f, d, m, delta
        self.iu, self.ju = np.triu_indices(m, 1)
        self.target = max(delta - min(1e-4, 0.01 * delta), 0.0)

    def unpack(self, z):
        D = self.d + 1
        Y = z[: self.m * D].reshape(self.m, D)
        logits = z[self.m * D:]
        w = np.exp(logits - logits.max())
        r = np.sqrt(np.einsum("ij,ij->i", Y, Y))
        return Y, Y / r[:, None], w / w.sum(), r

    def pack(self, X, w):
        return np.concatenate([X.ravel(), np.log(np.maximum(w, 1e-300))])

    def residuals(self, z, rho):
        _, X, w, r = self.unpack(z)
        F = np.atleast_2d(self.f(X))
        parts = [w @ F, 0.1 * (r - 1.0)]
        if self.m > 1 and self.delta < math.pi:
            th = _pair_angles(X, self.iu, self.ju)
            parts.append(math.sqrt(rho) * np.maximum(0.0, th - self.target))
        return np.concatenate(parts)


def _support(X, w):
    keep = w > WEIGHT_FLOOR
    X, w = X[keep], w[keep]
    return X, w / w.sum()


def _certify(f, X, w):
    """Best weights for the given points: the optimizer's or the exact hull's."""
    F = np.atleast_2d(f(X))
    res_opt = float(np.linalg.norm(w @ F))
    cert = origin_in_hull(F)
    if cert.distance <= res_opt:
        w = cert.weights
    Xs, ws = _support(X, w)
    res = float(np.linalg.norm(ws @ np.atleast_2d(f(Xs))))
    return Xs, ws, res


def _contract(X, delta):
    """Shrink a point set toward its center until its diameter is <= delta."""
    if set_diameter(X) <= delta:
        return X
    c = X.mean(axis=0)
    c = X[0] if np.linalg.norm(c) < 1e-9 else c / np.linalg.norm(c)
    lo, hi = 0.0, 1.0
    for _ in range(60):
        s = 0.5 * (lo + hi)
        Y = np.array([geodesic_toward(c, x, s) for x in X])
        if set_diameter(Y) <= delta:
            lo = s
        else:
            hi = s
    return np.array([geodesic_toward(c, x, lo) for x in X])


def _run_restart(stages, d, m, delta, rng, init=None, kind="cluster"):
    """One restart through a list of (map, penalty) stages."""
    f0 = stages[0][0]
    if init is None:
        X = _initial_points(d, m, delta, rng, kind)
        w = rng.dirichlet(np.ones(m))
    else:
        X, w = init
    z = _Problem(f0, d, m, delta).pack(X, w)
    for i, (f, rho) in enumerate(stages):
        prob = _Problem(f, d, m, delta)
        tol = 1e-12 if i == len(stages) - 1 else 1e-8
        sol = least_squares(prob.residuals, z, args=(rho,), method="trf",
                            ftol=tol, xtol=tol, gtol=tol,
                            max_nfev=300 if i == len(stages) - 1 else 100)
        z = sol.x
    prob = _Problem(stages[-1][0], d, m, delta)
    _, X, w, _ = prob.unpack(z)
    return X, w, prob, z


def find_zero_capture(f, delta: float, opts: SearchOptions | None = None, *,
                      continuation=None, residual_tol: float = RESIDUAL_TOL,
                      diameter_tol: float = DIAMETER_TOL) -> CapturedSet:
    """Search for <= n+1 points of diameter <= delta capturing the origin under f.

    Each restart minimizes ``|sum w_i f(x_i)|^2 + rho * sum_{i<j}
    max(0, d(x_i, x_j) - delta)^2`` over points and softmax weights, with rho
    annealed from ``opts.penalty_start`` to ``opts.penalty``.  The candidate is
    then re-certified: exact hull weights, support extraction, diameter check.
    ``continuation`` optionally lists smoother versions of ``f`` to run first
    (warm-starting each from the previous).
    """
    if not 0.0 <= delta <= math.pi:
        raise ValueError(f"delta must lie in [0, pi], got {delta!r}")
    opts = opts or SearchOptions()
    d, n = int(f.d), int(f.n)
    maps = list(continuation or []) + [f]
    single = delta < diameter_tol
    m = 1 if single else n + 1
    rhos = opts.schedule(4, opts.penalty_start, opts.penalty)
    stages = [(maps[0], rho) for rho in rhos] + [(g, rhos[-1]) for g in maps[1:]]

    best = None
    history = []
    for r in range(opts.restarts):
        rng = opts.rng(r)
        X, w, prob, z = _run_restart(
            stages, d, m, delta, rng, kind=START_KINDS[r % len(START_KINDS)])
        Xs, ws, res = _certify(f, X, w)
        if opts.polish and res < 1e-2 and res > residual_tol * 1e-3:
            z = prob.pack(X, w)
            sol = least_squares(prob.residuals, z, args=(opts.penalty * 100,),
                                method="trf", ftol=1e-15, xtol=1e-15,
                                gtol=1e-15, max_nfev=2000)
            _, X2, w2, _ = prob.unpack(sol.x)
            Xp, wp, resp = _certify(f, X2, w2)
            if resp < res and set_diameter(Xp) <= delta + diameter_tol:
                Xs, ws, res = Xp, wp, resp
        diam = set_diameter(Xs)
        if diam > delta + diameter_tol:
            Xs = _contract(Xs, delta)
            Fc = np.atleast_2d(f(Xs))
            cert = origin_in_hull(Fc)
            Xs, ws = _support(Xs, cert.weights)
            res = float(np.linalg.norm(ws @ np.atleast_2d(f(Xs))))
            diam = set_diameter(Xs)
        history.append(res)
        ok = res <= residual_tol and diam <= delta + diameter_tol
        if best is None or (ok and not best.success) or (ok == best.success and res < best.residual):
            best = CapturedSet(ok, Xs, ws, diam, res, float(delta), r + 1,
                               {"best_restart": r})
        if ok:
            break
    best.restarts_used = len(history)
    best.info["restart_residuals"] = history
    return best


def find_matching_measure(f, delta: float, opts: SearchOptions | None = None,
                          **kwargs) -> CapturedSet:
    """Points X of diameter <= delta and weights with sum w f(x) = sum w f(-x).

    Runs :func:`find_zero_capture` on ``g(x) = f(x) - f(-x)``; the common
    hull point is reported in ``info["common_point"]``.
    """
    g = AntipodalDifference(f)
    cont = kwargs.pop("continuation", None)
    if cont:
        cont = [AntipodalDifference(h) for h in cont]
    out = find_zero_capture(g, delta, opts, continuation=cont, **kwargs)
    out.info["common_point"] = out.weights @ np.atleast_2d(f(out.atoms))
    out.info["mirror_point"] = out.weights @ np.atleast_2d(f(-out.atoms))
    return out


# --- the moment curve -----------------------------------------------------

def sm_threshold(k: int) -> float:
    """2 pi k / (2k+1): below this diameter no set captures the origin under SM_{2k}."""
    return 2 * math.pi * k / (2 * k + 1)


def sm_polygon(k: int) -> np.ndarray:
    """Angles of the 2k+1 equally spaced points; their set diameter is the threshold."""
    return 2 * math.pi * np.arange(2 * k + 1) / (2 * k + 1)


def sm_hull_certificate(k: int, times) -> HullCertificate:
    return origin_in_hull(sm_curve(k, np.asarray(times, dtype=float)))


def verify_sm_lemma(k: int, diameter: float, samples: int = 200,
                    offset: float = 0.0) -> HullCertificate:
    """Hull certificate for SM_{2k} sampled uniformly on an arc of the given length."""
    if k < 1 or samples < 3 or not 0.0 <= diameter <= math.pi:
        raise ValueError("verify_sm_lemma needs k >= 1, samples >= 3, "
                         "diameter in [0, pi]")
    t = offset + np.linspace(0.0, diameter, int(samples))
    return sm_hull_certificate(k, t)


@dataclass(frozen=True)
class SweepRow:
    diameter: float
    arc_inside: bool
    arc_distance: float
    captured: bool
    residual: float
    witness_diameter: float


def sm_threshold_sweep(k: int, diameters, opts: SearchOptions | None = None,
                       samples: int = 200) -> list[SweepRow]:
    """For each diameter: the arc hull check and a zero-capture search for SM_{2k}.

    "captured" is the inside/outside flag: a certified set of diameter <= D
    whose image hull contains the origin.  The arc check alone cannot locate
    the threshold, since an arc only captures the origin once it reaches a
    half circle.
    """
    f = SMMap(k)
    rows = []
    for D in diameters:
        D = float(D)
        arc = verify_sm_lemma(k, D, samples)
        cap = find_zero_capture(f, D, opts)
        rows.append(SweepRow(D, arc.inside, arc.distance, cap.success,
                             cap.residual, cap.diameter))
    return rows


# --- LSB covers -----------------------------------------------------------

MEMBERSHIP_TOL = 1e-6


class CoverSet:
    """A closed subset of S^d given by its geodesic distance function.

    Membership is ``distance <= tol``.  Subclasses implement ``distance``.
    """

    d: int

    def distance(self, X) -> np.ndarray:
        raise NotImplementedError

    def contains(self, X, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        return self.distance(X) <= tol


class ArcSet(CoverSet):
    """Closed arc of S^1 from angle ``start`` counterclockwise through ``length``."""

    def __init__(self, start: float, length: float):
        if not 0.0 <= length <= 2 * math.pi:
            raise ValueError("arc length must lie in [0, 2 pi]")
        self.start, self.length, self.d = float(start), float(length), 1

    def distance(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        t = np.mod(circle_angle(X) - self.start, 2 * math.pi)
        inside = t <= self.length
        gap = np.minimum(t - self.length, 2 * math.pi - t)
        return np.where(inside, 0.0, gap)

    def __repr__(self):
        return f"ArcSet(start={self.start:.6g}, length={self.length:.6g})"


class CapSet(CoverSet):
    """Closed spherical cap of geodesic radius ``radius`` around ``center``."""

    def __init__(self, center, radius: float):
        c = np.asarray(center, dtype=float).reshape(-1)
        self.center = c / np.linalg.norm(c)
        self.radius = float(radius)
        self.d = c.size - 1

    def distance(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.maximum(0.0, pairwise_geodesic(X, self.center[None, :])[:, 0]
                          - self.radius)


class OracleSet(CoverSet):
    """Wrap a user-supplied vectorized distance function."""

    def __init__(self, d: int, distance, name: str = ""):
        self.d, self._distance, self.name = int(d), distance, name

    def distance(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(self._distance(X), dtype=float).reshape(X.shape[0])


@dataclass
class LSBResult:
    """``kind`` is "witness", "violation" or "inconclusive".

    A witness names a set index and a point x with x and -x both in that set.
    A violation carries sample points of a set of diameter <= ``delta`` that
    no cover set contains.
    """

    kind: str
    delta: float
    index: int | None = None
    point: np.ndarray | None = None
    violating_set: np.ndarray | None = None
    capture: CapturedSet | None = None
    phase: str = ""


def lsb_threshold(d: int, n: int, opts: SearchOptions | None = None) -> float:
    """Upper bound pi - p_{n+1}(RP^d) on c_n(S^d); zero when n <= d."""
    if n <= d:
        return 0.0
    return math.pi - best_known_code(d, n + 1, opts).min_distance


def _antipodal_scan(cover, X, tol):
    for i, A in enumerate(cover):
        both = A.contains(X, tol) & A.contains(-X, tol)
        if np.any(both):
            return i, X[int(np.argmax(both))]
    return None


def _small_sets(d, delta, grid, samples):
    """Sample sets of diameter delta: arcs on S^1, cap boundaries plus center above."""
    C = sphere_grid(d, grid, seed=0)
    if d == 1:
        t0 = circle_angle(C)
        s = np.linspace(0.0, delta, samples)
        for a in t0:
            yield np.column_stack([np.cos(a + s), np.sin(a + s)])
        return
    for c in C:
        B = np.linalg.svd(c[None, :])[2][1:]
        ang = np.linspace(0, 2 * math.pi, samples, endpoint=False)
        rng = np.random.default_rng(0)
        dirs = rng.standard_normal((samples, d)) if d > 2 else np.column_stack(
            [np.cos(ang), np.sin(ang)])
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        ring = np.cos(delta / 2) * c + np.sin(delta / 2) * (dirs @ B)
        yield np.vstack([c[None, :], ring])


def lsb_witness(cover, d: int, opts: SearchOptions | None = None, *,
                grid: int = 720, samples: int = 64, tol: float = MEMBERSHIP_TOL,
                scan_first: bool = True) -> LSBResult:
    """Find a cover set containing an antipodal pair.

    Order of work: a grid scan for an antipodal pair inside one set (a set of
    diameter pi gives one immediately), then the sampled hypothesis check
    that every set of diameter <= c_n bound lies in some cover set, then a
    matching-measure search on ``f(x) = (d(x, A_1), ..., d(x, A_n))`` whose
    support (and a neighborhood of it) is scanned for the pair.
    """
    cover = list(cover)
    if not cover:
        raise ValueError("empty cover")
    if any(A.d != d for A in cover):
        raise ValueError("cover sets live on different spheres")
    opts = opts or SearchOptions()
    n = len(cover)
    delta = lsb_threshold(d, n, opts)
    G = sphere_grid(d, grid, seed=0)

    if scan_first:
        hit = _antipodal_scan(cover, G, tol)
        if hit is not None:
            return LSBResult("witness", delta, hit[0], hit[1], phase="scan")

    for S in _small_sets(d, delta, max(grid // 4, 16), samples):
        if not any(np.all(A.contains(S, tol)) for A in cover):
            return LSBResult("violation", delta, violating_set=S,
                             phase="hypothesis")

    f = FunctionMap(d, n, lambda X: np.column_stack([A.distance(X) for A in cover]),
                    name="cover distances")
    cap = find_matching_measure(f, delta, opts)
    rng = np.random.default_rng(opts.seed)
    for x in cap.atoms:
        near = normalize_rows(x + 1e-3 * rng.standard_normal((200, d + 1)))
        hit = _antipodal_scan(cover, np.vstack([x[None, :], near]), tol)
        if hit is not None:
            return LSBResult("witness", delta, hit[0], hit[1], capture=cap,
                             phase="capture")
    hit = _antipodal_scan(cover, G, tol)
    if hit is not None:
        return LSBResult("witness", delta, hit[0], hit[1], capture=cap,
                         phase="grid")
    return LSBResult("inconclusive", delta, capture=cap, phase="capture")
