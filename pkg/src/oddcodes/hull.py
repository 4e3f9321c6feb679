"""Origin-in-convex-hull decisions with checkable certificates.

The nearest point of conv(P) to the origin is found with Wolfe's
minimum-norm-point algorithm.  An "inside" answer carries convex weights
whose combination is (numerically) zero; an "outside" answer carries a
separating direction with a strictly positive margin on every point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

INSIDE_TOL = 1e-9
CONVERGENCE_TOL = 1e-11


@dataclass(frozen=True)
class HullCertificate:
    inside: bool
    distance: float
    weights: np.ndarray
    direction: np.ndarray | None = None
    margin: float | None = None

    def verify(self, points, tol: float = INSIDE_TOL) -> bool:
        """Re-check the certificate against ``points`` without the solver."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        if self.inside:
            w = self.weights
            return bool(np.all(w >= -1e-12) and abs(w.sum() - 1) <= 1e-12
                        and np.linalg.norm(w @ P) <= tol)
        return bool(np.all(P @ self.direction >= self.margin) and self.margin > 0)


def _affine_min_norm(P: np.ndarray) -> np.ndarray:
    """Coefficients mu (sum 1) of the min-norm point of the affine hull of rows."""
    s = P.shape[0]
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = P @ P.T
    K[:s, s] = 1.0
    K[s, :s] = 1.0
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    mu = sol[:s]
    return mu / mu.sum()


def min_norm_point(points, tol: float = CONVERGENCE_TOL,
                   max_iter: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Wolfe's algorithm: nearest point of conv(points) to the origin.

    Returns ``(x, weights)`` with ``weights`` on the simplex and
    ``x = weights @ points``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m = P.shape[0]
    if m == 0:
        raise ValueError("empty point set")
    scale = max(float(np.max(np.sum(P * P, axis=1))), 1e-300)
    j0 = int(np.argmin(np.sum(P * P, axis=1)))
    S = [j0]
    lam = np.array([1.0])
    x = P[j0].copy()
    for _ in range(max_iter):
        # major cycle
        if x @ x <= (tol * tol) * scale:
            break
        dots = P @ x
        j = int(np.argmin(dots))
        # relative Wolfe gap, floored at roundoff level
        if x @ x - dots[j] <= max(tol * (x @ x), 1e-15 * scale) or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        # minor cycles
        while True:
            mu = _affine_min_norm(P[S])
            if np.all(mu > 1e-14):
                lam = mu
                x = lam @ P[S]
                break
            neg = mu <= 1e-14
            ratios = lam[neg] / np.maximum(lam[neg] - mu[neg], 1e-300)
            theta = float(np.clip(ratios.min(), 0.0, 1.0))
            lam = (1 - theta) * lam + theta * mu
            keep = lam > 1e-14
            if not keep.all():
                S = [s for s, k in zip(S, keep) if k]
                lam = lam[keep]
            lam = np.clip(lam, 0.0, None)
            lam /= lam.sum()
            x = lam @ P[S]
            if len(S) == 1:
                break
    w = np.zeros(m)
    w[S] = lam
    return w @ P, w


def caratheodory_reduce(points, weights, tol: float = 1e-13) -> np.ndarray:
    """Reduce a convex combination to at most n+1 points with the same value."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.array(weights, dtype=float)
    n = P.shape[1]
    while True:
        S = np.flatnonzero(w > tol)
        w[w <= tol] = 0.0
        if S.size <= n + 1:
            break
        A = np.vstack([P[S].T, np.ones(S.size)])
        alpha = np.linalg.svd(A)[2][-1]
        if alpha.max() <= 0:
            alpha = -alpha
        pos = alpha > 1e-15
        t = np.min(w[S][pos] / alpha[pos])
        w[S] = w[S] - t * alpha
        w[S[pos][np.argmin(w[S][pos] / alpha[pos])]] = 0.0
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def origin_in_hull(points, tol: float = INSIDE_TOL) -> HullCertificate:
    """Decide whether the origin lies in the convex hull of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] == 0 or P.size == 0:
        raise ValueError("origin_in_hull needs at least one point")
    x, w = min_norm_point(P)
    if np.count_nonzero(w) > P.shape[1] + 1:
        w = caratheodory_reduce(P, w)
        x = w @ P
    dist = float(np.linalg.norm(x))
    if dist <= tol:
        return HullCertificate(True, dist, w)
    direction = x / dist
    margin = float(np.min(P @ direction))
    if margin <= 0:
        return _lp_decide(P, tol, dist)
    return HullCertificate(False, dist, w, direction, margin)


def _lp_decide(P: np.ndarray, tol: float, dist: float) -> HullCertificate:
    """Fallback for near-degenerate hulls where the min-norm point stalls.

    Feasibility of {w >= 0, sum w = 1, w @ P = 0} decides membership; an
    infeasible system is answered by the max-margin direction in the box.
    """
    m, n = P.shape
    A = np.vstack([P.T, np.ones(m)])
    b = np.append(np.zeros(n), 1.0)
    res = linprog(np.zeros(m), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status == 0:
        w = np.clip(res.x, 0.0, None)
        w = caratheodory_reduce(P, w / w.sum())
        d = float(np.linalg.norm(w @ P))
        if d <= tol:
            return HullCertificate(True, d, w)
    # maximize t subject to P u >= t, -1 <= u <= 1
    c = np.append(np.zeros(n), -1.0)
    A_ub = np.hstack([-P, np.ones((m, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m),
                  bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    u = res.x[:n] / max(np.linalg.norm(res.x[:n]), 1e-300)
    margin = float(np.min(P @ u))
    if res.status != 0 or margin <= 0:
        raise RuntimeError(f"hull decision failed near distance {dist:.3g}")
    return HullCertificate(False, dist, np.full(m, 1.0 / m), u, margin)


def hull_distance(points) -> float:
    """Euclidean distance from the origin to conv(points)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] == 0 or P.size == 0:
        raise ValueError("hull_distance needs at least one point")
    x, _ = min_norm_point(P)
    return float(np.linalg.norm(x))
