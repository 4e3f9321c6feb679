"""Projective codes: line packings in RP^d with certified minimal angle.

Every constructor returns a :class:`ProjectiveCode` whose ``min_distance`` is
recomputed from the stored lines, so any code is a lower-bound witness for
the packing number p_n(RP^d).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .geom import (DimensionError, as_points, pairwise_projective,
                   random_sphere_points)
from .options import SearchOptions

GOLDEN = (1 + math.sqrt(5)) / 2
LATTICE_BUDGET = 10 ** 7


def canonical_lines(X: np.ndarray) -> np.ndarray:
    """Flip each row so that its first non-negligible coordinate is positive."""
    X = np.array(X, dtype=float)
    for row in X:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row *= -1
    return X


line_angles = pairwise_projective


def _min_offdiag(A: np.ndarray) -> float:
    n = A.shape[0]
    iu = np.triu_indices(n, 1)
    return float(A[iu].min())


@dataclass(frozen=True, eq=False)
class ProjectiveCode:
    lines: np.ndarray
    min_distance: float | None
    degenerate: bool = False
    info: dict = field(default_factory=dict)

    @classmethod
    def from_lines(cls, lines, info: dict | None = None) -> ProjectiveCode:
        X = canonical_lines(as_points(lines))
        X.flags.writeable = False
        md = _min_offdiag(line_angles(X)) if X.shape[0] >= 2 else None
        return cls(X, md, md is not None and md <= 1e-12, dict(info or {}))

    @property
    def d(self) -> int:
        return self.lines.shape[1] - 1

    @property
    def size(self) -> int:
        return self.lines.shape[0]

    def __len__(self):
        return self.size

    def __repr__(self):
        return (f"ProjectiveCode(n={self.size}, d={self.d}, "
                f"min_distance={self.min_distance!r})")


def min_distance(code: ProjectiveCode) -> float:
    """Exact minimum pairwise line angle, recomputed from the lines."""
    if code.size < 2:
        raise ValueError("min_distance needs at least 2 lines")
    return _min_offdiag(line_angles(code.lines))


def thickening_scale(code: ProjectiveCode) -> float:
    """pi minus the code's min angle: the thickening scale the code certifies."""
    return math.pi - min_distance(code)


def orthonormal_code(d: int) -> ProjectiveCode:
    return ProjectiveCode.from_lines(np.eye(d + 1), {"kind": "orthonormal"})


def hypercube_code(d: int) -> ProjectiveCode:
    """Lines through the vertices of the cube [-1, 1]^d (2^{d-1} lines in RP^{d-1})."""
    if d < 2:
        raise ValueError("hypercube_code needs d >= 2")
    if d > 20:
        raise ValueError("hypercube_code: d > 20 exceeds the size guard")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=d - 1)))
    X = np.hstack([np.ones((signs.shape[0], 1)), signs]) / math.sqrt(d)
    return ProjectiveCode.from_lines(X, {
        "kind": "hypercube", "d": d,
        "stated_bound": math.acos(1 - 1 / d),
        "exact_angle": math.acos(1 - 2 / d) if d > 2 else math.pi / 2,
    })


def lattice_code(d: int, n: int) -> ProjectiveCode:
    """Lines through the largest shell S_r of the box {|x_i| <= n} in Z^d.

    Ties between shells go to the larger r.  The code lives in RP^{d-1};
    ``info`` records the shell, its point and line counts, and the angle
    bounds ``arccos(1 - 1/r) >= arccos(1 - 1/(d n^2))``.
    """
    if d < 2 or n < 1:
        raise ValueError("lattice_code needs d >= 2 and n >= 1")
    if (2 * n + 1) ** d > LATTICE_BUDGET:
        raise ValueError(
            f"lattice_code: (2n+1)^d = {(2 * n + 1) ** d} exceeds the "
            f"enumeration budget {LATTICE_BUDGET}")
    axis = np.arange(-n, n + 1)
    grid = np.array(np.meshgrid(*([axis] * d), indexing="ij")).reshape(d, -1).T
    sq = (grid ** 2).sum(axis=1)
    counts = np.bincount(sq, minlength=d * n * n + 1)
    sizes = counts[1:]
    best = int(np.flatnonzero(sizes == sizes.max()).max()) + 1
    shell = grid[sq == best]
    # one representative per antipodal pair
    first = np.array([row[np.flatnonzero(row)[0]] for row in shell])
    reps = shell[first > 0]
    code = ProjectiveCode.from_lines(reps / math.sqrt(best), {
        "kind": "lattice", "d": d, "n": n, "r": best,
        "point_count": int(shell.shape[0]),
        "line_count": int(reps.shape[0]),
        "cardinality_bound": n ** (d - 2),
        "shell_bound": math.acos(1 - 1 / best),
        "stated_bound": math.acos(1 - 1 / (d * n * n)),
    })
    return code


def cell600_vertices() -> np.ndarray:
    """The 120 unit vertices of the 600-cell."""
    verts = []
    for i in range(4):
        for s in (1.0, -1.0):
            v = np.zeros(4)
            v[i] = s
            verts.append(v)
    for signs in itertools.product((0.5, -0.5), repeat=4):
        verts.append(np.array(signs))
    base = (GOLDEN / 2, 0.5, 1 / (2 * GOLDEN), 0.0)
    even = [p for p in itertools.permutations(range(4)) if _parity(p) == 0]
    for p in even:
        for s in itertools.product((1.0, -1.0), repeat=3):
            v = np.zeros(4)
            vals = (s[0] * base[0], s[1] * base[1], s[2] * base[2], 0.0)
            for src, dst in enumerate(p):
                v[dst] = vals[src]
            verts.append(v)
    return np.array(verts)


def _parity(perm) -> int:
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm))
              if perm[i] > perm[j])
    return inv % 2


def cell600_code() -> ProjectiveCode:
    """The 60 lines through antipodal vertex pairs of the 600-cell (angle pi/5)."""
    V = canonical_lines(cell600_vertices())
    reps = np.unique(np.round(V, 12), axis=0)
    return ProjectiveCode.from_lines(reps, {"kind": "600cell"})


def icosahedron_code() -> ProjectiveCode:
    """The six equiangular lines through the vertices of the icosahedron."""
    rows = []
    for a, b in itertools.product((1.0, -1.0), repeat=2):
        base = (0.0, a, b * GOLDEN)
        for shift in range(3):
            rows.append(np.roll(base, shift))
    V = canonical_lines(np.array(rows))
    reps = np.unique(np.round(V / np.linalg.norm(V, axis=1, keepdims=True), 12),
                     axis=0)
    return ProjectiveCode.from_lines(reps, {
        "kind": "icosahedron",
        "equiangle": math.acos(GOLDEN / (1 + GOLDEN ** 2)),
    })


def circle_code(n: int) -> ProjectiveCode:
    """n equally spaced lines in the plane (angle pi/n)."""
    if n < 2:
        raise ValueError("circle_code needs n >= 2")
    t = np.arange(n) * math.pi / n
    return ProjectiveCode.from_lines(np.stack([np.cos(t), np.sin(t)], axis=1),
                                     {"kind": "circle"})


def bukh_cox_reference(d: int, k: int) -> float:
    """``arccos(2 sqrt(k+1) / d)``: the known asymptotic packing angle for
    d-1+k lines in RP^{d-1} with the o(1) term dropped.

    A reference value for reports, not a certificate.
    """
    arg = 2 * math.sqrt(k + 1) / d
    if arg > 1:
        raise ValueError(f"bukh_cox_reference: 2 sqrt(k+1)/d = {arg:.4g} > 1")
    return math.acos(arg)


# --- search ---------------------------------------------------------------

def _softmin_ascent(X: np.ndarray, opts: SearchOptions) -> np.ndarray:
    n = X.shape[0]
    iu = np.triu_indices(n, 1)
    iters = int(opts.max_iterations)
    betas = opts.schedule(iters)
    step = opts.step
    for t in range(iters):
        G = X @ X.T
        c = np.clip(np.abs(G[iu]), 0.0, 1.0)
        theta = np.arccos(c)
        z = -betas[t] * theta
        w = np.exp(z - z.max())
        w /= w.sum()
        dtheta = -np.sign(G[iu]) / np.sqrt(np.maximum(1.0 - c * c, 1e-12))
        M = np.zeros((n, n))
        M[iu] = w * dtheta
        M += M.T
        grad = M @ X
        grad -= np.sum(grad * X, axis=1, keepdims=True) * X
        X = X + step * grad
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        step *= opts.step_decay
    return X


def _epigraph_polish(X: np.ndarray) -> np.ndarray:
    """Minimize max |<x_i, x_j>| directly (SLSQP on the epigraph form)."""
    n, D = X.shape
    iu, ju = np.triu_indices(n, 1)

    def unpack(z):
        Y = z[:-1].reshape(n, D)
        nr = np.linalg.norm(Y, axis=1)
        return Y, nr, Y / nr[:, None]

    def cons(z):
        _, _, U = unpack(z)
        c = np.sum(U[iu] * U[ju], axis=1)
        return np.concatenate([z[-1] - c, z[-1] + c])

    def cons_jac(z):
        _, nr, U = unpack(z)
        c = np.sum(U[iu] * U[ju], axis=1)
        P = len(iu)
        J = np.zeros((P, n * D + 1))
        gi = (U[ju] - c[:, None] * U[iu]) / nr[iu, None]
        gj = (U[iu] - c[:, None] * U[ju]) / nr[ju, None]
        for k in range(D):
            J[np.arange(P), iu * D + k] = gi[:, k]
            J[np.arange(P), ju * D + k] = gj[:, k]
        top = -J.copy()
        top[:, -1] = 1.0
        bot = J
        bot[:, -1] = 1.0
        return np.vstack([top, bot])

    s0 = float(np.abs(X @ X.T)[iu, ju].max())
    z0 = np.concatenate([X.ravel(), [s0]])
    obj_grad = np.zeros(z0.size)
    obj_grad[-1] = 1.0
    res = minimize(lambda z: z[-1], z0, jac=lambda z: obj_grad, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                   options={"maxiter": 500, "ftol": 1e-15})
    _, _, U = unpack(res.x)
    return U


def search_code(d: int, n: int, opts: SearchOptions | None = None) -> ProjectiveCode:
    """Search for n lines in RP^d with large minimal angle.

    Each restart runs a projected ascent on the soft-min
    ``-(1/beta) log sum exp(-beta theta_ij)`` with beta annealed from
    ``opts.smoothing_start`` to ``opts.smoothing``, then (if ``opts.polish``)
    an SLSQP polish of ``max |<x_i, x_j>|``.  The best restart by certified
    min angle wins; ties go to the lower restart index.
    """
    if d < 1 or n < 2:
        raise ValueError("search_code needs d >= 1 and n >= 2")
    opts = opts or SearchOptions()
    best, best_md, history = None, -1.0, []
    for r in range(opts.restarts):
        X = random_sphere_points(d, n, opts.rng(r))
        X = _softmin_ascent(X, opts)
        md = _min_offdiag(line_angles(X))
        if opts.polish:
            Y = _epigraph_polish(X)
            md_y = _min_offdiag(line_angles(Y))
            if md_y > md:
                X, md = Y, md_y
        history.append(md)
        if md > best_md:
            best, best_md = X, md
    return ProjectiveCode.from_lines(best, {
        "kind": "search", "restart_values": history,
        "best_restart": int(np.argmax(history)),
    })


def best_known_code(d: int, n: int, opts: SearchOptions | None = None) -> ProjectiveCode:
    """Best certified code from the explicit constructions, falling back on search."""
    if n < 2:
        raise ValueError("need at least 2 lines")
    if n <= d + 1:
        return ProjectiveCode.from_lines(np.eye(d + 1)[:n], {"kind": "orthonormal"})
    if d == 1:
        return circle_code(n)
    if d == 2 and n == 6:
        return icosahedron_code()
    if d == 3 and n == 60:
        return cell600_code()
    return search_code(d, n, opts)


def check_dims(code: ProjectiveCode, d: int):
    if code.d != d:
        raise DimensionError(f"code lives in RP^{code.d}, expected RP^{d}")
