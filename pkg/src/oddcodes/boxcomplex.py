"""Graphs, box complexes and circular colorings on RP^1.

Signed vertices: +v and -v for v in 1..n.  A face of B_0(G) is P u -N with
every (p, q) in P x N an edge; it is stored through its maximal faces.
Circular colorings place vertices on RP^1, the circle of circumference pi,
with adjacent vertices at distance >= pi / r.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog, minimize

from .options import SearchOptions

MAX_BOX_VERTICES = 16
COLORING_TOL = 1e-9


class Graph:
    """Simple graph on vertices 1..n."""

    def __init__(self, n: int, edges=()):
        if n < 0:
            raise ValueError("vertex count must be >= 0")
        self.n = int(n)
        E = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u}, {v}) out of range 1..{n}")
            E.add((min(u, v), max(u, v)))
        self.edges = frozenset(E)
        self._nbr = [0] * (self.n + 1)
        for u, v in self.edges:
            self._nbr[u] |= 1 << (v - 1)
            self._nbr[v] |= 1 << (u - 1)

    def neighbors(self, v: int) -> set[int]:
        return {w for w in range(1, self.n + 1) if self._nbr[v] >> (w - 1) & 1}

    def degree(self, v: int) -> int:
        return bin(self._nbr[v]).count("1")

    def __eq__(self, other):
        return isinstance(other, Graph) and (self.n, self.edges) == (other.n, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={len(self.edges)})"

    @classmethod
    def from_edge_list(cls, text: str, n: int | None = None) -> Graph:
        """Parse "u v" lines (1-indexed); blank lines and # comments ignored."""
        edges = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"bad edge line {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
        top = max((max(e) for e in edges), default=0)
        return cls(top if n is None else n, edges)

    def to_edge_list(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in sorted(self.edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(1, n + 1), 2))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycles need n >= 3")
    return Graph(n, [(i, i % n + 1) for i in range(1, n + 1)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def random_graph(n: int, p: float, seed) -> Graph:
    rng = np.random.default_rng(seed)
    return Graph(n, [e for e in itertools.combinations(range(1, n + 1), 2)
                     if rng.random() < p])


def cone_graph(G: Graph) -> Graph:
    """Add an apex n+1 adjacent to every vertex."""
    a = G.n + 1
    return Graph(a, list(G.edges) + [(v, a) for v in range(1, a)])


# --- signed complexes -----------------------------------------------------

def _maximal(faces) -> frozenset:
    faces = sorted({frozenset(f) for f in faces}, key=len, reverse=True)
    keep = []
    for f in faces:
        if not any(f <= g for g in keep):
            keep.append(f)
    return frozenset(keep)


class SignedComplex:
    """Simplicial complex on the signed vertices +-1..+-n, kept as its maximal faces."""

    def __init__(self, n: int, faces):
        self.n = int(n)
        for f in faces:
            for v in f:
                if v == 0 or abs(v) > self.n:
                    raise ValueError(f"vertex {v} outside +-1..+-{self.n}")
        self.maximal_faces = _maximal(faces)

    def contains(self, face) -> bool:
        s = frozenset(face)
        return any(s <= f for f in self.maximal_faces)

    def is_symmetric(self) -> bool:
        return all(frozenset(-v for v in f) in self.maximal_faces
                   for f in self.maximal_faces)

    def dimension(self) -> int:
        return max((len(f) for f in self.maximal_faces), default=0) - 1

    def faces(self, size: int | None = None) -> set[frozenset]:
        """All nonempty faces (optionally of one size); exponential, for small complexes."""
        out = set()
        for f in self.maximal_faces:
            sizes = range(1, len(f) + 1) if size is None else [size]
            for k in sizes:
                out.update(frozenset(c) for c in itertools.combinations(sorted(f), k))
        return out

    def to_json(self) -> list[list[int]]:
        return sorted(sorted(f) for f in self.maximal_faces)

    def __eq__(self, other):
        return complexes_equal(self, other)

    def __hash__(self):
        return hash((self.n, self.maximal_faces))

    def __repr__(self):
        return f"SignedComplex(n={self.n}, maximal_faces={len(self.maximal_faces)})"


def _bits(mask: int, n: int) -> list[int]:
    return [v for v in range(1, n + 1) if mask >> (v - 1) & 1]


def box_complex(G: Graph) -> SignedComplex:
    """Maximal faces of B_0(G).

    Besides V and -V, a maximal face P u -N has N nonempty with P the common
    neighborhood of N and N the common neighborhood of P.
    """
    n = G.n
    if n > MAX_BOX_VERTICES:
        raise ValueError(f"box_complex is limited to {MAX_BOX_VERTICES} vertices")
    full = (1 << n) - 1
    nbr = G._nbr

    def common(mask):
        out = full
        for v in _bits(mask, n):
            out &= nbr[v]
        return out

    faces = []
    if n:
        faces = [frozenset(range(1, n + 1)), frozenset(-v for v in range(1, n + 1))]
    for N in range(1, full + 1):
        P = common(N)
        if P and common(P) == N:
            faces.append(frozenset(_bits(P, n)) | frozenset(-v for v in _bits(N, n)))
    return SignedComplex(n, faces)


def suspension(K: SignedComplex) -> SignedComplex:
    """Join with the poles +-(n+1)."""
    a = K.n + 1
    faces = [f | {s * a} for f in K.maximal_faces for s in (1, -1)]
    if not faces:
        faces = [frozenset({a}), frozenset({-a})]
    return SignedComplex(a, faces)


def complexes_equal(K1: SignedComplex, K2: SignedComplex) -> bool:
    if K1.n != K2.n:
        raise ValueError(f"vertex universes differ: +-{K1.n} vs +-{K2.n}")
    return K1.maximal_faces == K2.maximal_faces


def enumerate_box_faces(G: Graph) -> set[frozenset]:
    """All faces of B_0(G) straight from the definition; for tests on tiny graphs."""
    n = G.n
    out = set()
    signed = list(range(1, n + 1)) + [-v for v in range(1, n + 1)]
    for k in range(1, 2 * n + 1):
        for s in itertools.combinations(signed, k):
            pos = [v for v in s if v > 0]
            neg = [-v for v in s if v < 0]
            if all((min(p, q), max(p, q)) in G.edges for p in pos for q in neg):
                out.add(frozenset(s))
    return out


# --- circular colorings ---------------------------------------------------

class ColoringError(ValueError):
    """A coloring fails its claimed rate."""


def rp1_distance(a, b):
    t = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), math.pi)
    return np.minimum(t, math.pi - t)


@dataclass
class CircularColoring:
    """Positions in [0, pi) per vertex (index v-1) of ``graph``.

    ``quality`` is the least RP^1 distance over edges; ``rate`` is pi/quality
    unless given (an edgeless graph has rate 1).
    """

    graph: Graph
    positions: np.ndarray
    rate: float | None = None

    def __post_init__(self):
        p = np.mod(np.asarray(self.positions, dtype=float).reshape(-1), math.pi)
        if p.size != self.graph.n:
            raise ValueError("one position per vertex is required")
        self.positions = p
        if self.rate is None:
            q = self.quality
            self.rate = 1.0 if q == math.inf else (math.inf if q == 0 else math.pi / q)

    @property
    def quality(self) -> float:
        if not self.graph.edges:
            return math.inf
        E = np.array(sorted(self.graph.edges)) - 1
        return float(np.min(rp1_distance(self.positions[E[:, 0]], self.positions[E[:, 1]])))

    def is_valid(self, rate: float | None = None, tol: float = COLORING_TOL) -> bool:
        r = self.rate if rate is None else rate
        return self.quality >= math.pi / r - tol

    def validate(self, rate: float | None = None, tol: float = COLORING_TOL):
        if not self.is_valid(rate, tol):
            r = self.rate if rate is None else rate
            raise ColoringError(
                f"least edge distance {self.quality:.12g} is below pi/r = "
                f"{math.pi / r:.12g} for r = {r:.12g}")
        return self


def _edge_array(G):
    return np.array(sorted(G.edges), dtype=int).reshape(-1, 2) - 1


def _lp_polish(G, x):
    """Best positions with the same branch structure as x (exact LP).

    For each edge the signed wrapped difference s_e (x_u - x_v + k_e pi) is
    kept between t and pi - t; maximize t.
    """
    E = _edge_array(G)
    n = G.n
    diff = x[E[:, 0]] - x[E[:, 1]]
    k = -np.round(diff / math.pi)
    w = diff + k * math.pi          # in [-pi/2, pi/2]
    s = np.where(w >= 0, 1.0, -1.0)
    m = E.shape[0]
    # variables: x_1..x_n, t ; maximize t
    A, b = [], []
    for e in range(m):
        u, v = E[e]
        row = np.zeros(n + 1)
        row[u], row[v], row[n] = -s[e], s[e], 1.0      # t - s(xu - xv) <= s k pi
        A.append(row)
        b.append(s[e] * k[e] * math.pi)
        row = np.zeros(n + 1)
        row[u], row[v], row[n] = s[e], -s[e], 1.0      # s(xu - xv) + t <= pi - s k pi
        A.append(row)
        b.append(math.pi - s[e] * k[e] * math.pi)
    c = np.zeros(n + 1)
    c[n] = -1.0
    bounds = [(None, None)] * n + [(0, math.pi / 2)]
    bounds[0] = (x[0], x[0])
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), bounds=bounds, method="highs")
    if res.status != 0:
        return x
    return np.mod(res.x[:n], math.pi)


def _softmin_ascent(G, x, rng, betas=(5.0, 20.0, 80.0, 320.0)):
    E = _edge_array(G)

    def neg_softmin(z, beta):
        diff = z[E[:, 0]] - z[E[:, 1]]
        t = np.mod(diff, math.pi)
        d = np.minimum(t, math.pi - t)
        sign = np.where(t <= math.pi - t, 1.0, -1.0)
        a = -beta * d
        amax = a.max()
        ex = np.exp(a - amax)
        val = -(amax + np.log(ex.sum())) / beta
        p = ex / ex.sum()
        g = np.zeros_like(z)
        np.add.at(g, E[:, 0], p * sign)
        np.add.at(g, E[:, 1], -p * sign)
        return -val, -g

    for beta in betas:
        x = minimize(neg_softmin, x, args=(beta,), jac=True, method="L-BFGS-B",
                     options={"maxiter": 200}).x
    return np.mod(x, math.pi)


def _greedy_positions(G: Graph) -> np.ndarray:
    """Largest-degree-first greedy proper coloring, k colors at spacing pi/k."""
    color = {}
    for v in sorted(range(1, G.n + 1), key=lambda v: -G.degree(v)):
        used = {color[w] for w in G.neighbors(v) if w in color}
        color[v] = next(c for c in range(G.n) if c not in used)
    k = max(color.values()) + 1
    return np.array([color[v] * math.pi / k for v in range(1, G.n + 1)])


def circular_chromatic_estimate(G: Graph, opts: SearchOptions | None = None) -> CircularColoring:
    """Best coloring found over restarts of soft-min ascent followed by an LP
    polish; the result always witnesses chi_c(G) <= rate.

    Restart 0 starts from a greedy proper coloring, so the rate never exceeds
    the greedy color count.
    """
    if G.n < 1:
        raise ValueError("graph has no vertices")
    if not G.edges:
        return CircularColoring(G, np.zeros(G.n), 1.0)
    opts = opts or SearchOptions()
    best = None
    for r in range(opts.restarts):
        rng = opts.rng(r)
        x = _greedy_positions(G) if r == 0 else rng.uniform(0, math.pi, G.n)
        x = _softmin_ascent(G, x, rng)
        for _ in range(3):
            x = _lp_polish(G, x)
        col = CircularColoring(G, x)
        if best is None or col.quality > best.quality + 1e-13:
            best = col
    return best


def extend_coloring_to_cone(f: CircularColoring, rate: float | None = None) -> CircularColoring:
    """Color CG from a coloring of G at rate r by scaling positions by r/(r+1)
    and placing the apex at r pi/(r+1).

    The positions are first rotated so that the vertex following the largest
    empty arc sits at 0.  The result is checked at rate r+1; the scaling is
    valid exactly when that empty arc has length >= pi/r, and a ColoringError
    is raised otherwise.
    """
    r = f.rate if rate is None else float(rate)
    f.validate(r)
    G = f.graph
    p = np.sort(f.positions)
    gaps = np.diff(np.concatenate([p, [p[0] + math.pi]]))
    start = p[(int(np.argmax(gaps)) + 1) % p.size]
    x = np.mod(f.positions - start, math.pi)
    x[np.abs(x - math.pi) < 1e-15] = 0.0
    scale = r / (r + 1)
    g = CircularColoring(cone_graph(G), np.append(scale * x, scale * math.pi), r + 1)
    try:
        return g.validate()
    except ColoringError as err:
        raise ColoringError(
            f"cone extension fails at rate {r + 1:.12g}: largest empty arc "
            f"{gaps.max():.12g} is shorter than pi/r = {math.pi / r:.12g} ({err})"
        ) from None


def pq_colorable(G: Graph, p: int, q: int) -> bool:
    """Exact (p, q)-coloring test by backtracking: c(v) in Z_p with
    q <= |c(u) - c(v)| <= p - q on edges."""
    if p < 2 * q:
        return G.n == 0 or not G.edges and p >= q
    order = sorted(range(1, G.n + 1), key=lambda v: -G.degree(v))
    color = {}

    def ok(v, c):
        for w in G.neighbors(v):
            if w in color:
                d = abs(c - color[w])
                if d < q or d > p - q:
                    return False
        return True

    def place(i):
        if i == len(order):
            return True
        v = order[i]
        choices = [0] if i == 0 else range(p)
        for c in choices:
            if ok(v, c):
                color[v] = c
                if place(i + 1):
                    return True
                del color[v]
        return False

    return place(0)


def circular_chromatic_exact(G: Graph, max_p: int = 12) -> Fraction:
    """Least p/q with a (p, q)-coloring, over p <= max_p."""
    best = None
    for p in range(1, max_p + 1):
        for q in range(1, p + 1):
            if math.gcd(p, q) != 1 or (best is not None and Fraction(p, q) >= best):
                continue
            if pq_colorable(G, p, q):
                best = Fraction(p, q)
    if best is None:
        raise ValueError(f"no (p, q)-coloring with p <= {max_p}")
    return best


def simonyi_tardos_bound(coindex: int, is_cone: bool = False) -> Fraction:
    """Lower bound on chi_c(G) from an odd map S^l -> B_0(G).

    General graphs: 2k from S^{2k-1}, so l+1 for odd l and l for even l.
    Cone graphs additionally get 2k+1 from S^{2k}, i.e. l+1 for every l.
    """
    ell = int(coindex)
    if ell < 0:
        raise ValueError("coindex bound must be >= 0")
    if ell % 2 == 1 or is_cone:
        return Fraction(ell + 1)
    return Fraction(ell)
