"""Evaluable maps S^d -> R^n, with structural oddness where it applies.

All maps take an ``(N, d+1)`` array of points (or a single point) and return
``(N, n)`` (or ``(n,)``).  Polynomial maps are stored as exponent vectors and
coefficients so they serialize and evaluate deterministically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geom import DimensionError, circle_angle, random_sphere_points


class MapBase:
    """Common evaluation plumbing: shape handling and dimension checks."""

    d: int
    n: int
    odd: bool = False

    def _eval(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.d + 1:
            raise DimensionError(
                f"map is defined on S^{self.d}, got points in R^{X2.shape[1]}")
        out = self._eval(X2)
        return out[0] if single else out


def sm_curve(k: int, t) -> np.ndarray:
    """Symmetric trigonometric moment curve
    (cos t, sin t, cos 3t, sin 3t, ..., cos (2k-1)t, sin (2k-1)t)."""
    if k < 1:
        raise ValueError("sm_curve needs k >= 1")
    t = np.asarray(t, dtype=float)
    freqs = 2 * np.arange(k) + 1
    ang = t[..., None] * freqs
    out = np.empty(t.shape + (2 * k,))
    out[..., 0::2] = np.cos(ang)
    out[..., 1::2] = np.sin(ang)
    return out


class SMMap(MapBase):
    """SM_{2k} as a map S^1 -> R^{2k}, reading the angle off (cos t, sin t)."""

    odd = True

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("SMMap needs k >= 1")
        self.k = int(k)
        self.d = 1
        self.n = 2 * self.k

    def _eval(self, X):
        return sm_curve(self.k, circle_angle(X))

    def to_dict(self) -> dict:
        return {"builtin": "sm", "k": self.k}

    def __repr__(self):
        return f"SMMap(k={self.k})"


class PolynomialMap(MapBase):
    """Map with polynomial coordinates in the d+1 ambient variables.

    ``components`` is a list (one per output coordinate) of lists of
    ``(exps, coef)`` pairs.
    """

    def __init__(self, d: int, components):
        if d < 1:
            raise ValueError("domain dimension must be >= 1")
        if len(components) < 1:
            raise ValueError("a map needs at least one component")
        self.d = int(d)
        self.n = len(components)
        self.components = []
        for comp in components:
            terms = []
            for exps, coef in comp:
                e = tuple(int(v) for v in exps)
                if len(e) != self.d + 1 or min(e, default=0) < 0:
                    raise ValueError(f"bad exponent vector {e} for S^{self.d}")
                terms.append((e, float(coef)))
            self.components.append(terms)
        keys = sorted({e for comp in self.components for e, _ in comp})
        index = {e: i for i, e in enumerate(keys)}
        self._exps = np.array(keys, dtype=int).reshape(-1, self.d + 1)
        self._coefs = np.zeros((len(keys), self.n))
        for j, comp in enumerate(self.components):
            for e, c in comp:
                self._coefs[index[e], j] += c

    @property
    def degrees(self) -> set[int]:
        return {sum(e) for comp in self.components for e, _ in comp}

    @property
    def odd(self) -> bool:
        return all(deg % 2 == 1 for deg in self.degrees)

    def _eval(self, X):
        if self._exps.shape[0] == 0:
            return np.zeros((X.shape[0], self.n))
        mon = np.prod(X[:, None, :] ** self._exps[None, :, :], axis=2)
        return mon @ self._coefs

    def to_dict(self) -> dict:
        return {
            "d": self.d, "n": self.n,
            "components": [{"monomials": [{"exps": list(e), "coef": c}
                                          for e, c in comp]}
                           for comp in self.components],
        }

    def __repr__(self):
        terms = sum(len(c) for c in self.components)
        return f"{type(self).__name__}(d={self.d}, n={self.n}, terms={terms})"


class OddMapSpace(PolynomialMap):
    """A space of odd maps S^d -> R, given by n polynomial basis maps.

    Only odd-total-degree monomials are admitted, so every component is odd
    by construction.
    """

    def __init__(self, d: int, components):
        super().__init__(d, components)
        bad = sorted(deg for deg in self.degrees if deg % 2 == 0)
        if bad:
            raise ValueError(f"even-degree monomials are not odd: degrees {bad}")

    odd = True


class FunctionMap(MapBase):
    """Wrap a vectorized callable ``(N, d+1) -> (N, n)``."""

    def __init__(self, d: int, n: int, func, odd: bool = False, name: str = ""):
        self.d, self.n, self.func, self.odd = int(d), int(n), func, bool(odd)
        self.name = name

    def _eval(self, X):
        return np.asarray(self.func(X), dtype=float).reshape(X.shape[0], self.n)

    def __repr__(self):
        return f"FunctionMap({self.name or self.func!r}, d={self.d}, n={self.n})"


class AntipodalDifference(MapBase):
    """``g(x) = f(x) - f(-x)``, the odd map attached to an arbitrary f."""

    odd = True

    def __init__(self, f: MapBase):
        self.f, self.d, self.n = f, f.d, f.n

    def _eval(self, X):
        return self.f(X) - self.f(-X)


def monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def coordinate_map(d: int, n: int) -> OddMapSpace:
    """The first n coordinate functions on S^d."""
    if not 1 <= n <= d + 1:
        raise ValueError(f"coordinate_map needs 1 <= n <= d+1, got n={n}, d={d}")
    comps = []
    for i in range(n):
        e = [0] * (d + 1)
        e[i] = 1
        comps.append([(e, 1.0)])
    return OddMapSpace(d, comps)


def _random_poly_components(d, n, degrees, rng):
    comps = []
    for _ in range(n):
        terms = []
        for deg in degrees:
            mons = monomials(d + 1, deg)
            coefs = rng.standard_normal(len(mons)) / np.sqrt(len(mons))
            terms.extend(zip(mons, coefs))
        comps.append(terms)
    return comps


def random_odd_polynomial_map(d: int, n: int, max_degree: int, seed) -> OddMapSpace:
    """n random combinations of the odd-degree monomials of degree <= max_degree."""
    if max_degree < 1 or max_degree % 2 == 0:
        raise ValueError("max_degree must be odd and >= 1")
    rng = np.random.default_rng(seed)
    degrees = range(1, max_degree + 1, 2)
    return OddMapSpace(d, _random_poly_components(d, n, degrees, rng))


def random_polynomial_map(d: int, n: int, max_degree: int, seed) -> PolynomialMap:
    """Like :func:`random_odd_polynomial_map` but with all degrees 0..max_degree."""
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    rng = np.random.default_rng(seed)
    return PolynomialMap(d, _random_poly_components(d, n, range(max_degree + 1), rng))


@dataclass(frozen=True)
class OddnessReport:
    passed: bool
    worst: float
    samples: int

    def __bool__(self):
        return self.passed


def verify_odd(f, sample_count: int = 1000, seed: int = 0, tol: float = 1e-9,
               d: int | None = None) -> OddnessReport:
    """Sample ``max |f(-x) + f(x)|`` over random points of the sphere."""
    d = getattr(f, "d", d)
    if d is None:
        raise ValueError("verify_odd needs the domain dimension for a bare callable")
    X = random_sphere_points(d, int(sample_count), np.random.default_rng(seed))
    viol = np.atleast_2d(np.asarray(f(X)) + np.asarray(f(-X)))
    worst = float(np.max(np.linalg.norm(viol.reshape(X.shape[0], -1), axis=1)))
    return OddnessReport(worst <= tol, worst, int(sample_count))


def map_from_dict(data: dict) -> MapBase:
    if data.get("builtin") == "sm":
        return SMMap(int(data["k"]))
    if "builtin" in data:
        raise ValueError(f"unknown builtin map {data['builtin']!r}")
    comps = [[(m["exps"], m["coef"]) for m in comp["monomials"]]
             for comp in data["components"]]
    if int(data["n"]) != len(comps):
        raise ValueError("'n' does not match the number of components")
    cls = OddMapSpace if all(sum(m["exps"]) % 2 for comp in data["components"]
                             for m in comp["monomials"]) else PolynomialMap
    return cls(int(data["d"]), comps)
