import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from oddcodes.codes import cell600_code, circle_code, hypercube_code, orthonormal_code
from oddcodes.geom import DimensionError, circle_point, geodesic_distance
from oddcodes.oddmaps import SMMap, coordinate_map, random_odd_polynomial_map, sm_curve
from oddcodes.thickening import (CoveringError, FiniteMeasure, covering_component,
                                 covering_map, crosspolytope_map, index_bound_map,
                                 linear_extension, sm_sphere_map, support_diameter,
                                 wasserstein1)


def _measure(rng, d, m):
    X = rng.standard_normal((m, d + 1))
    return FiniteMeasure(X / np.linalg.norm(X, axis=1, keepdims=True),
                         rng.dirichlet(np.ones(m)))


def permutation_oracle(X, Y):
    """W1 between uniform measures of equal size: best assignment by brute force."""
    n = len(X)
    cost = [[math.acos(max(-1.0, min(1.0, float(a @ b)))) for b in Y] for a in X]
    return min(sum(cost[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n))) / n


class TestFiniteMeasure:
    def test_merge(self):
        mu = FiniteMeasure([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [0.25, 0.25, 0.5])
        assert len(mu) == 2
        assert sorted(mu.weights) == [0.5, 0.5]

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            FiniteMeasure([[1.0, 0.0]], [0.5])
        with pytest.raises(ValueError):
            FiniteMeasure([[1.0, 0.0], [0.0, 1.0]], [1.5, -0.5])

    def test_support_diameter(self):
        x = np.array([0.0, 0.0, 1.0])
        assert support_diameter(FiniteMeasure.dirac(x)) == 0.0
        assert support_diameter(FiniteMeasure([x, -x])) == pytest.approx(math.pi)
        tri = FiniteMeasure([circle_point(2 * math.pi * j / 3) for j in range(3)])
        assert support_diameter(tri) == pytest.approx(2 * math.pi / 3, abs=1e-12)

    def test_negation(self):
        mu = _measure(np.random.default_rng(0), 2, 4)
        assert np.allclose((-mu).atoms, -mu.atoms)
        assert np.array_equal((-mu).weights, mu.weights)


class TestWasserstein:
    def test_diracs(self):
        x, y = circle_point(0.3), circle_point(1.9)
        cost, plan = wasserstein1(FiniteMeasure.dirac(x), FiniteMeasure.dirac(y))
        assert cost == pytest.approx(geodesic_distance(x, y), abs=1e-12)

    def test_self(self):
        mu = _measure(np.random.default_rng(1), 2, 5)
        assert wasserstein1(mu, mu)[0] == pytest.approx(0.0, abs=1e-9)

    def test_half_split(self):
        a, b = circle_point(0.0), circle_point(1.0)
        cost, plan = wasserstein1(FiniteMeasure([a, b]), FiniteMeasure.dirac(a))
        assert cost == pytest.approx(0.5, abs=1e-12)
        assert plan.feasibility_error(FiniteMeasure([a, b]), FiniteMeasure.dirac(a)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            wasserstein1(FiniteMeasure.dirac([1.0, 0.0]), FiniteMeasure.dirac([1.0, 0.0, 0.0]))

    @given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 10**6))
    def test_assignment_oracle(self, n, d, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, d + 1))
        Y = rng.standard_normal((n, d + 1))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        cost, _ = wasserstein1(FiniteMeasure(X), FiniteMeasure(Y))
        assert cost == pytest.approx(permutation_oracle(X, Y), abs=1e-9)

    @given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 10**6))
    def test_dual_certificate(self, m, k, seed):
        rng = np.random.default_rng(seed)
        mu, nu = _measure(rng, 2, m), _measure(rng, 2, k)
        cost, plan = wasserstein1(mu, nu)
        assert plan.feasibility_error(mu, nu) < 1e-9
        u, v = plan.source_potential, plan.target_potential
        C = np.array([[geodesic_distance(a, b) for b in nu.atoms] for a in mu.atoms])
        assert np.all(u[:, None] + v[None, :] <= C + 1e-9)
        assert u @ mu.weights + v @ nu.weights == pytest.approx(cost, abs=1e-9)

    @settings(max_examples=30)
    @given(st.integers(0, 10**6))
    def test_metric_axioms(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (_measure(rng, 2, int(rng.integers(1, 7))) for _ in range(3))
        ab, ba = wasserstein1(a, b)[0], wasserstein1(b, a)[0]
        assert ab == pytest.approx(ba, abs=1e-9)
        assert ab <= wasserstein1(a, c)[0] + wasserstein1(c, b)[0] + 1e-9
        assert ab > 1e-9

    def test_cap(self):
        big = FiniteMeasure(np.random.default_rng(0).standard_normal((65, 3)))
        with pytest.raises(ValueError):
            wasserstein1(big, big)


class TestLinearExtension:
    def test_dirac(self):
        f = random_odd_polynomial_map(2, 3, 3, seed=4)
        x = np.array([0.6, 0.0, 0.8])
        assert np.allclose(linear_extension(f, FiniteMeasure.dirac(x)), f(x))

    def test_antipodal_pair(self):
        f = random_odd_polynomial_map(2, 3, 5, seed=1)
        x = np.array([0.0, 0.6, 0.8])
        assert np.allclose(linear_extension(f, FiniteMeasure([x, -x])), 0.0, atol=1e-15)

    def test_coordinates(self):
        mu = FiniteMeasure(np.eye(4)[:2])
        assert np.allclose(linear_extension(coordinate_map(3, 4), mu), [0.5, 0.5, 0, 0])
        assert np.allclose(index_bound_map(coordinate_map(3, 4), mu), [0.5, 0.5, 0, 0])


class TestCrosspolytope:
    def test_vertices(self):
        code = hypercube_code(4)
        for j in range(code.size):
            e = np.zeros(code.size)
            e[j] = 1.0
            assert np.allclose(crosspolytope_map(code, e).atoms, [code.lines[j]])
            assert np.allclose(crosspolytope_map(code, -e).atoms, [-code.lines[j]])

    def test_half_half(self):
        code = orthonormal_code(2)
        mu = crosspolytope_map(code, [0.5, 0.5, 0.0])
        assert len(mu) == 2 and np.allclose(mu.weights, 0.5)
        assert mu.support_diameter <= math.pi - code.min_distance + 1e-12

    def test_not_on_l1_sphere(self):
        with pytest.raises(ValueError):
            crosspolytope_map(orthonormal_code(2), [0.5, 0.2])

    @pytest.mark.parametrize("code", [hypercube_code(5), cell600_code(), circle_code(5)],
                             ids=["cube5", "600cell", "circle5"])
    def test_diameter_bound_and_oddness(self, code):
        rng = np.random.default_rng(7)
        for _ in range(40):
            u = rng.standard_normal(code.size) * (rng.random(code.size) < 0.3)
            if not u.any():
                continue
            u /= np.abs(u).sum()
            mu = crosspolytope_map(code, u)
            assert mu.support_diameter <= math.pi - code.min_distance + 1e-9
            neg = crosspolytope_map(code, -u)
            assert np.allclose(neg.atoms, -mu.atoms) and np.allclose(neg.weights, mu.weights)

    def test_continuity_along_path(self):
        code = hypercube_code(4)
        rng = np.random.default_rng(2)
        u0, u1 = rng.standard_normal(code.size), rng.standard_normal(code.size)
        u0, u1 = u0 / np.abs(u0).sum(), u1 / np.abs(u1).sum()
        prev = None
        for s in np.linspace(0, 1, 400):
            u = (1 - s) * u0 + s * u1
            u /= np.abs(u).sum()
            if prev is not None:
                # a coordinate keeps its sign (and atom) unless it passes through zero
                moved = np.sign(u) != np.sign(prev)
                assert np.all(np.abs(u[moved]) + np.abs(prev[moved]) < 0.05)
                assert np.abs(u - prev).sum() < 0.05
            prev = u


def covering_oracle(mu, c_angle, delta, grid=8000):
    """Inner infimum over measures on a fine S^1 grid avoiding the open ball."""
    ts = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    G = np.stack([np.cos(ts), np.sin(ts)], axis=1)
    c = circle_point(c_angle)
    G = G[np.arccos(np.clip(G @ c, -1, 1)) >= delta]
    C = np.arccos(np.clip(mu.atoms @ G.T, -1, 1))
    m, k = C.shape
    A = np.zeros((m, m * k))
    for i in range(m):
        A[i, i * k:(i + 1) * k] = 1.0
    res = linprog(C.ravel(), A_eq=A, b_eq=mu.weights, bounds=(0, None), method="highs")
    return res.fun


class TestCovering:
    def test_dirac_values(self):
        c = circle_point(0.4)
        delta = 0.7
        assert covering_component(FiniteMeasure.dirac(c), c, delta) == pytest.approx(delta)
        assert covering_component(FiniteMeasure.dirac(circle_point(1.1)), c, delta) == 0.0
        assert covering_component(FiniteMeasure.dirac(-c), c, delta) == pytest.approx(-delta)

    def test_both_balls(self):
        c = circle_point(0.0)
        with pytest.raises(CoveringError):
            covering_component(FiniteMeasure([c, -c]), c, 0.3)

    @given(st.integers(0, 10**6))
    def test_brute_force_inner_min(self, seed):
        rng = np.random.default_rng(seed)
        delta = float(rng.uniform(0.2, 1.2))
        ca = float(rng.uniform(0, 2 * np.pi))
        # support inside the arc [c - delta, c + pi - delta), which misses B(-c)
        ts = ca - delta + rng.uniform(1e-6, np.pi - 1e-6, size=int(rng.integers(1, 4)))
        mu = FiniteMeasure(np.stack([np.cos(ts), np.sin(ts)], 1), rng.dirichlet(np.ones(len(ts))))
        val = covering_component(mu, circle_point(ca), delta)
        assert val >= 0
        assert val == pytest.approx(covering_oracle(mu, ca, delta), abs=1e-3)

    def test_example_rp1(self):
        centers = [circle_point(t) for t in (0, np.pi / 3, 2 * np.pi / 3)]
        delta = np.pi / 6 + 0.01
        f = covering_map(FiniteMeasure.dirac(centers[0]), centers, delta)
        assert f[0] > 0
        assert np.allclose(f, [1, 0, 0])

    def test_oddness(self):
        centers = [circle_point(t) for t in (0, np.pi / 3, 2 * np.pi / 3)]
        delta = np.pi / 6 + 0.01
        rng = np.random.default_rng(3)
        for _ in range(30):
            t0 = rng.uniform(0, 2 * np.pi)
            ts = t0 + rng.uniform(0, np.pi - 2 * delta, size=3)
            mu = FiniteMeasure(np.stack([np.cos(ts), np.sin(ts)], 1), rng.dirichlet(np.ones(3)))
            f = covering_map(mu, centers, delta)
            assert np.allclose(covering_map(-mu, centers, delta), -f, atol=1e-12)
            assert np.linalg.norm(f) == pytest.approx(1.0)

    def test_diameter_precondition(self):
        centers = [circle_point(0.0)]
        mu = FiniteMeasure([circle_point(0.0), circle_point(2.0)])
        with pytest.raises(ValueError):
            covering_map(mu, centers, 0.6)


class TestIndexMap:
    def test_dirac_coordinates(self):
        x = np.array([0.0, 0.6, 0.8])
        assert np.allclose(index_bound_map(coordinate_map(2, 3), FiniteMeasure.dirac(x)), x)

    def test_scalar_basis(self):
        basis = [lambda X: X[:, 0], lambda X: X[:, 1] ** 3]
        x = np.array([0.6, 0.8])
        out = index_bound_map(basis, FiniteMeasure([x, -x]))
        assert np.allclose(out, 0.0)

    @given(st.integers(0, 10**6))
    def test_commutes_with_antipode(self, seed):
        rng = np.random.default_rng(seed)
        f = random_odd_polynomial_map(2, 4, 3, seed=seed)
        mu = _measure(rng, 2, 4)
        assert np.allclose(index_bound_map(f, -mu), -index_bound_map(f, mu), atol=1e-12)

    def test_positive_combination(self):
        f = random_odd_polynomial_map(2, 4, 3, seed=11)
        rng = np.random.default_rng(0)
        z = rng.standard_normal(4)
        X = rng.standard_normal((400, 3))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        pos = X[f(X) @ z > 0][:5]
        mu = FiniteMeasure(pos, rng.dirichlet(np.ones(len(pos))))
        assert z @ index_bound_map(f, mu) > 0


class TestSMSphereMap:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_dirac(self, k):
        t = 0.77
        out = sm_sphere_map(k, FiniteMeasure.dirac(circle_point(t)))
        assert np.allclose(out, sm_curve(k, t) / math.sqrt(k))

    def test_antipodal_pair_errors(self):
        with pytest.raises(ValueError):
            sm_sphere_map(2, FiniteMeasure([circle_point(0.3), circle_point(0.3 + np.pi)]))

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_defined_below_threshold(self, k):
        rng = np.random.default_rng(k)
        lim = 2 * np.pi * k / (2 * k + 1)
        for _ in range(200):
            ts = rng.uniform(0, 0.999 * lim, size=int(rng.integers(1, 2 * k + 3)))
            mu = FiniteMeasure(np.stack([np.cos(ts), np.sin(ts)], 1),
                               rng.dirichlet(np.ones(len(ts))))
            assert np.linalg.norm(sm_sphere_map(k, mu)) == pytest.approx(1.0)

    def test_dimension(self):
        with pytest.raises(DimensionError):
            sm_sphere_map(1, FiniteMeasure.dirac([0.0, 0.0, 1.0]))
        assert SMMap(1).n == 2
