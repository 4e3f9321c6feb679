import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oddcodes.caratheodory import find_zero_capture
from oddcodes.masspartition import (LogPartition, Mass, bisection_residual, disk_mass,
                                    halfspace_mass, halving_directions, random_cloud,
                                    random_disk_mass, residual_map, solve_ham_sandwich,
                                    solve_log_bundle, verify_partition)
from oddcodes.options import SearchOptions


def _unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def sweep_oracle(m):
    """Best bisection residual over all lines through the origin in R^2.

    The residual only changes when the line passes an atom, so it suffices to
    test lines through each atom and lines midway between consecutive atom angles.
    """
    ang = np.sort(np.mod(np.arctan2(m.points[:, 1], m.points[:, 0]), np.pi))
    cands = list(ang) + list((ang + np.roll(ang, -1) + np.r_[np.zeros(len(ang) - 1), np.pi]) / 2)
    best = math.inf
    for a in cands:
        p = np.array([-math.sin(a), math.cos(a)])
        s = m.points @ p
        r = m.weights @ np.where(np.abs(s) <= 1e-12 * np.linalg.norm(m.points, axis=1), 0, np.sign(s))
        best = min(best, abs(r))
    return best


class TestHalfspace:
    def test_symmetric(self):
        rng = np.random.default_rng(0)
        P = rng.standard_normal((10, 3))
        m = Mass(np.vstack([P, -P]), np.tile(rng.uniform(0.5, 2, 10), 2))
        for _ in range(10):
            p = _unit(rng, 3)
            assert halfspace_mass(m, p) == pytest.approx(m.total / 2, abs=1e-12)
            assert bisection_residual(m, p) == pytest.approx(0.0, abs=1e-12)

    def test_strict_side(self):
        m = Mass([[1.0, 0.2], [2.0, -0.5]], [1.0, 3.0])
        assert halfspace_mass(m, [1.0, 0.0]) == 4.0
        assert bisection_residual(m, [1.0, 0.0]) == 4.0

    def test_three_atoms(self):
        m = Mass([[1.0, 0, 0], [0, 1.0, 0], [-1.0, 0, 0]], [1.0, 2.0, 4.0])
        assert halfspace_mass(m, [1.0, 0, 0]) == pytest.approx(1.0 + 0.5 * 2.0)
        assert halfspace_mass(m, [0, 1.0, 0]) == pytest.approx(2.0 + 0.5 * 5.0)

    @given(st.integers(0, 10**6))
    def test_exact_oddness_with_boundary_atoms(self, seed):
        rng = np.random.default_rng(seed)
        p = _unit(rng, 3)
        Q = rng.standard_normal((6, 3))
        Q -= np.outer(Q @ p, p)  # on the hyperplane
        m = Mass(np.vstack([Q, rng.standard_normal((5, 3))]), rng.uniform(0.1, 1, 11))
        assert bisection_residual(m, -p) == -bisection_residual(m, p)
        assert halfspace_mass(m, p) + halfspace_mass(m, -p) == pytest.approx(m.total, abs=1e-12)

    def test_non_unit(self):
        with pytest.raises(ValueError):
            halfspace_mass(Mass([[1.0, 0.0]]), [2.0, 0.0])
        with pytest.raises(ValueError):
            bisection_residual(Mass([[1.0, 0.0]]), [1.0, 0.0, 0.0])

    def test_mass_validation(self):
        with pytest.raises(ValueError):
            Mass([[1.0, 0.0]], [0.0])
        with pytest.raises(ValueError):
            Mass([[0.5, 0.5]], disk=True)
        with pytest.raises(ValueError):
            disk_mass([[1.0, 1.0]])

    def test_residual_map_odd(self):
        masses = [random_cloud(3, 20, s) for s in range(2)]
        f = residual_map(masses)
        X = np.random.default_rng(0).standard_normal((50, 3))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        assert np.array_equal(f(-X), -f(X))


class TestHamSandwich:
    def test_symmetric(self):
        rng = np.random.default_rng(1)
        P = rng.standard_normal((15, 3))
        masses = [Mass(np.vstack([P, -P])), Mass(np.vstack([2 * P[:7], -2 * P[:7]]))]
        out = solve_ham_sandwich(masses, SearchOptions(seed=0))
        assert out.success and np.allclose(out.residuals, 0.0)

    def test_two_clouds(self):
        masses = [random_cloud(3, 100, 1, 0.5), random_cloud(3, 100, 2, 0.5)]
        out = solve_ham_sandwich(masses, SearchOptions(seed=0))
        assert out.success
        exact = [bisection_residual(m, out.direction) for m in masses]
        assert np.allclose(exact, out.residuals)
        assert max(abs(v) for v in exact) <= 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_circle_sweep_oracle(self, seed):
        rng = np.random.default_rng(seed)
        m = Mass(rng.standard_normal((25, 2)) + rng.uniform(-1, 1, 2), rng.uniform(0.2, 1.0, 25))
        out = solve_ham_sandwich([m], SearchOptions(seed=seed))
        assert out.success
        assert abs(bisection_residual(m, out.direction)) <= m.max_weight
        assert sweep_oracle(m) <= m.max_weight

    def test_too_many_masses(self):
        with pytest.raises(ValueError):
            solve_ham_sandwich([random_cloud(2, 5, s) for s in range(2)])


class TestHalving:
    def test_symmetric_singleton(self):
        P = np.random.default_rng(2).standard_normal((8, 2))
        masses = [Mass(np.vstack([P, -P])) for _ in range(3)]
        out = halving_directions(masses, 0.5, SearchOptions(seed=0))
        assert out.success and len(out.directions) == 1
        assert out.negative_witness == out.positive_witness

    def test_three_on_circle(self):
        masses = [random_cloud(2, 30, s, 0.6) for s in range(3)]
        delta = 3 * math.pi / 4
        out = halving_directions(masses, delta, SearchOptions(seed=0))
        assert out.success
        A = out.directions
        G = np.clip(A @ A.T, -1, 1)
        assert np.arccos(G).max() <= delta + 1e-3
        for i, m in enumerate(masses):
            assert bisection_residual(m, A[out.negative_witness[i]]) <= out.tol
            assert bisection_residual(m, A[out.positive_witness[i]]) >= -out.tol

    def test_n_equals_d_reduces_to_ham_sandwich(self):
        masses = [random_cloud(3, 40, s, 0.7) for s in (4, 5)]
        out = halving_directions(masses, 0.0, SearchOptions(seed=0))
        assert out.success and len(out.directions) == 1
        assert np.all(np.abs(out.residuals[0]) <= out.tol)


class TestLogBundle:
    def test_single_symmetric(self):
        P = np.random.default_rng(3).uniform(-0.5, 0.5, (10, 2))
        m = disk_mass(np.vstack([P, -P]))
        part = solve_log_bundle([m], 0.0, SearchOptions(seed=0))
        assert part.success and part.k <= 1
        assert np.allclose(part.residuals, 0.0)

    def test_three_disk_masses(self):
        masses = [random_disk_mass(1, 40, s) for s in range(3)]
        delta = 3 * math.pi / 4
        part = solve_log_bundle(masses, delta, SearchOptions(seed=0))
        assert part.success and part.k <= 3
        res = verify_partition(masses, part)
        assert np.allclose(res, part.residuals, atol=1e-9)
        assert np.all(np.abs(res) <= 0.01 * np.array([m.total for m in masses]))
        assert np.all(np.abs(part.directions[:, -1]) <= 1e-12)
        assert np.all(np.diff(part.times) >= 0)
        assert part.max_angle() <= delta + 1e-6

    def test_corrupted_direction_detected(self):
        masses = [random_disk_mass(1, 40, s) for s in range(3)]
        part = solve_log_bundle(masses, 3 * math.pi / 4, SearchOptions(seed=0))
        bad = LogPartition(part.times, part.directions.copy(), part.residuals, part.delta)
        i = int(np.argmax(np.diff(part.times)))
        bad.directions[i] = -bad.directions[i]
        assert np.max(np.abs(verify_partition(masses, bad))) > 0.05

    def test_trivial_partition(self):
        P = np.random.default_rng(4).uniform(-0.4, 0.4, (6, 2))
        m = disk_mass(np.vstack([P, -P]))
        triv = LogPartition(np.array([0.0, 1.0]), np.array([[0.6, 0.8, 0.0]]), np.zeros(1), 0.0)
        assert verify_partition([m], triv) == pytest.approx([0.0])

    def test_malformed(self):
        m = random_disk_mass(1, 5, 0)
        with pytest.raises(ValueError):
            verify_partition([m], LogPartition(np.array([0.0, 0.5]), np.array([[1.0, 0, 0]]), np.zeros(1), 0.0))
        with pytest.raises(ValueError):
            verify_partition([m], LogPartition(np.array([0.0, 1.0]), np.array([[0.0, 0, 1.0]]), np.zeros(1), 0.0))
        with pytest.raises(ValueError):
            solve_log_bundle([random_cloud(3, 5, 0)], 1.0)

    def test_affine(self):
        masses = [random_disk_mass(1, 30, s) for s in range(2)]
        part = solve_log_bundle(masses, math.pi, SearchOptions(seed=0), affine=True)
        assert part.affine and part.directions.shape[1] == 3
        assert np.allclose(verify_partition(masses, part), part.residuals, atol=1e-9)
        assert part.success


def test_capture_with_exact_map_is_odd_zero():
    masses = [random_cloud(2, 21, s) for s in range(2)]
    f = residual_map(masses)
    cap = find_zero_capture(f, 0.0, SearchOptions(seed=0))
    res, _ = cap.replay(f, -cap.atoms)
    assert res == pytest.approx(cap.residual, abs=1e-12)
