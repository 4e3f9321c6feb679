import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddcodes.caratheodory import (ArcSet, CapSet, OracleSet, find_matching_measure,
                                   find_zero_capture, lsb_threshold, lsb_witness,
                                   sm_hull_certificate, sm_polygon, sm_threshold,
                                   sm_threshold_sweep, verify_sm_lemma)
from oddcodes.geom import circle_point, pairwise_geodesic, set_diameter
from oddcodes.oddmaps import (FunctionMap, SMMap, coordinate_map,
                              random_odd_polynomial_map, random_polynomial_map)
from oddcodes.options import SearchOptions


def check_certificate(cap, f, delta):
    """Replay a success without the solver: residual, diameter, simplex weights."""
    F = np.atleast_2d(f(cap.atoms))
    assert np.all(cap.weights >= 0) and cap.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(cap.weights @ F) <= 1e-6
    D = pairwise_geodesic(cap.atoms).max() if len(cap.atoms) > 1 else 0.0
    assert D <= delta + 1e-6
    assert cap.diameter == pytest.approx(set_diameter(cap.atoms), abs=1e-12)


class TestFindZeroCapture:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_coordinate_map_singleton(self, d):
        f = coordinate_map(d, d)
        cap = find_zero_capture(f, 0.0, SearchOptions(seed=0))
        assert cap.success and len(cap.atoms) == 1
        assert abs(abs(cap.atoms[0, -1]) - 1) < 1e-6
        check_certificate(cap, f, 0.0)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_sm_above_threshold(self, k):
        f = SMMap(k)
        delta = sm_threshold(k) + 0.05
        cap = find_zero_capture(f, delta, SearchOptions(seed=1, restarts=12))
        assert cap.success
        check_certificate(cap, f, delta)

    @pytest.mark.parametrize("k", [1, 2])
    def test_sm_below_threshold(self, k):
        cap = find_zero_capture(SMMap(k), sm_threshold(k) - 0.05, SearchOptions(seed=1, restarts=6))
        assert not cap.success
        assert cap.residual >= 1e-3
        assert len(cap.info["restart_residuals"]) == 6

    def test_replay_monotone_and_odd(self):
        f = random_odd_polynomial_map(2, 4, 3, seed=5)
        delta = 2.3
        cap = find_zero_capture(f, delta, SearchOptions(seed=2))
        assert cap.success
        for bigger in (delta + 0.1, math.pi):
            res, diam = cap.replay(f)
            assert res <= 1e-6 and diam <= bigger
        res_neg, diam_neg = cap.replay(f, -cap.atoms)
        assert res_neg == pytest.approx(cap.residual, abs=1e-12)
        assert diam_neg == pytest.approx(cap.diameter, abs=1e-12)

    def test_linear_map_kernel(self):
        f = random_odd_polynomial_map(3, 3, 1, seed=8)
        cap = find_zero_capture(f, 0.0, SearchOptions(seed=0))
        assert cap.success
        # the kernel of the linear map is one line; compare with the SVD null vector
        M = f(np.eye(4)).T
        null = np.linalg.svd(M)[2][-1]
        assert abs(abs(float(cap.atoms[0] @ null)) - 1) < 1e-6

    def test_invalid_delta(self):
        with pytest.raises(ValueError):
            find_zero_capture(SMMap(1), -0.1)
        with pytest.raises(ValueError):
            find_zero_capture(SMMap(1), 4.0)

    def test_quintic_s2_r5(self):
        f = random_odd_polynomial_map(2, 5, 5, seed=3)
        delta = math.pi - math.acos(1 / math.sqrt(5))
        cap = find_zero_capture(f, delta, SearchOptions(seed=0))
        assert cap.success
        check_certificate(cap, f, delta)


class TestMatchingMeasure:
    def test_even_map(self):
        f = FunctionMap(2, 3, lambda X: X ** 2, name="squares")
        cap = find_matching_measure(f, 0.0, SearchOptions(seed=0))
        assert cap.success and len(cap.atoms) == 1 and cap.residual == 0.0

    def test_random_map(self):
        f = random_polynomial_map(2, 5, 3, seed=4)
        delta = math.pi - math.acos(1 / math.sqrt(5))
        cap = find_matching_measure(f, delta, SearchOptions(seed=0))
        assert cap.success and cap.diameter <= delta + 1e-6
        assert np.allclose(cap.info["common_point"], cap.info["mirror_point"], atol=1e-6)

    def test_odd_map_matches_doubled(self):
        f = random_odd_polynomial_map(2, 2, 3, seed=6)
        opts = SearchOptions(seed=3)
        a = find_matching_measure(f, 0.0, opts)
        assert a.success
        assert np.linalg.norm(2 * f(a.atoms[0])) <= 1e-6


class TestMomentCurveArcs:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_outside_below(self, k):
        cert = verify_sm_lemma(k, sm_threshold(k) - 0.01, 200)
        assert not cert.inside and cert.verify(sm_curve_arc(k, sm_threshold(k) - 0.01))

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_polygon_inside(self, k):
        t = sm_polygon(k)
        cert = sm_hull_certificate(k, t)
        assert cert.inside
        assert np.allclose(cert.weights, 1 / (2 * k + 1), atol=1e-9)
        pts = np.stack([np.cos(t), np.sin(t)], 1)
        assert set_diameter(pts) == pytest.approx(sm_threshold(k), abs=1e-12)

    @settings(max_examples=25)
    @given(st.integers(1, 3), st.floats(0.1, 3.0), st.floats(0, 2 * math.pi))
    def test_rotation_covariance(self, k, D, offset):
        a = verify_sm_lemma(k, D, 60)
        b = verify_sm_lemma(k, D, 60, offset=offset)
        assert a.inside == b.inside
        assert a.distance == pytest.approx(b.distance, abs=1e-7)

    def test_invalid(self):
        with pytest.raises(ValueError):
            verify_sm_lemma(1, 1.0, samples=2)
        with pytest.raises(ValueError):
            verify_sm_lemma(0, 1.0)

    def test_sweep_brackets(self):
        k = 1
        T = sm_threshold(k)
        rows = sm_threshold_sweep(k, [T - 0.05, T + 0.05], SearchOptions(seed=0, restarts=6))
        assert [r.captured for r in rows] == [False, True]
        assert not any(r.arc_inside for r in rows)


def sm_curve_arc(k, D, samples=200):
    from oddcodes.oddmaps import sm_curve
    return sm_curve(k, np.linspace(0.0, D, samples))


class TestLSB:
    def test_threshold(self):
        assert lsb_threshold(1, 1) == 0.0
        assert lsb_threshold(1, 2) == pytest.approx(2 * math.pi / 3, abs=1e-9)

    def test_semicircles(self):
        cover = [ArcSet(0.0, math.pi), ArcSet(math.pi, math.pi)]
        out = lsb_witness(cover, 1, SearchOptions(seed=0))
        assert out.kind == "witness"
        x = out.point
        A = cover[out.index]
        assert A.contains(x[None, :])[0] and A.contains(-x[None, :])[0]

    def test_three_arcs_violation(self):
        cover = [ArcSet(2 * math.pi * j / 3, 2 * math.pi / 3) for j in range(3)]
        out = lsb_witness(cover, 1, SearchOptions(seed=0))
        assert out.kind == "violation" and out.phase == "hypothesis"
        S = out.violating_set
        assert set_diameter(S) <= out.delta + 1e-9
        assert not any(np.all(A.contains(S)) for A in cover)

    def test_capture_phase(self):
        cover = [ArcSet(0.0, math.pi + 2.2), ArcSet(math.pi, math.pi + 2.2)]
        out = lsb_witness(cover, 1, SearchOptions(seed=0), scan_first=False)
        assert out.kind == "witness" and out.phase in ("capture", "grid")
        assert out.capture is not None and out.capture.success
        A = cover[out.index]
        assert A.contains(out.point[None, :])[0] and A.contains(-out.point[None, :])[0]

    def test_caps_on_s2(self):
        cover = [CapSet([0, 0, 1.0], math.pi / 2 + 0.1), CapSet([0, 0, -1.0], math.pi / 2 + 0.1)]
        out = lsb_witness(cover, 2, SearchOptions(seed=0), grid=400)
        assert out.kind == "witness"

    def test_oracle_set_and_errors(self):
        full = OracleSet(1, lambda X: np.zeros(len(X)), name="all")
        out = lsb_witness([full], 1, SearchOptions(seed=0))
        assert out.kind == "witness" and out.index == 0
        with pytest.raises(ValueError):
            lsb_witness([], 1)
        with pytest.raises(ValueError):
            lsb_witness([ArcSet(0, 1.0), CapSet([0, 0, 1.0], 1.0)], 1)

    def test_arc_distance(self):
        A = ArcSet(0.0, 1.0)
        X = np.array([circle_point(0.5), circle_point(1.5), circle_point(-0.25)])
        assert np.allclose(A.distance(X), [0.0, 0.5, 0.25])
