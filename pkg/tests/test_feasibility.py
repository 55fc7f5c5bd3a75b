import itertools
import os
import subprocess
import sys
from fractions import Fraction as F

import numpy as np
import pytest

from tverflat import _pykernels
from tverflat.errors import DimensionMismatch
from tverflat.feasibility import (
    HullSystem,
    bland_phase_one,
    common_point_gap,
    feasible_exact,
    nearest_in_hull,
)
from tverflat.geometry import exact_array

try:
    from tverflat import _ckernels
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None


def oracle_nearest(P, t):
    """Nearest hull point by brute force over affinely independent subsets.

    The optimum lies in the relative interior of some face spanned by at most
    m + 1 points, where it is the affine projection of the target.
    """
    P = np.asarray(P, float)
    t = np.asarray(t, float)
    n, m = P.shape
    best = None
    for r in range(1, min(n, m + 1) + 1):
        for idx in itertools.combinations(range(n), r):
            V = P[list(idx)]
            if r == 1:
                x = V[0]
            else:
                D = (V[1:] - V[0]).T
                if np.linalg.matrix_rank(D) < r - 1:
                    continue
                c, *_ = np.linalg.lstsq(D, t - V[0], rcond=None)
                if np.any(c < -1e-12) or c.sum() > 1 + 1e-12:
                    continue
                x = V[0] + D @ c
            dist = np.linalg.norm(x - t)
            if best is None or dist < best[0]:
                best = (dist, x)
    return best


def hull_distance_oracle(A, B):
    """Distance between two hulls as the norm of conv(A - B)."""
    diffs = np.array([a - b for a in np.asarray(A, float) for b in np.asarray(B, float)])
    return oracle_nearest(diffs, np.zeros(diffs.shape[1]))[0]


def _rand_hulls(rng, count, m, sizes=(1, 5)):
    return [rng.normal(size=(int(rng.integers(*sizes)), m)) for _ in range(count)]


class TestNearestInHull:
    def test_segment_projection(self):
        x, w = nearest_in_hull([(0, 0), (2, 0)], (1, 5))
        np.testing.assert_allclose(x, [1, 0], atol=1e-14)
        np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-14)

    def test_inside(self):
        x, _ = nearest_in_hull([(0, 0), (4, 0), (0, 4)], (1, 1))
        np.testing.assert_allclose(x, [1, 1], atol=1e-12)

    def test_vertex(self):
        x, w = nearest_in_hull([(0, 0), (1, 0), (0, 1)], (-3, -2))
        np.testing.assert_allclose(x, [0, 0], atol=1e-14)
        assert w[0] == pytest.approx(1)

    def test_bad_shape(self):
        with pytest.raises(DimensionMismatch):
            nearest_in_hull(np.zeros((0, 2)), (0, 0))

    @pytest.mark.parametrize("seed", range(4))
    def test_against_face_oracle(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(100):
            m = int(rng.integers(1, 4))
            n = int(rng.integers(1, 7))
            P = rng.normal(size=(n, m))
            t = rng.normal(size=m) * 2
            x, w = nearest_in_hull(P, t)
            dist, _ = oracle_nearest(P, t)
            assert np.linalg.norm(x - t) == pytest.approx(dist, abs=1e-9)
            assert np.all(w >= 0) and w.sum() == pytest.approx(1)
            np.testing.assert_allclose(w @ P, x, atol=1e-9)

    def test_frank_wolfe_gap_small(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            m = int(rng.integers(1, 5))
            P = rng.normal(size=(int(rng.integers(2, 9)), m))
            t = rng.normal(size=m)
            x, _, gap = _pykernels.nearest_in_hull(P - t, np.zeros(m))
            assert gap <= 1e-10 * (1 + t @ t)


class TestCommonPointGap:
    def test_intervals(self):
        res = common_point_gap(HullSystem.from_points([[[0.0], [1.0]], [[2.0], [3.0]]]))
        assert res.gap == pytest.approx(0.5, abs=1e-12)
        assert res.witness_point[0] == pytest.approx(1.5, abs=1e-12)
        np.testing.assert_allclose(res.nearest[:, 0], [1, 2], atol=1e-12)

    def test_crossing_segments(self):
        sys_ = HullSystem.from_points([[(0.0, 0.0), (2.0, 2.0)], [(0.0, 2.0), (2.0, 0.0)]])
        res = common_point_gap(sys_)
        assert res.gap <= 1e-20
        np.testing.assert_allclose(res.witness_point, [1, 1], atol=1e-10)

    @pytest.mark.parametrize("seed", range(3))
    def test_two_hulls_against_distance_oracle(self, seed):
        # with two hulls the optimum is half the squared hull distance
        rng = np.random.default_rng(seed)
        for _ in range(60):
            m = int(rng.integers(1, 4))
            A, B = _rand_hulls(rng, 2, m, sizes=(1, 4))
            B = B + rng.normal(size=m)
            res = common_point_gap(HullSystem.from_points([A, B]))
            dist = hull_distance_oracle(A, B)
            assert res.gap == pytest.approx(dist**2 / 2, abs=1e-9)

    def test_weights_reproduce_nearest(self):
        rng = np.random.default_rng(4)
        hulls = _rand_hulls(rng, 3, 2)
        res = common_point_gap(HullSystem.from_points(hulls))
        for h, w, q in zip(hulls, res.weights, res.nearest):
            assert np.all(w >= 0) and w.sum() == pytest.approx(1)
            np.testing.assert_allclose(w @ h, q, atol=1e-9)

    def test_monotone_under_growing_hull(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            m = int(rng.integers(1, 4))
            hulls = _rand_hulls(rng, int(rng.integers(2, 4)), m)
            g0 = common_point_gap(HullSystem.from_points(hulls)).gap
            j = int(rng.integers(len(hulls)))
            hulls[j] = np.vstack([hulls[j], rng.normal(size=(1, m)) * 2])
            g1 = common_point_gap(HullSystem.from_points(hulls)).gap
            assert g1 <= g0 + 1e-9

    def test_translation_equivariance(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            m = int(rng.integers(1, 4))
            sys_ = HullSystem.from_points(_rand_hulls(rng, int(rng.integers(2, 4)), m))
            t = rng.normal(size=m) * 5
            a = common_point_gap(sys_)
            b = common_point_gap(sys_.translated(t))
            assert b.gap == pytest.approx(a.gap, abs=1e-8)
            if a.gap > 1e-6:
                # the optimum is unique when the hulls are apart in generic position
                np.testing.assert_allclose(b.witness_point, a.witness_point + t, atol=1e-5)


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
class TestBackendParity:
    def test_nearest(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            m = int(rng.integers(1, 5))
            P = np.ascontiguousarray(rng.normal(size=(int(rng.integers(1, 8)), m)))
            t = rng.normal(size=m)
            xa, wa, _ = _pykernels.nearest_in_hull(P, t)
            xb, wb, _ = _ckernels.nearest_in_hull(P, t)
            np.testing.assert_allclose(xa, xb, atol=1e-12)
            np.testing.assert_allclose(wa, wb, atol=1e-12)

    def test_gap(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            m = int(rng.integers(1, 4))
            sys_ = HullSystem.from_points(_rand_hulls(rng, 3, m))
            pts, off = sys_.packed()
            ga = _pykernels.common_point_gap(pts, off, 10000, 1e-14)
            gb = _ckernels.common_point_gap(pts, off, 10000, 1e-14)
            assert ga[0] == pytest.approx(gb[0], abs=1e-12)
            # iteration counts may differ by rounding at the stopping threshold
            np.testing.assert_allclose(ga[1], gb[1], atol=1e-6)


class TestFeasibleExact:
    def test_crossing_segments(self):
        ok, res = feasible_exact(HullSystem.from_points([[(0, 0), (2, 2)], [(0, 2), (2, 0)]]))
        assert ok
        assert list(res.witness_point) == [1, 1]
        assert res.gap == 0

    def test_disjoint_intervals(self):
        ok, res = feasible_exact(HullSystem.from_points([[[0], [1]], [[2], [3]]]))
        assert not ok and res is None

    def test_touching_intervals(self):
        ok, res = feasible_exact(HullSystem.from_points([[[0], [1]], [[1], [3]]]))
        assert ok and list(res.witness_point) == [1]

    def test_three_hulls(self):
        hulls = [[(0, 0), (4, 0)], [(1, -1), (1, 3)], [(0, 0), (2, 0), (1, 5)]]
        ok, res = feasible_exact(HullSystem.from_points(hulls))
        assert ok
        for h, w in zip(hulls, res.weights):
            assert all(v >= 0 for v in w) and sum(w) == 1
            assert np.all(w @ exact_array(h) == res.witness_point)

    def test_consistent_with_float_gap(self):
        rng = np.random.default_rng(21)
        for _ in range(150):
            m = int(rng.integers(1, 3))
            hulls = [exact_array([[F(int(v), 16) for v in row]
                                  for row in rng.integers(-16, 17, size=(int(rng.integers(1, 4)), m))])
                     for _ in range(2)]
            ok, _ = feasible_exact(HullSystem.from_points(hulls))
            dist = hull_distance_oracle(*hulls)
            assert ok == (dist <= 1e-9)


class TestBland:
    def test_simple(self):
        assert bland_phase_one([[1, 1], [1, -1]], [1, 0]) == [F(1, 2), F(1, 2)]

    def test_infeasible(self):
        assert bland_phase_one([[1, 1]], [-1]) is None

    def test_redundant_rows(self):
        x = bland_phase_one([[1, 1, 0], [2, 2, 0], [0, 1, 1]], [1, 2, 1])
        A = np.array([[1, 1, 0], [2, 2, 0], [0, 1, 1]], dtype=object)
        assert all(v >= 0 for v in x)
        assert list(A @ np.array(x, dtype=object)) == [1, 2, 1]

    def test_degenerate_vertex(self):
        # many constraints tight at the same vertex; Bland's rule must terminate
        A = [[1, 0, 1, 0, 0], [0, 1, 0, 1, 0], [1, 1, 0, 0, 1]]
        x = bland_phase_one(A, [0, 0, 0])
        assert x == [0] * 5


def test_pure_python_switch():
    env = dict(os.environ, TVERFLAT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from tverflat.kernels import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
