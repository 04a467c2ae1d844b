import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tail_lab.geometry import (
    Face,
    FaceLabel,
    FixedR,
    GeometryError,
    NullOffset,
    Ray,
    appendix_coords,
    appendix_inverse,
    classify_trajectory,
    fit_blowup_exponents,
    half_disk,
    quarter_sphere,
    scri_coords,
    synthetic_phg,
    tf_coords,
    trajectory_radius,
)
from tail_lab.indexsets import IndexSet


class TestCharts:
    def test_quarter_sphere(self):
        np.testing.assert_allclose(quarter_sphere(1, 1), np.ones(3) / math.sqrt(3), atol=1e-15)
        np.testing.assert_allclose(quarter_sphere(1, 1e-300), [2 ** -0.5, 0, 2 ** -0.5], atol=1e-15)
        np.testing.assert_allclose(quarter_sphere(0, 1e-300), [0, 0, 1], atol=1e-15)
        with pytest.raises(GeometryError):
            quarter_sphere(1, 0)

    def test_half_disk(self):
        np.testing.assert_allclose(half_disk(0, 1), [0, 1 / (1 + math.sqrt(2))], atol=1e-15)
        np.testing.assert_allclose(half_disk(0, 1e-300), [0, 0], atol=1e-15)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-1e6, 1e6), st.floats(1e-6, 1e6))
    def test_chart_bounds(self, t, r):
        z = np.array(quarter_sphere(t, r))
        assert abs(np.linalg.norm(z) - 1) <= 1e-14
        w = np.array(half_disk(t, r))
        assert np.linalg.norm(w) < 1 and w[1] > 0

    def test_rho_x_examples(self):
        assert appendix_coords(3, 1) == (0.25, 0.5)
        assert appendix_coords(7, 7)[1] == 1.0
        with pytest.raises(GeometryError):
            appendix_coords(-1, 1)

    def test_rho_x_round_trip(self):
        rng = np.random.default_rng(4)
        sm = 10 ** rng.uniform(-3, 6, 10_000)
        r = sm * rng.uniform(1e-6, 1, sm.size)
        t = sm - r
        rho, x = appendix_coords(t, r)
        t2, r2 = appendix_inverse(rho, x)
        assert np.max(np.abs(t2 - t) / sm) <= 1e-13
        assert np.max(np.abs(r2 - r) / sm) <= 1e-13

    def test_tf_coords(self):
        rt, y = tf_coords(0.5, 0.25)
        assert rt == 0.75 and y == pytest.approx(1 / 3, abs=1e-15)
        assert tf_coords(0.3, 0.3)[1] == 0
        assert tf_coords(0.3, 0.0)[1] == 1
        with pytest.raises(GeometryError):
            tf_coords(0.0, 0.0)

    def test_scri(self):
        assert scri_coords(10, 7) == 3
        assert scri_coords(5.5, 5.5) == 0


class TestClassification:
    def test_examples(self):
        assert classify_trajectory(FixedR(2)) == FaceLabel(Face.TF_PLUS, 0.6)
        lab = classify_trajectory(Ray(0.5))
        assert lab.face is Face.C_PLUS and lab.interior_coordinate == pytest.approx(2 / 3)
        assert classify_trajectory(NullOffset(5)) == FaceLabel(Face.SCRI_PLUS, 5.0)

    @pytest.mark.parametrize("traj", [FixedR(0.3), FixedR(2), FixedR(40), Ray(0.1), Ray(0.5),
                                      Ray(0.95), NullOffset(-3), NullOffset(5)])
    def test_limits_along_path(self, traj):
        t = 1e6
        r = float(trajectory_radius(traj, t))
        lab = classify_trajectory(traj)
        rho, x = appendix_coords(t, r)
        if lab.face is Face.TF_PLUS:
            direct = tf_coords(x, rho)[1]
        elif lab.face is Face.C_PLUS:
            direct = x
        else:
            direct = scri_coords(t, r)
        assert abs(direct - lab.interior_coordinate) <= 1e-4

    def test_parameter_errors(self):
        for bad in (lambda: FixedR(0), lambda: Ray(1.0), lambda: Ray(0.0), lambda: NullOffset(math.inf)):
            with pytest.raises(GeometryError):
                bad()
        with pytest.raises(GeometryError):
            FaceLabel(Face.C_PLUS, 1.5)

    def test_labels(self):
        assert (FixedR(2).label, Ray(0.5).label, NullOffset(5).label) == ("r=2", "gamma=0.5", "t-r=5")


class TestSyntheticPhg:
    def test_single_term(self):
        u = synthetic_phg(IndexSet(((2.0, 0),), 3), IndexSet(((1.0, 0),), 3), 1.0)
        assert u(0.1, 0.2) == pytest.approx(0.002, abs=1e-17)
        assert u(0.3, 0.0) == 0

    def test_blowup_exponents_lattice(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            e0, f0 = rng.uniform(0.2, 3.0, 2)
            ge, gf = rng.uniform(0.5, 1.5, 2)
            E = IndexSet.from_exponents(e0 + ge * np.arange(4), 20)
            F = IndexSet.from_exponents(f0 + gf * np.arange(4), 20)
            u = synthetic_phg(E, F, rng.uniform(0.5, 2.0, (4, 4)))
            fit = fit_blowup_exponents(u)
            assert fit["ff"] == pytest.approx(e0 + f0, abs=1e-2)
            assert fit["h1"] == pytest.approx(e0, abs=1e-2)
            assert fit["h2"] == pytest.approx(f0, abs=1e-2)
