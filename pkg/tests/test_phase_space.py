import math

import numpy as np
import pytest

from psitruss import (ElementState, Metric, PhasePoint, ShapeMismatchError,
                      ps_distance, ps_norm, rescaled_coords)


def random_point(rng, n, scale=1.0):
    return PhasePoint(scale * rng.standard_normal(n),
                      scale * rng.standard_normal(n))


def random_metric(rng, n):
    return Metric(c=float(rng.uniform(0.1, 10.0)),
                  volumes=rng.uniform(0.1, 5.0, n))


class TestNorm:
    def test_zero_point_has_zero_norm(self):
        m = Metric(c=2.0, volumes=np.ones(3))
        assert ps_norm(PhasePoint.zeros(3), m) == 0.0

    def test_single_element_hand_value(self):
        # w=2, C=4, (eps, sig) = (1, 2): 0.5 * 2 * (4*1 + 4/4) = 5
        m = Metric(c=4.0, volumes=[2.0])
        z = PhasePoint([1.0], [2.0])
        assert ps_norm(z, m) == pytest.approx(math.sqrt(5.0), rel=1e-15)

    def test_homogeneity(self, rng):
        m = random_metric(rng, 5)
        z = random_point(rng, 5)
        for t in (-3.5, 0.25, 7.0):
            scaled = PhasePoint(t * z.strain, t * z.stress)
            assert ps_norm(scaled, m) == pytest.approx(abs(t) * ps_norm(z, m),
                                                       rel=1e-13)

    def test_positive_definite_on_random_points(self, rng):
        m = random_metric(rng, 4)
        for _ in range(1000):
            z = random_point(rng, 4)
            if np.any(z.strain) or np.any(z.stress):
                assert ps_norm(z, m) > 0.0
        assert ps_norm(PhasePoint.zeros(4), m) == 0.0

    def test_length_mismatch_rejected(self):
        m = Metric(c=1.0, volumes=np.ones(3))
        with pytest.raises(ShapeMismatchError):
            ps_norm(PhasePoint.zeros(4), m)


class TestDistance:
    def test_identity_of_indiscernibles(self, rng):
        m = random_metric(rng, 6)
        z = random_point(rng, 6)
        assert ps_distance(z, z, m) == 0.0

    def test_symmetry(self, rng):
        m = random_metric(rng, 6)
        for _ in range(50):
            z1, z2 = random_point(rng, 6), random_point(rng, 6)
            assert ps_distance(z1, z2, m) == pytest.approx(
                ps_distance(z2, z1, m), rel=1e-15)

    def test_unit_example(self):
        m = Metric(c=1.0, volumes=[1.0])
        d = ps_distance(PhasePoint([0.0], [0.0]), PhasePoint([1.0], [1.0]), m)
        assert d == pytest.approx(1.0, rel=1e-15)

    def test_triangle_inequality(self, rng):
        m = random_metric(rng, 5)
        for _ in range(500):
            a, b, c = (random_point(rng, 5) for _ in range(3))
            lhs = ps_distance(a, c, m)
            rhs = ps_distance(a, b, m) + ps_distance(b, c, m)
            assert lhs <= rhs * (1.0 + 1e-12)

    def test_length_mismatch_rejected(self, rng):
        m = random_metric(rng, 5)
        with pytest.raises(ShapeMismatchError):
            ps_distance(random_point(rng, 5), random_point(rng, 4), m)


class TestRescaling:
    def test_norm_is_euclidean_after_rescaling(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 8))
            m = random_metric(rng, n)
            z = random_point(rng, n, scale=float(rng.uniform(0.1, 100.0)))
            direct = ps_norm(z, m)
            euclid = float(np.linalg.norm(rescaled_coords(z, m)))
            assert euclid == pytest.approx(direct, rel=1e-14)


class TestTypes:
    def test_metric_requires_positive_entries(self):
        with pytest.raises(ValueError):
            Metric(c=0.0, volumes=[1.0])
        with pytest.raises(ValueError):
            Metric(c=1.0, volumes=[1.0, -2.0])

    def test_phase_point_immutable(self):
        z = PhasePoint([1.0], [2.0])
        with pytest.raises(AttributeError):
            z.strain = np.array([3.0])
        with pytest.raises(ValueError):
            z.strain[0] = 3.0

    def test_element_state_access(self):
        z = PhasePoint([1.0, 2.0], [3.0, 4.0])
        assert z.state(1) == ElementState(2.0, 4.0)
        assert [s.stress for s in z] == [3.0, 4.0]
        assert z.is_finite()
        assert not PhasePoint([np.nan], [0.0]).is_finite()
