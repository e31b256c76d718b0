import math

import numpy as np
import pytest

from comirror.bregman import (
    BregmanGeometry,
    DomainError,
    bregman_distance,
    diameters,
    mirror_step,
)
from comirror.checks import check_mirror_step_grid, check_strong_convexity
from comirror.core import BoxSet

E = math.e


class TestDistance:
    def test_distance_to_self_is_zero(self):
        geom = BregmanGeometry.euclidean()
        assert bregman_distance(geom, [0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_euclidean_is_half_squared_distance(self):
        geom = BregmanGeometry.euclidean()
        assert bregman_distance(geom, [1.0, 0.0], [0.0, 0.0]) == 0.5

    def test_entropy_hand_value(self):
        # omega(x) = x ln x: D(1, e) = e - 2
        geom = BregmanGeometry("entropy", 0.0, 1.0)
        assert bregman_distance(geom, [1.0], [E]) == pytest.approx(E - 2, rel=1e-12)
        assert bregman_distance(geom, [E], [1.0]) == pytest.approx(1.0, rel=1e-12)

    def test_entropy_domain_violation(self):
        geom = BregmanGeometry("entropy", 0.0, 1.0)
        with pytest.raises(DomainError):
            bregman_distance(geom, [-0.1], [1.0])

    def test_matches_three_term_definition(self):
        rng = np.random.default_rng(3)
        box = BoxSet([0.2, 0.2], [3.0, 3.0])
        geom = BregmanGeometry.for_box("entropy", box, 1e-3)
        for _ in range(100):
            u, v = rng.uniform(0.2, 3.0, size=(2, 2))
            direct = (geom.omega(u) - geom.omega(v)
                      - float(geom.grad_omega(v) @ (u - v)))
            assert bregman_distance(geom, u, v) == pytest.approx(direct, abs=1e-10)


class TestDiameters:
    def test_euclidean_unit_square(self):
        report = diameters(BregmanGeometry.euclidean(), BoxSet([0, 0], [1, 1]))
        assert report.theta == pytest.approx(1.0)
        assert report.omega_diam == pytest.approx(math.sqrt(2))

    def test_euclidean_scaling(self):
        report = diameters(BregmanGeometry.euclidean(), BoxSet([0, 0], [10, 10]))
        assert report.theta == pytest.approx(100.0)

    def test_entropy_takes_worse_ordering(self):
        # on [1, e] with no shift: D(e,1) = 1 beats D(1,e) = e - 2
        geom = BregmanGeometry("entropy", 0.0, 1.0 / E)
        report = diameters(geom, BoxSet([1.0], [E]))
        assert report.theta == pytest.approx(1.0, rel=1e-12)

    def test_theta_dominates_sampled_distances(self):
        rng = np.random.default_rng(8)
        box = BoxSet([0.0, 0.0], [10.0, 10.0])
        geom = BregmanGeometry.for_box("entropy", box, 1e-3)
        theta = diameters(geom, box).theta
        for _ in range(300):
            u, v = rng.uniform(box.lower, box.upper, size=(2, 2))
            assert bregman_distance(geom, u, v) <= theta * (1 + 1e-12)

    def test_theta_lower_bound_from_longest_edge(self):
        from comirror.solver import SolverConfig, build_geometry

        box = BoxSet([-1.0, -2.0], [2.0, 1.0])
        for kind in ("euclidean", "entropy"):
            geom = build_geometry(SolverConfig(geometry=kind), box)
            theta = diameters(geom, box).theta
            assert theta >= geom.alpha / 2 * max(box.upper - box.lower) ** 2
            assert theta > 0


class TestMirrorStep:
    def test_euclidean_is_clamped_gradient_step(self):
        geom = BregmanGeometry.euclidean()
        box = BoxSet([0.0, 0.0], [1.0, 1.0])
        z = mirror_step(geom, box, [0.5, 0.5], [1.0, 0.0])
        np.testing.assert_allclose(z, [0.0, 0.5])

    def test_zero_step_returns_x(self):
        box = BoxSet([0.1, 0.1], [1.0, 1.0])
        x = np.array([0.4, 0.9])
        for kind in ("euclidean", "entropy"):
            geom = BregmanGeometry.for_box(kind, box, 1e-3)
            np.testing.assert_allclose(mirror_step(geom, box, x, [0.0, 0.0]), x,
                                       rtol=1e-15)

    def test_entropy_closed_form_hand_value(self):
        geom = BregmanGeometry("entropy", 0.0, 1.0)
        box = BoxSet([0.1], [1.0])
        z = mirror_step(geom, box, [0.5], [math.log(2.0)])
        assert z[0] == pytest.approx(0.25, rel=1e-14)

    def test_variational_inequality(self):
        rng = np.random.default_rng(17)
        for kind, box in (("euclidean", BoxSet([-1.0, -2.0], [2.0, 1.0])),
                          ("entropy", BoxSet([0.1, 0.2], [3.0, 2.0]))):
            geom = BregmanGeometry.for_box(kind, box, 1e-3)
            for _ in range(100):
                x = rng.uniform(box.lower, box.upper)
                s = rng.normal(size=2) * rng.uniform(0.1, 3.0)
                z = mirror_step(geom, box, x, s)
                grad_term = s - geom.grad_omega(x) + geom.grad_omega(z)
                for u in box.corners() + [rng.uniform(box.lower, box.upper)
                                          for _ in range(5)]:
                    assert float(grad_term @ (u - z)) >= -1e-8

    def test_iterate_outside_box_rejected(self):
        geom = BregmanGeometry.euclidean()
        box = BoxSet([0.0], [1.0])
        with pytest.raises(ValueError):
            mirror_step(geom, box, [2.0], [0.0])

    def test_matches_grid_brute_force(self):
        report = check_mirror_step_grid(instances=40, grid_points=2001, seed=5)
        assert report.violations == 0


class TestStrongConvexity:
    def test_equivalence_suite(self):
        reports = check_strong_convexity(pairs=300)
        assert all(r.ok for r in reports), [r for r in reports if not r.ok]

    def test_three_point_identity(self):
        rng = np.random.default_rng(23)
        for kind, box in (("euclidean", BoxSet([-1.0, -1.0], [2.0, 2.0])),
                          ("entropy", BoxSet([0.1, 0.1], [2.0, 2.0]))):
            geom = BregmanGeometry.for_box(kind, box, 1e-3)
            for _ in range(200):
                u, z, x = rng.uniform(box.lower, box.upper, size=(3, 2))
                lhs = (bregman_distance(geom, u, z) - bregman_distance(geom, u, x)
                       + bregman_distance(geom, z, x))
                rhs = float((geom.grad_omega(x) - geom.grad_omega(z)) @ (u - z))
                assert lhs == pytest.approx(rhs, abs=1e-10)


class TestGeometryConstruction:
    def test_entropy_alpha_is_inverse_max_shifted_upper(self):
        box = BoxSet([0.0, 0.0], [10.0, 4.0])
        geom = BregmanGeometry.for_box("entropy", box, 1e-3)
        assert geom.alpha == pytest.approx(1.0 / 10.001)

    def test_entropy_needs_positive_shifted_lower(self):
        box = BoxSet([-1.0, 0.0], [2.0, 1.0])
        with pytest.raises(DomainError):
            BregmanGeometry.for_box("entropy", box, 1e-3)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            BregmanGeometry.for_box("mahalanobis", BoxSet([0.0], [1.0]))
