import numpy as np
import pytest

from comirror.sampling import (
    PoisednessError,
    PoisedSample,
    SamplingStrategy,
    build_poised_sample,
    inv_norm_of,
)


class TestInvNorm:
    def test_identity_tuple(self):
        assert inv_norm_of([np.array([1.0, 0.0]), np.array([0.0, 1.0])],
                           np.zeros(2)) == pytest.approx(1.0)

    def test_collinear_is_singular_sentinel(self):
        nu = inv_norm_of([np.array([1.0, 0.0]), np.array([2.0, 0.0])], np.zeros(2))
        assert nu == np.inf

    def test_two_by_two_hand_eigenvalues(self):
        # rows (1,0) and (1,1), delta = sqrt(2); char. polynomial of
        # Lhat^T Lhat is lambda^2 - (3/2) lambda + 1/4
        nu = inv_norm_of([np.array([1.0, 0.0]), np.array([1.0, 1.0])], np.zeros(2))
        eig_min = (3.0 - np.sqrt(5.0)) / 4.0
        assert nu == pytest.approx(1.0 / np.sqrt(eig_min), rel=1e-12)

    def test_scale_and_shift_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            m = int(rng.integers(2, 6))
            center = rng.normal(size=m)
            points = [center + rng.normal(size=m) for _ in range(m)]
            nu = inv_norm_of(points, center)
            if not np.isfinite(nu):
                continue
            scale = float(rng.uniform(0.1, 10.0))
            shift = rng.normal(size=m)
            moved = [scale * (p - center) + center + shift for p in points]
            nu2 = inv_norm_of(moved, center + shift)
            assert nu2 == pytest.approx(nu, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            inv_norm_of([np.array([1.0, 0.0])], np.zeros(2))


class TestBuild:
    def test_coordinate_tuple_from_origin(self):
        sample = build_poised_sample(np.zeros(2), 1.0, 10.0, SamplingStrategy())
        np.testing.assert_array_equal(sample.points[0], [1.0, 0.0])
        np.testing.assert_array_equal(sample.points[1], [0.0, 1.0])
        assert sample.inv_norm == 1.0
        assert sample.radius == 1.0

    def test_coordinate_inv_norm_is_scale_invariant(self):
        sample = build_poised_sample(np.zeros(2), 0.5, 10.0, SamplingStrategy())
        np.testing.assert_array_equal(sample.points[0], [0.5, 0.0])
        assert sample.inv_norm == 1.0

    def test_random_ball_certificate_checked_by_svd(self):
        strategy = SamplingStrategy("random_ball", seed=42)
        sample = build_poised_sample(np.ones(2), 0.1, 10.0, strategy)
        assert sample.inv_norm <= 10.0
        rows = np.array([p - sample.center for p in sample.points])
        delta = np.max(np.linalg.norm(rows, axis=1))
        svals = np.linalg.svd(rows / delta, compute_uv=False)
        assert sample.inv_norm == pytest.approx(1.0 / svals[-1], rel=1e-12)
        assert sample.radius == pytest.approx(0.1, rel=1e-12)

    @pytest.mark.parametrize("kind", ["coordinate", "rotated_coordinate",
                                      "random_ball"])
    def test_sample_invariants(self, kind):
        strategy = SamplingStrategy(kind, seed=9)
        sample = build_poised_sample(np.array([1.0, -2.0, 0.5]), 0.3, 10.0, strategy)
        dists = [np.linalg.norm(p - sample.center) for p in sample.points]
        assert max(dists) == pytest.approx(sample.radius, rel=1e-12)
        assert all(d <= sample.radius * (1 + 1e-12) for d in dists)
        assert np.isfinite(sample.inv_norm)
        assert sample.inv_norm == pytest.approx(
            inv_norm_of(sample.points, sample.center), rel=1e-12)

    @pytest.mark.parametrize("kind", ["coordinate", "rotated_coordinate",
                                      "random_ball"])
    def test_determinism(self, kind):
        strategy = SamplingStrategy(kind, seed=123)
        a = build_poised_sample(np.array([0.2, 0.4]), 0.05, 10.0, strategy)
        b = build_poised_sample(np.array([0.2, 0.4]), 0.05, 10.0, strategy)
        for p, q in zip(a.all_points(), b.all_points()):
            np.testing.assert_array_equal(p, q)
        assert a.inv_norm == b.inv_norm

    def test_rotated_tuples_are_orthonormal(self):
        strategy = SamplingStrategy("rotated_coordinate", seed=4)
        sample = build_poised_sample(np.zeros(3), 1.0, 10.0, strategy)
        assert sample.inv_norm == pytest.approx(1.0, abs=1e-9)

    def test_poisedness_failure_when_m_unreachable(self):
        # random tuples essentially never reach inv_norm == 1
        strategy = SamplingStrategy("random_ball", seed=0, max_resamples=20)
        with pytest.raises(PoisednessError):
            build_poised_sample(np.zeros(2), 1.0, 1.0000001, strategy)

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            build_poised_sample(np.zeros(2), 0.0, 10.0, SamplingStrategy())

    def test_m_below_one_rejected(self):
        with pytest.raises(ValueError):
            build_poised_sample(np.zeros(2), 1.0, 0.5, SamplingStrategy())

    def test_unknown_strategy_kind(self):
        with pytest.raises(ValueError):
            SamplingStrategy("latin_hypercube")
