"""Tests for the four projection-hash families."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floorlsh.families import (
    PROVEN_ADJACENCY_KINDS,
    FamilyKind,
    HashFunction,
    adjacency_certificate,
    c_threshold,
    cube_c_threshold,
    cube_scale,
    false_positive_bound,
    hash_eval,
    hash_eval_matrix,
    hash_function_from_bytes,
    hash_scale,
    lp_sphere_block,
    sample_pool,
    sample_vector,
    sign_c_threshold,
    sphere_c_threshold,
    sphere_scale,
)
from floorlsh.lpspace import lp_norm
from floorlsh.streams import stream

KINDS = st.sampled_from(list(FamilyKind))
PROVEN = st.sampled_from(list(PROVEN_ADJACENCY_KINDS))
EXPONENTS = st.one_of(st.floats(min_value=1.0, max_value=32.0), st.just(math.inf))
SEEDS = st.integers(min_value=0, max_value=2**63 - 1)


class TestHashScale:
    def test_cube_and_sign_share_scale(self):
        for p, d in [(1.0, 4), (2.0, 9), (math.inf, 16)]:
            expected = cube_scale(p, d)
            assert hash_scale(FamilyKind.UNIFORM_CUBE, p, d) == expected
            assert hash_scale(FamilyKind.RADEMACHER, p, d) == expected

    def test_sphere_scale(self):
        assert hash_scale(FamilyKind.UNIT_SPHERE, 2.0, 9) == sphere_scale(2.0, 9)
        assert hash_scale(FamilyKind.UNIT_SPHERE, math.inf, 9) == pytest.approx(
            9 ** (-0.5)
        )

    def test_experimental_scale_is_one(self):
        assert hash_scale(FamilyKind.LQ_SPHERE_EXPERIMENTAL, 1.5, 8) == 1.0


class TestThresholdsAndBounds:
    def test_c_threshold_dispatch(self):
        assert c_threshold(FamilyKind.UNIFORM_CUBE, 2.0, 4) == cube_c_threshold(
            2.0, 4
        )
        assert c_threshold(FamilyKind.UNIT_SPHERE, 2.0, 4) == sphere_c_threshold(
            2.0, 4
        )
        assert c_threshold(FamilyKind.RADEMACHER, 2.0, 4) == sign_c_threshold(2.0, 4)
        assert c_threshold(FamilyKind.LQ_SPHERE_EXPERIMENTAL, 2.0, 4) is None

    def test_cube_bound_is_threshold_over_c(self):
        tau = cube_c_threshold(2.0, 16)
        bound, threshold = false_positive_bound(
            FamilyKind.UNIFORM_CUBE, 2.0, 16, 4 * tau
        )
        assert threshold == tau
        assert bound == pytest.approx(0.25)

    def test_sphere_bound_is_threshold_over_c(self):
        tau = sphere_c_threshold(math.inf, 16)
        bound, _ = false_positive_bound(FamilyKind.UNIT_SPHERE, math.inf, 16, 10 * tau)
        assert bound == pytest.approx(0.1)

    def test_sign_bound_formula(self):
        tau = sign_c_threshold(2.0, 16)
        bound, _ = false_positive_bound(FamilyKind.RADEMACHER, 2.0, 16, 2 * tau)
        assert bound == pytest.approx(1.0 - (1.0 - 0.5) ** 2 / 2.0)

    def test_sign_bound_vacuous_below_threshold(self):
        tau = sign_c_threshold(2.0, 16)
        bound, threshold = false_positive_bound(
            FamilyKind.RADEMACHER, 2.0, 16, 0.5 * tau
        )
        assert bound is None
        assert threshold == tau

    def test_experimental_has_no_bound(self):
        bound, threshold = false_positive_bound(
            FamilyKind.LQ_SPHERE_EXPERIMENTAL, 2.0, 16, 100.0
        )
        assert bound is None and threshold is None

    @given(PROVEN, EXPONENTS, st.integers(min_value=1, max_value=512))
    @settings(deadline=2000)
    def test_bound_below_one_above_threshold(self, kind, p, d):
        tau = c_threshold(kind, p, d)
        bound, _ = false_positive_bound(kind, p, d, 1.5 * tau)
        assert bound is not None
        assert 0.0 < bound < 1.0


class TestSampling:
    def test_cube_entries_in_open_interval(self):
        pool = sample_pool(FamilyKind.UNIFORM_CUBE, 8, 1000, 3)
        assert pool.shape == (1000, 8)
        assert np.all(np.abs(pool) < 1.0)

    def test_rademacher_entries_are_signs(self):
        pool = sample_pool(FamilyKind.RADEMACHER, 8, 1000, 3)
        assert set(np.unique(pool)) == {-1.0, 1.0}

    def test_sphere_rows_unit_l2(self):
        pool = sample_pool(FamilyKind.UNIT_SPHERE, 8, 500, 3)
        np.testing.assert_allclose(np.linalg.norm(pool, axis=1), 1.0, atol=1e-12)

    def test_lq_rows_unit_lq(self):
        pool = sample_pool(FamilyKind.LQ_SPHERE_EXPERIMENTAL, 8, 500, 3, q=1.5)
        norms = [lp_norm(row, 1.5) for row in pool]
        np.testing.assert_allclose(norms, 1.0, atol=1e-12)

    def test_lq_inf_rows_unit_max(self):
        pool = sample_pool(FamilyKind.LQ_SPHERE_EXPERIMENTAL, 8, 500, 3, q=math.inf)
        np.testing.assert_allclose(np.max(np.abs(pool), axis=1), 1.0, atol=1e-12)

    def test_lq_two_matches_unit_sphere_distribution(self):
        """Cone measure on the Euclidean sphere is the rotation-invariant
        surface measure, so first coordinates of both pools have the same
        distribution; compare their empirical CDFs coarsely."""
        a = sample_pool(FamilyKind.UNIT_SPHERE, 6, 20000, 11)[:, 0]
        b = sample_pool(FamilyKind.LQ_SPHERE_EXPERIMENTAL, 6, 20000, 12, q=2.0)[:, 0]
        quantiles = np.linspace(0.05, 0.95, 19)
        np.testing.assert_allclose(
            np.quantile(a, quantiles), np.quantile(b, quantiles), atol=0.02
        )

    @given(KINDS, st.integers(min_value=1, max_value=20), SEEDS)
    @settings(deadline=4000, max_examples=25)
    def test_prefix_stability(self, kind, d, seed):
        """A longer pool starts with exactly the shorter pool: trial counts
        can grow without changing earlier draws."""
        q = 3.0 if kind is FamilyKind.LQ_SPHERE_EXPERIMENTAL else None
        small = sample_pool(kind, d, 100, seed, q=q)
        large = sample_pool(kind, d, 9000, seed, q=q)
        np.testing.assert_array_equal(large[:100], small)

    def test_q_rejected_for_non_experimental(self):
        with pytest.raises(ValueError):
            sample_pool(FamilyKind.UNIFORM_CUBE, 4, 10, 0, q=2.0)

    def test_q_required_for_experimental(self):
        with pytest.raises(ValueError):
            sample_pool(FamilyKind.LQ_SPHERE_EXPERIMENTAL, 4, 10, 0)


class TestHashEval:
    def test_floor_hand_value(self):
        h = HashFunction(
            kind=FamilyKind.RADEMACHER,
            p=2.0,
            d=2,
            seed=0,
            w=np.array([-1.0, -1.0]),
            scale=cube_scale(2.0, 2),
        )
        # scale = 2^{-1/2}; dot = -1.2; floor(-0.8485...) = -1
        assert hash_eval(h, np.array([0.6, 0.6])) == -1

    def test_positive_floor(self):
        h = HashFunction(
            kind=FamilyKind.RADEMACHER,
            p=2.0,
            d=2,
            seed=0,
            w=np.array([1.0, 1.0]),
            scale=1.0,
        )
        assert hash_eval(h, np.array([1.3, 1.4])) == 2

    @given(PROVEN, EXPONENTS, st.integers(min_value=1, max_value=16), SEEDS)
    @settings(deadline=4000, max_examples=30)
    def test_matrix_matches_scalar(self, kind, p, d, seed):
        h = sample_vector(kind, p, d, seed)
        points = stream(seed, 77).standard_normal((5, d)) * 3.0
        labels = hash_eval_matrix(h.w[None, :], h.scale, points)
        for i in range(5):
            assert labels[i, 0] == hash_eval(h, points[i])


class TestAdjacency:
    @given(
        PROVEN,
        EXPONENTS,
        st.integers(min_value=1, max_value=24),
        SEEDS,
        st.floats(min_value=0.0, max_value=0.999999999),
    )
    @settings(deadline=4000, max_examples=60)
    def test_close_points_land_in_adjacent_buckets(self, kind, p, d, seed, radius):
        """The deterministic guarantee: l_p distance at most 1 moves the
        bucket id by at most 1, for every draw of the hash vector.

        The radius stays a hair under 1 so that rounding in x + offset
        cannot push the realized distance past the contract boundary.
        """
        h = sample_vector(kind, p, d, seed)
        rng = stream(seed, 99)
        x = rng.standard_normal(d) * 5.0
        direction = rng.standard_normal(d)
        norm = lp_norm(direction, p)
        if norm == 0.0:
            direction[0] = 1.0
            norm = 1.0
        y = x + direction * (radius / norm)
        assert adjacency_certificate(h, x, y)
        assert abs(hash_eval(h, x) - hash_eval(h, y)) <= 1

    def test_exact_unit_distance_is_in_contract(self):
        """Distance exactly 1 is inside the closed contract ball."""
        for kind in PROVEN_ADJACENCY_KINDS:
            h = sample_vector(kind, 2.0, 6, 123)
            x = np.zeros(6)
            y = np.zeros(6)
            y[0] = 1.0
            assert adjacency_certificate(h, x, y)

    def test_distant_points_rejected(self):
        h = sample_vector(FamilyKind.UNIFORM_CUBE, 2.0, 4, 0)
        with pytest.raises(ValueError):
            adjacency_certificate(h, np.zeros(4), np.full(4, 2.0))

    def test_experimental_kind_rejected(self):
        h = sample_vector(FamilyKind.LQ_SPHERE_EXPERIMENTAL, 2.0, 4, 0, q=2.0)
        with pytest.raises(ValueError):
            adjacency_certificate(h, np.zeros(4), np.zeros(4))


class TestSerialization:
    @given(KINDS, EXPONENTS, st.integers(min_value=1, max_value=32), SEEDS)
    @settings(deadline=4000, max_examples=30)
    def test_round_trip(self, kind, p, d, seed):
        q = 4.0 if kind is FamilyKind.LQ_SPHERE_EXPERIMENTAL else None
        h = sample_vector(kind, p, d, seed, q=q)
        restored = hash_function_from_bytes(h.to_bytes())
        assert restored == h
        assert restored.to_bytes() == h.to_bytes()

    def test_bad_magic_rejected(self):
        h = sample_vector(FamilyKind.UNIFORM_CUBE, 2.0, 4, 0)
        blob = bytearray(h.to_bytes())
        blob[0] ^= 0xFF
        with pytest.raises(ValueError):
            hash_function_from_bytes(bytes(blob))

    def test_truncated_rejected(self):
        h = sample_vector(FamilyKind.UNIFORM_CUBE, 2.0, 4, 0)
        with pytest.raises(ValueError):
            hash_function_from_bytes(h.to_bytes()[:-5])

    def test_infinite_exponent_round_trips(self):
        h = sample_vector(FamilyKind.UNIT_SPHERE, math.inf, 6, 1)
        restored = hash_function_from_bytes(h.to_bytes())
        assert math.isinf(restored.p)
        assert restored == h


class TestLpSphereBlock:
    @given(
        st.one_of(st.floats(min_value=1.0, max_value=16.0), st.just(math.inf)),
        st.integers(min_value=1, max_value=16),
    )
    @settings(deadline=4000, max_examples=30)
    def test_rows_on_requested_sphere(self, q, d):
        block = lp_sphere_block(stream(5, 0), d, q, 50)
        assert block.shape == (50, d)
        for row in block:
            assert lp_norm(row, q) == pytest.approx(1.0, abs=1e-10)

    def test_sign_symmetry(self):
        block = lp_sphere_block(stream(8, 0), 4, 1.0, 40000)
        assert abs(float(np.mean(block > 0)) - 0.5) < 0.01
