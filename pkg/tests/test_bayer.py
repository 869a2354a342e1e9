"""Bayer mask, mosaic, lift and masking operator algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jddip.bayer import DimensionError, apply_mask, lift, make_mask, mosaic


def random_rgb(rng, h=8, w=8):
    return rng.uniform(size=(h, w, 3))


even_dims = st.integers(min_value=1, max_value=16).map(lambda n: 2 * n)


class TestMakeMask:
    def test_single_tile(self):
        mask = make_mask(2, 2)
        expected = np.zeros((2, 2, 3))
        expected[0, 0, 0] = 1  # R
        expected[0, 1, 1] = 1  # G
        expected[1, 0, 1] = 1  # G
        expected[1, 1, 2] = 1  # B
        assert np.array_equal(mask, expected)

    def test_tiling(self):
        tile = make_mask(2, 2)
        mask = make_mask(4, 4)
        assert np.array_equal(mask, np.tile(tile, (2, 2, 1)))

    def test_one_observation_per_pixel(self):
        assert make_mask(6, 8).sum() == 48

    @pytest.mark.parametrize("h,w", [(3, 4), (4, 3), (0, 2), (-2, 4)])
    def test_rejects_bad_dims(self, h, w):
        with pytest.raises(DimensionError):
            make_mask(h, w)

    @given(even_dims, even_dims)
    def test_partition_property(self, h, w):
        mask = make_mask(h, w)
        assert np.array_equal(mask.sum(axis=2), np.ones((h, w)))
        assert set(np.unique(mask)) <= {0.0, 1.0}


class TestMosaic:
    def test_constant_image(self):
        rgb = np.full((2, 2, 3), 0.5)
        assert np.array_equal(mosaic(rgb), np.full((2, 2), 0.5))

    def test_channel_selection(self):
        rgb = np.zeros((2, 2, 3))
        rgb[:, :, 0] = 1.0
        assert np.array_equal(mosaic(rgb), np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_matches_mask_multiply_and_sum(self):
        rgb = random_rgb(np.random.default_rng(7), 4, 4)
        expected = (rgb * make_mask(4, 4)).sum(axis=2)
        assert np.array_equal(mosaic(rgb), expected)

    def test_rejects_odd_dims(self):
        with pytest.raises(DimensionError):
            mosaic(np.zeros((3, 4, 3)))


class TestLift:
    def test_projection_identity(self):
        rgb = random_rgb(np.random.default_rng(1))
        assert np.array_equal(lift(mosaic(rgb)), rgb * make_mask(8, 8))

    def test_ones_propagate_to_mask(self):
        assert np.array_equal(lift(np.ones((2, 2))), make_mask(2, 2))

    def test_round_trip_exact(self):
        raw = np.random.default_rng(2).uniform(size=(8, 8))
        assert np.array_equal(mosaic(lift(raw)), raw)

    @given(even_dims, even_dims, st.integers(0, 2**32 - 1))
    @settings(max_examples=25)
    def test_round_trip_property(self, h, w, seed):
        raw = np.random.default_rng(seed).uniform(size=(h, w))
        lifted = lift(raw)
        assert np.array_equal(mosaic(lifted), raw)
        # summation order differs (extra zeros), so exactness is ulp-level
        assert lifted.sum() == pytest.approx(raw.sum(), rel=1e-14)


class TestApplyMask:
    def test_idempotent_on_lifted(self):
        raw = np.random.default_rng(3).uniform(size=(4, 4))
        mask = make_mask(4, 4)
        lifted = lift(raw)
        assert np.array_equal(apply_mask(lifted, mask), lifted)

    def test_zeros_off_bayer(self):
        rng = np.random.default_rng(4)
        dense = random_rgb(rng, 4, 4)
        mask = make_mask(4, 4)
        masked = apply_mask(dense, mask)
        assert np.all(masked[mask == 0] == 0)
        assert np.array_equal(masked[mask == 1], dense[mask == 1])

    def test_double_application(self):
        rng = np.random.default_rng(5)
        dense = random_rgb(rng, 6, 6)
        mask = make_mask(6, 6)
        once = apply_mask(dense, mask)
        assert np.array_equal(apply_mask(once, mask), once)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            apply_mask(np.zeros((4, 4, 3)), make_mask(6, 6))
