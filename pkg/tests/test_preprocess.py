import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from livertex.preprocess import (HuVolume, WindowSpec, apply_mask, filter_slices,
                                 preprocess_volume, resize_slice, window_hu)

from oracles import bilinear_point


class TestWindowHu:
    def test_range_endpoints(self):
        spec = WindowSpec(-200, 250)
        assert window_hu(np.array([[[-200]]]), spec) == 0.0
        assert window_hu(np.array([[[250]]]), spec) == 1.0

    def test_clamps_below(self):
        assert window_hu(np.array([[[-500]]]), WindowSpec(-200, 250)) == 0.0

    def test_midpoint(self):
        assert window_hu(np.array([[[25]]]), WindowSpec(-200, 250)) == pytest.approx(0.5)

    def test_degenerate_window_rejected(self):
        with pytest.raises(ValueError):
            WindowSpec(100, 100)
        with pytest.raises(ValueError):
            WindowSpec(250, -200)

    @given(hnp.arrays(np.int32, (4, 5, 6), elements=st.integers(-3000, 3000)))
    def test_output_in_unit_interval_and_monotone(self, vox):
        out = window_hu(vox, WindowSpec(-200, 250))
        assert out.min() >= 0.0 and out.max() <= 1.0
        # monotone: adding 10 HU never decreases the windowed value
        out_shifted = window_hu(vox + 10, WindowSpec(-200, 250))
        assert (out_shifted >= out - 1e-7).all()


class TestApplyMask:
    def test_all_ones_identity(self, rng):
        s = rng.random((6, 6)).astype(np.float32)
        assert np.array_equal(apply_mask(s, np.ones_like(s)), s)

    def test_all_zeros(self, rng):
        s = rng.random((6, 6)).astype(np.float32)
        assert not apply_mask(s, np.zeros_like(s)).any()

    def test_checkerboard(self):
        s = np.full((4, 4), 0.8, dtype=np.float32)
        mask = np.indices((4, 4)).sum(axis=0) % 2
        out = apply_mask(s, mask)
        assert np.array_equal(out, np.where(mask != 0, np.float32(0.8), np.float32(0)))

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            apply_mask(np.zeros((3, 3)), np.zeros((3, 4)))


class TestFilterSlices:
    def test_constant_half_retained(self):
        s = np.full((8, 8), 0.5, dtype=np.float32)
        assert filter_slices([s], threshold=5) == [s]

    def test_zero_slice_discarded(self):
        assert filter_slices([np.zeros((8, 8), dtype=np.float32)], threshold=5) == []

    def test_borderline_fraction_retained(self):
        # 1.97% of pixels at 1.0: mean*255 = 0.0197*255 = 5.0235 >= 5
        s = np.zeros(10000, dtype=np.float32)
        s[:197] = 1.0
        s = s.reshape(100, 100)
        assert np.mean(s) * 255 == pytest.approx(5.0235)
        assert len(filter_slices([s], threshold=5)) == 1

    def test_empty_input(self):
        assert filter_slices([], threshold=5) == []

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            filter_slices([], threshold=-1)

    @given(st.lists(st.floats(0, 1), min_size=0, max_size=8), st.floats(0, 50))
    def test_output_is_subsequence(self, means, threshold):
        slices = [np.full((4, 4), m, dtype=np.float32) for m in means]
        kept = filter_slices(slices, threshold=threshold)
        it = iter(slices)
        assert all(any(k is s for s in it) for k in kept)  # order-preserving subsequence


class TestResizeSlice:
    def test_identity_resize(self, rng):
        s = rng.random((224, 224)).astype(np.float32)
        assert np.array_equal(resize_slice(s, 224), np.clip(s, 0, 1))

    def test_constant_stays_constant(self):
        s = np.full((17, 17), 0.3, dtype=np.float32)
        out = resize_slice(s, 50)
        assert out.shape == (50, 50)
        assert np.allclose(out, 0.3, atol=1e-6)

    def test_2x2_to_4_matches_bilinear_formula(self):
        src = np.array([[0.0, 1.0], [0.0, 1.0]], dtype=np.float32)
        out = resize_slice(src, 4)
        expected = np.array([[bilinear_point(src, i / 3, j / 3)
                              for j in range(4)] for i in range(4)])
        assert np.allclose(out, expected, atol=1e-7)
        assert np.allclose(out[:, 0], 0.0)
        assert np.allclose(out[:, 3], 1.0)

    def test_small_target_rejected(self):
        with pytest.raises(ValueError):
            resize_slice(np.zeros((4, 4)), 1)
        with pytest.raises(ValueError):
            resize_slice(np.zeros((4, 4)), 0)

    @given(hnp.arrays(np.float64, (5, 7), elements=st.floats(0, 1)), st.integers(2, 40))
    @settings(max_examples=40)
    def test_values_stay_in_unit_interval(self, src, target):
        out = resize_slice(src, target)
        assert out.shape == (target, target)
        assert out.min() >= 0.0 and out.max() <= 1.0


def _volume_with_means(means, size=32):
    """One slice per entry; HU chosen so the windowed slice mean is the entry."""
    spec = WindowSpec(-200, 250)
    slices = []
    for m in means:
        hu = spec.lo + m * (spec.hi - spec.lo)
        slices.append(np.full((size, size), hu, dtype=np.int32))
    vox = np.stack(slices)
    mask = np.ones_like(vox, dtype=np.uint8)
    return HuVolume(vox, mask, "p0")


class TestPreprocessVolume:
    def test_zero_mask_gives_empty(self):
        vox = np.full((4, 16, 16), 100, dtype=np.int32)
        vol = HuVolume(vox, np.zeros_like(vox, dtype=np.uint8), "p0")
        assert preprocess_volume(vol, target=16) == []

    def test_single_good_slice(self):
        vox = np.full((1, 16, 16), 25, dtype=np.int32)
        vol = HuVolume(vox, np.ones_like(vox, dtype=np.uint8), "p0")
        out = preprocess_volume(vol, target=224)
        assert len(out) == 1
        assert out[0].shape == (224, 224)
        assert np.allclose(out[0], 0.5, atol=1e-6)

    def test_maskless_slices_dropped(self):
        vox = np.full((40, 16, 16), 100, dtype=np.int32)
        mask = np.ones_like(vox, dtype=np.uint8)
        mask[10:20] = 0
        vol = HuVolume(vox, mask, "p0")
        out = preprocess_volume(vol, target=16)
        assert len(out) == 30

    def test_threshold_invariant_on_outputs(self, rng):
        vox = (rng.integers(-300, 300, (12, 20, 20))).astype(np.int32)
        mask = (rng.random((12, 20, 20)) > 0.6).astype(np.uint8)
        vol = HuVolume(vox, mask, "p0")
        for s in preprocess_volume(vol, threshold=5, target=32):
            assert float(np.mean(s)) * 255 >= 5

    def test_slice_axis_respected(self):
        vox = np.full((16, 3, 16), 25, dtype=np.int32)
        vol = HuVolume(vox, np.ones_like(vox, dtype=np.uint8), "p0", slice_axis=1)
        out = preprocess_volume(vol, target=16)
        assert len(out) == 3

    def test_masked_mean_mode_keeps_small_liver(self):
        # a tiny bright region fails the whole-frame mean but passes masked-only
        vox = np.full((1, 50, 50), 25, dtype=np.int32)
        mask = np.zeros_like(vox, dtype=np.uint8)
        mask[0, :2, :2] = 1
        vol = HuVolume(vox, mask, "p0")
        assert preprocess_volume(vol, target=16) == []
        assert len(preprocess_volume(vol, target=16, mean_over_masked_only=True)) == 1


class TestHuVolumeInvariants:
    def test_mask_shape_mismatch(self):
        with pytest.raises(ValueError):
            HuVolume(np.zeros((2, 3, 3)), np.zeros((2, 3, 4)), "p")

    def test_mask_values(self):
        bad = np.full((1, 2, 2), 2, dtype=np.uint8)
        with pytest.raises(ValueError):
            HuVolume(np.zeros((1, 2, 2)), bad, "p")
