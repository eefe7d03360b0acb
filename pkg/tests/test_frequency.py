import numpy as np
import pytest

from hsfpn import (
    DegenerateBackgroundError,
    FilterSpec,
    ScrWindows,
    ValidationError,
    blob_scene,
    dct2,
    filter_plane,
    highfreq_response,
    highpass_mask,
    idct2,
    lowcut_mask,
    scr,
    scr_filter_sweep,
)

from oracles import naive_dct2_plane, naive_idct2_plane

RNG = np.random.default_rng(99)


class TestDct2:
    def test_constant_plane_dc_only(self):
        c, h, w = 0.7, 6, 9
        plane = np.full((h, w), c, np.float32)
        coeffs = dct2(plane)
        assert coeffs[0, 0] == pytest.approx(c * np.sqrt(h * w), abs=1e-5)
        rest = coeffs.copy()
        rest[0, 0] = 0.0
        assert np.abs(rest).max() <= 1e-5

    def test_roundtrip_random_plane(self):
        x = RNG.standard_normal((8, 8)).astype(np.float32)
        np.testing.assert_allclose(idct2(dct2(x)), x, atol=1e-5)

    def test_impulse_matches_direct_sum(self):
        plane = np.zeros((4, 4), np.float32)
        plane[0, 0] = 1.0
        np.testing.assert_allclose(dct2(plane), naive_dct2_plane(plane), atol=1e-6)

    def test_random_4x4_matches_direct_sum(self):
        plane = RNG.standard_normal((4, 4)).astype(np.float32)
        np.testing.assert_allclose(dct2(plane), naive_dct2_plane(plane), atol=1e-6)

    def test_rectangular_matches_direct_sum(self):
        plane = RNG.standard_normal((5, 7)).astype(np.float32)
        np.testing.assert_allclose(dct2(plane), naive_dct2_plane(plane), atol=1e-6)

    def test_parseval(self):
        x = RNG.standard_normal((1, 3, 16, 12)).astype(np.float32)
        before = np.square(x.astype(np.float64)).sum()
        after = np.square(dct2(x).astype(np.float64)).sum()
        assert after == pytest.approx(before, rel=1e-4)

    def test_linear(self):
        x = RNG.standard_normal((8, 8)).astype(np.float32)
        y = RNG.standard_normal((8, 8)).astype(np.float32)
        lhs = dct2(2.5 * x + 0.5 * y)
        rhs = 2.5 * dct2(x) + 0.5 * dct2(y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-5)

    def test_4d_acts_per_plane(self):
        x = RNG.standard_normal((2, 3, 6, 6)).astype(np.float32)
        out = dct2(x)
        np.testing.assert_allclose(out[1, 2], dct2(x[1, 2]), atol=1e-7)


class TestIdct2:
    def test_zeros(self):
        np.testing.assert_array_equal(idct2(np.zeros((5, 5), np.float32)), np.zeros((5, 5)))

    def test_forward_roundtrip(self):
        y = RNG.standard_normal((8, 8)).astype(np.float32)
        np.testing.assert_allclose(dct2(idct2(y)), y, atol=1e-5)

    def test_single_coefficient_profile(self):
        coeffs = np.zeros((4, 4), np.float32)
        coeffs[1, 0] = 1.0
        np.testing.assert_allclose(idct2(coeffs), naive_idct2_plane(coeffs), atol=1e-6)


class TestHighpassMask:
    def test_alpha_zero_all_ones(self):
        np.testing.assert_array_equal(highpass_mask(6, 8, 0.0), np.ones((6, 8), np.float32))

    def test_alpha_one_all_zeros(self):
        np.testing.assert_array_equal(highpass_mask(6, 8, 1.0), np.zeros((6, 8), np.float32))

    def test_quarter_on_8x8(self):
        mask = highpass_mask(8, 8, 0.25)
        expected = np.ones((8, 8), np.float32)
        expected[:2, :2] = 0.0
        np.testing.assert_array_equal(mask, expected)

    def test_real_valued_threshold(self):
        # alpha*h = 2.5 on h = 10: indices 0, 1, 2 fall below the threshold
        mask = highpass_mask(10, 10, 0.25)
        assert (mask[:3, :3] == 0).all()
        assert mask[3, 0] == 1 and mask[0, 3] == 1

    def test_monotone_in_alpha(self):
        alphas = np.linspace(0.0, 1.0, 21)
        prev = highpass_mask(13, 11, float(alphas[0]))
        for a in alphas[1:]:
            cur = highpass_mask(13, 11, float(a))
            assert (prev >= cur).all()
            prev = cur

    def test_alpha_out_of_range(self):
        with pytest.raises(ValidationError):
            highpass_mask(4, 4, 1.5)

    def test_lowcut_mask_region(self):
        mask = lowcut_mask(6, 6, 2, 3)
        assert mask[:2, :3].sum() == 0
        assert mask.sum() == 36 - 6


class TestHighfreqResponse:
    def test_alpha_zero_identity(self):
        x = RNG.standard_normal((1, 2, 8, 8)).astype(np.float32)
        spec = FilterSpec(alpha=0.0)
        np.testing.assert_allclose(highfreq_response(x, spec, 2), x, atol=1e-5)

    def test_alpha_one_blocks_everything(self):
        x = RNG.standard_normal((1, 2, 8, 8)).astype(np.float32)
        spec = FilterSpec(alpha=1.0)
        assert np.abs(highfreq_response(x, spec, 2)).max() <= 1e-5

    def test_disabled_level_bitwise_identical(self):
        x = RNG.standard_normal((1, 3, 8, 8)).astype(np.float32)
        spec = FilterSpec(alpha=0.5)  # levels 4, 5 disabled by default
        out = highfreq_response(x, spec, 4)
        assert out.tobytes() == x.tobytes()

    def test_enabled_level_changes_values(self):
        x = RNG.standard_normal((1, 1, 8, 8)).astype(np.float32)
        spec = FilterSpec(alpha=0.5)
        assert not np.allclose(highfreq_response(x, spec, 2), x, atol=1e-3)

    def test_idempotent_projection(self):
        x = RNG.standard_normal((1, 2, 12, 12)).astype(np.float32)
        spec = FilterSpec(alpha=0.3)
        once = highfreq_response(x, spec, 2)
        twice = highfreq_response(once, spec, 2)
        np.testing.assert_allclose(twice, once, atol=1e-5)

    def test_preserves_dims(self):
        x = RNG.standard_normal((2, 3, 10, 14)).astype(np.float32)
        assert highfreq_response(x, FilterSpec(alpha=0.4), 3).shape == x.shape


class TestScr:
    def test_constant_target_known_ratio(self):
        # target window constant 10 over a background with mean 2, std 2
        rng = np.random.default_rng(5)
        img = rng.normal(2.0, 2.0, size=(100, 100)).astype(np.float32)
        win = ScrWindows(target_center=(50, 50), target_extent=40, neighborhood_extent=80)
        trs, tcs = win.target_slice(100, 100)
        img[trs, tcs] = 10.0
        nrs, ncs = win.neighborhood_slice(100, 100)
        ann = np.zeros(img.shape, bool)
        ann[nrs, ncs] = True
        ann[trs, tcs] = False
        expected = abs(10.0 - img[ann].mean()) / img[ann].std()
        assert scr(img, win) == pytest.approx(expected, rel=1e-6)
        assert scr(img, win) == pytest.approx(4.0, rel=0.1)

    def test_zero_when_means_match(self):
        img = np.zeros((60, 60), np.float32)
        win = ScrWindows(target_center=(30, 30), target_extent=10, neighborhood_extent=20)
        img[::2, ::2] += 1.0  # structured background, same mean everywhere
        img[25:35, 25:35] = img[25:35, 25:35]  # target untouched
        val = scr(img, win)
        assert val == pytest.approx(0.0, abs=1e-6)

    def test_constant_shift_invariant(self):
        img = RNG.uniform(size=(64, 64)).astype(np.float32)
        win = ScrWindows(target_center=(32, 32), target_extent=8, neighborhood_extent=24)
        a = scr(img, win)
        b = scr(img + 3.0, win)
        assert a == pytest.approx(b, rel=1e-4)

    def test_degenerate_background(self):
        img = np.zeros((50, 50), np.float32)
        img[20:30, 20:30] = 1.0
        win = ScrWindows(target_center=(25, 25), target_extent=10, neighborhood_extent=30)
        with pytest.raises(DegenerateBackgroundError):
            scr(img, win)

    def test_window_validation(self):
        with pytest.raises(ValidationError):
            ScrWindows(target_center=(5, 5), target_extent=10, neighborhood_extent=10)
        with pytest.raises(ValidationError):
            ScrWindows(target_center=(5, 5), target_extent=0, neighborhood_extent=10)

    def test_windows_clamped_at_border(self):
        img = RNG.uniform(size=(40, 40)).astype(np.float32)
        win = ScrWindows(target_center=(2, 2), target_extent=10, neighborhood_extent=20)
        assert np.isfinite(scr(img, win))


class TestSweepTrend:
    def test_rise_then_fall_on_blob_scene(self):
        scene = blob_scene()
        win = ScrWindows(target_center=(50, 50))
        cuts = [(c, c) for c in list(range(0, 13)) + list(range(16, 61, 4))]
        rows = scr_filter_sweep(scene, win, cuts)
        vals = [v for _, _, v in rows]
        peak = int(np.argmax(vals))
        assert 0 < peak < len(vals) - 1
        assert vals[peak] > 2.0 * vals[0]
        assert vals[-1] < 0.25 * vals[peak]
        assert vals[-1] < vals[0]

    def test_zero_cut_is_identity(self):
        scene = blob_scene()
        win = ScrWindows(target_center=(50, 50))
        rows = scr_filter_sweep(scene, win, [(0, 0)])
        assert rows[0][2] == pytest.approx(scr(scene, win), rel=1e-5)


class TestFilterPlane:
    def test_mask_shape_checked(self):
        with pytest.raises(Exception):
            filter_plane(RNG.uniform(size=(8, 8)).astype(np.float32), np.ones((4, 4), np.float32))

    def test_full_mask_identity(self):
        plane = RNG.uniform(size=(10, 10)).astype(np.float32)
        out = filter_plane(plane, np.ones((10, 10), np.float32))
        np.testing.assert_allclose(out, plane, atol=1e-5)
