import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import hsv_to_rgb, naive_box
from rgbdseg.imgcore import (
    DEFAULT_INTRINSICS,
    CameraIntrinsics,
    NoDepthError,
    as_depth,
    backproject,
    backproject_many,
    box_mean,
    box_sum,
    box_sums,
    build_integral,
    project,
    rgb_to_hsv,
)


def px(rgb):
    return rgb_to_hsv(np.array([[rgb]], dtype=np.uint8))[0, 0]


@pytest.mark.parametrize(
    "rgb, hsv",
    [
        ((255, 0, 0), (0, 1, 1)),
        ((128, 128, 128), (0, 0, 128 / 255)),
        ((0, 255, 255), (180, 1, 1)),
        ((0, 255, 0), (120, 1, 1)),
        ((0, 0, 255), (240, 1, 1)),
        ((0, 0, 0), (0, 0, 0)),
    ],
)
def test_hsv_examples(rgb, hsv):
    np.testing.assert_allclose(px(rgb), hsv, atol=1e-12)


def test_hsv_ranges_and_dtype():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, (20, 30, 3), dtype=np.uint8)
    hsv = rgb_to_hsv(img)
    assert hsv.dtype == np.float64 and hsv.shape == img.shape
    assert (hsv[..., 0] >= 0).all() and (hsv[..., 0] < 360).all()
    assert (hsv[..., 1:] >= 0).all() and (hsv[..., 1:] <= 1).all()


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, (6, 7, 3)))
def test_hsv_round_trip(img):
    back = hsv_to_rgb(rgb_to_hsv(img))
    assert np.abs(back - img).max() <= 1.0 + 1e-9


def test_rgb_shape_checked():
    with pytest.raises(ValueError):
        rgb_to_hsv(np.zeros((4, 4)))


def test_depth_validation():
    with pytest.raises(ValueError):
        as_depth(np.array([[1.0, -0.5]]))
    with pytest.raises(ValueError):
        as_depth(np.array([[np.nan]]))


def test_integral_examples():
    t = build_integral(np.ones((2, 2))).table
    assert t[2, 2] == 4
    assert (t[0] == 0).all() and (t[:, 0] == 0).all()
    assert not build_integral(np.zeros((3, 4))).table.any()


def test_integral_all_subrectangles():
    rng = np.random.default_rng(0)
    src = rng.random((5, 5))
    t = build_integral(src).table
    for y0 in range(6):
        for y1 in range(y0, 6):
            for x0 in range(6):
                for x1 in range(x0, 6):
                    s = t[y1, x1] - t[y0, x1] - t[y1, x0] + t[y0, x0]
                    assert abs(s - src[y0:y1, x0:x1].sum()) < 1e-12


def test_integral_monotone_for_nonnegative():
    t = build_integral(np.random.default_rng(1).random((9, 11))).table
    assert (np.diff(t, axis=0) >= 0).all() and (np.diff(t, axis=1) >= 0).all()


def test_box_sum_examples():
    ii = build_integral(np.ones((5, 5)))
    assert box_sum(ii, (2, 2), 1) == (9.0, 9)
    assert box_sum(ii, (0, 0), 1) == (4.0, 4)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
              elements=st.floats(0, 100, allow_nan=False)))
def test_box_sum_exhaustive(src):
    ii = build_integral(src)
    h, w = src.shape
    for r in range(4):
        sums, areas = box_sums(ii, r)
        for y in range(h):
            for x in range(w):
                s, c = naive_box(src, y, x, r)
                got = box_sum(ii, (y, x), r)
                assert got[1] == c and areas[y, x] == c
                assert abs(got[0] - s) <= 1e-9 * max(1.0, abs(s))
                assert abs(sums[y, x] - s) <= 1e-9 * max(1.0, abs(s))


def test_box_sums_per_pixel_radius():
    rng = np.random.default_rng(2)
    src = rng.random((7, 9))
    radius = rng.integers(0, 4, src.shape)
    sums, areas = box_sums(build_integral(src), radius)
    for y in range(7):
        for x in range(9):
            s, c = naive_box(src, y, x, radius[y, x])
            assert areas[y, x] == c and abs(sums[y, x] - s) < 1e-12


def test_box_mean_constant():
    np.testing.assert_allclose(box_mean(np.full((6, 6), 2.5), 2), 2.5)


def test_missing_count_integral():
    d = np.array([[0, 1.0], [2.0, 0]])
    assert build_integral(d, mask_zero_as_missing=True).table[2, 2] == 2


def test_backproject_examples():
    K = DEFAULT_INTRINSICS
    np.testing.assert_allclose(backproject((K.cy, K.cx), 1.0, K), [0, 0, 1])
    np.testing.assert_allclose(backproject((K.cy, K.cx + K.fx), 2.0, K), [2, 0, 2])
    with pytest.raises(NoDepthError):
        backproject((3, 4), 0.0, K)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 479), st.floats(0, 639), st.floats(0.1, 20))
def test_backproject_project_round_trip(y, x, d):
    K = DEFAULT_INTRINSICS
    py, px_ = project(backproject((y, x), d, K), K)
    assert abs(py - y) < 1e-9 and abs(px_ - x) < 1e-9


def test_backproject_many_matches_single():
    K = CameraIntrinsics(300.0, 310.0, 100.0, 80.0)
    ys, xs, ds = np.array([1, 50]), np.array([7, 120]), np.array([0.5, 2.0])
    pts = backproject_many(ys, xs, ds, K)
    for k in range(2):
        np.testing.assert_allclose(pts[k], backproject((ys[k], xs[k]), ds[k], K))


def test_intrinsics_validation_and_scaling():
    with pytest.raises(ValueError):
        CameraIntrinsics(0, 1, 0, 0)
    half = DEFAULT_INTRINSICS.scaled(0.5)
    assert half.fx == 262.5 and half.cx == 159.5 and half.cy == 119.5
