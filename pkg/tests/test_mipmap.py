"""Mip pyramid construction, filtered sampling, and the packed atlas."""

import numpy as np
import pytest

import helpers
from lfdrender import mipmap
from lfdrender.kernels import common as kc
from lfdrender.scene import Material


# -------------------------------------------------------------- level counts

@pytest.mark.parametrize("w,h,n", [
    (1, 1, 1), (2, 2, 2), (2, 1, 2), (256, 256, 9), (256, 64, 9),
    (3, 3, 2), (5, 9, 4), (640, 480, 10),
])
def test_level_count(w, h, n):
    assert mipmap.level_count(w, h) == n


def test_pyramid_shapes_halve_to_one():
    pyr = mipmap.build_pyramid(np.zeros((64, 16, 3), dtype=np.float32))
    shapes = [lev.shape[:2] for lev in pyr]
    assert shapes[0] == (64, 16)
    assert shapes[-1] == (1, 1)
    assert len(pyr) == mipmap.level_count(16, 64)
    for (h0, w0), (h1, w1) in zip(shapes, shapes[1:]):
        assert h1 == max(1, (h0 + (h0 % 2 if h0 > 1 else 0)) // 2)
        assert w1 == max(1, (w0 + (w0 % 2 if w0 > 1 else 0)) // 2)


def test_pyramid_top_is_mean_for_pow2():
    rng = np.random.default_rng(3)
    img = rng.random((32, 32, 3), dtype=np.float32)
    pyr = mipmap.build_pyramid(img)
    # box filter over power-of-two dims is an exact running mean
    assert np.allclose(pyr[-1][0, 0], img.mean(axis=(0, 1)), atol=1e-5)


def test_checker_pyramid_converges_to_half_gray():
    img = helpers.checker_array(256, tiles=8, lo=0.0, hi=1.0)
    pyr = mipmap.build_pyramid(img)
    assert np.allclose(pyr[-1], 0.5, atol=1e-6)
    # one level above the tile frequency already averages to 0.5
    assert np.allclose(pyr[6], 0.5, atol=1e-6)


def test_odd_dimension_pyramid_finishes():
    pyr = mipmap.build_pyramid(np.ones((5, 9, 1), dtype=np.float32))
    assert pyr[-1].shape == (1, 1, 1)
    for lev in pyr:
        assert np.allclose(lev, 1.0)


# ----------------------------------------------------------------- sampling

def test_bilinear_at_texel_centers_is_exact():
    rng = np.random.default_rng(5)
    img = rng.random((8, 8, 3), dtype=np.float32)
    ii, jj = np.meshgrid(np.arange(8), np.arange(8), indexing="ij")
    u = (jj.ravel() + 0.5) / 8.0
    v = (ii.ravel() + 0.5) / 8.0
    got = mipmap.sample_bilinear(img, u, v)
    assert np.allclose(got, img[ii.ravel(), jj.ravel()], atol=1e-6)


def test_bilinear_midpoint_average():
    img = np.zeros((1, 2, 1), dtype=np.float32)
    img[0, 0, 0] = 0.0
    img[0, 1, 0] = 1.0
    # halfway between the two texel centers
    got = mipmap.sample_bilinear(img, np.array([0.5]), np.array([0.5]))
    assert got[0, 0] == pytest.approx(0.5, abs=1e-7)


def test_bilinear_repeat_wrap():
    img = np.zeros((1, 4, 1), dtype=np.float32)
    img[0, 0, 0] = 1.0
    # u just left of 0 wraps to the last texel's span
    a = mipmap.sample_bilinear(img, np.array([0.0]), np.array([0.5]))
    b = mipmap.sample_bilinear(img, np.array([1.0]), np.array([0.5]))
    assert a[0, 0] == pytest.approx(b[0, 0], abs=1e-7)
    assert a[0, 0] == pytest.approx(0.5, abs=1e-7)  # mean of texels 3 and 0


def test_trilinear_blends_levels():
    img = np.full((4, 4, 1), 0.0, dtype=np.float32)
    img[::2, ::2] = 1.0
    img[1::2, 1::2] = 1.0  # 2x2 checker, level1 = 0.5 everywhere
    pyr = mipmap.build_pyramid(img)
    at0 = mipmap.sample_trilinear(pyr, 0.125, 0.125, 0.0)
    at1 = mipmap.sample_trilinear(pyr, 0.125, 0.125, 1.0)
    mid = mipmap.sample_trilinear(pyr, 0.125, 0.125, 0.5)
    assert at0[0] == pytest.approx(1.0, abs=1e-6)
    assert at1[0] == pytest.approx(0.5, abs=1e-6)
    assert mid[0] == pytest.approx(0.75, abs=1e-6)
    # lod clamps at both ends
    lo = mipmap.sample_trilinear(pyr, 0.125, 0.125, -3.0)
    hi = mipmap.sample_trilinear(pyr, 0.125, 0.125, 99.0)
    assert lo[0] == pytest.approx(1.0, abs=1e-6)
    assert hi[0] == pytest.approx(0.5, abs=1e-6)


def test_trilinear_array_lod_matches_scalar():
    rng = np.random.default_rng(11)
    img = rng.random((16, 16, 3), dtype=np.float32)
    pyr = mipmap.build_pyramid(img)
    u = rng.random(50)
    v = rng.random(50)
    lod = rng.random(50) * 4.0
    got = mipmap.sample_trilinear(pyr, u, v, lod)
    for k in range(50):
        ref = mipmap.sample_trilinear(pyr, u[k], v[k], float(lod[k]))
        assert np.allclose(got[k], ref, atol=1e-12)


# -------------------------------------------------------------------- atlas

def test_atlas_tables_shape_and_slots():
    m0 = Material(name="tex")
    m0.scalars = m0.scalars.copy()
    m0.textures = {
        "albedo": helpers.checker_array(16, 4, 0.2, 0.8),
        "roughness": np.full((8, 8, 1), 0.5, dtype=np.float32),
    }
    m1 = Material(name="plain")
    atlas = mipmap.build_atlas([m0, m1])
    assert atlas.mat_tex.shape == (2, kc.N_SLOTS)
    assert atlas.mat_scalar.shape == (2, kc.N_CHANNELS)
    assert atlas.mat_tex[0, 0] == 0          # albedo first
    assert atlas.mat_tex[0, 2] == 1          # roughness slot index 2
    assert atlas.mat_tex[0, 1] == -1         # no normal map
    assert np.all(atlas.mat_tex[1] == -1)    # scalar-only material
    assert atlas.texture_size(0) == (16, 16)
    assert atlas.texture_levels(0) == mipmap.level_count(16, 16)
    assert atlas.tex_chan[0] == 3 and atlas.tex_chan[1] == 1


def test_atlas_data_matches_pyramids():
    m = Material(name="t")
    m.textures = {"albedo": helpers.checker_array(8, 2, 0.0, 1.0)}
    atlas = mipmap.build_atlas([m])
    p = int(atlas.lvl_ptr[0])
    for lev_idx, lev in enumerate(atlas.pyramids[0]):
        off = int(atlas.lvl_off[p + lev_idx])
        h, w, c = lev.shape
        flat = atlas.data[off:off + h * w * c].reshape(h, w, c)
        assert np.array_equal(flat, lev)
        assert atlas.lvl_w[p + lev_idx] == w
        assert atlas.lvl_h[p + lev_idx] == h


def test_atlas_grayscale_expands_to_slot_channels():
    m = Material(name="g")
    m.textures = {"albedo": np.full((4, 4), 0.25, dtype=np.float32)}
    atlas = mipmap.build_atlas([m])
    assert atlas.tex_chan[0] == 3
    lev0 = atlas.pyramids[0][0]
    assert lev0.shape == (4, 4, 3)
    assert np.allclose(lev0, 0.25)


def test_atlas_empty_material_list():
    atlas = mipmap.build_atlas([])
    assert atlas.mat_tex.shape[0] == 1
    assert np.all(atlas.mat_tex == -1)
    tables = atlas.kernel_tables()
    assert tables[0].dtype == np.float32
    assert tables[6].dtype == np.int64


def test_kernel_tables_cached_and_typed():
    m = Material(name="t")
    m.textures = {"albedo": helpers.constant_texture(1.0)}
    atlas = mipmap.build_atlas([m])
    t1 = atlas.kernel_tables()
    t2 = atlas.kernel_tables()
    assert all(a is b for a, b in zip(t1, t2))
    data, lvl_ptr, lvl_off, lvl_w, lvl_h, tex_chan, mat_tex, mat_scalar = t1
    assert lvl_w.dtype == np.int64
    assert mat_scalar.dtype == np.float64
