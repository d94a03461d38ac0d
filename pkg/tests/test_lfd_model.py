"""Display model, framing, cameras, and subpixel phase math."""

import math

import numpy as np
import pytest

import helpers
from lfdrender import harness, lfd_model
from lfdrender.lfd_model import LfdConfig, ViewCamera


@pytest.fixture(scope="module")
def desk():
    return LfdConfig.from_file(harness.resolve_display("desk"))


# ------------------------------------------------------------------- config

def test_desk_config_fields(desk):
    assert (desk.panel_width_px, desk.panel_height_px) == (1920, 1080)
    assert (desk.view_width_px, desk.view_height_px) == (480, 360)
    assert desk.view_count == 48
    assert desk.pixel_pitch_mm == pytest.approx(3 * desk.subpixel_pitch_mm)
    assert desk.lens_count * desk.lens_width_mm == pytest.approx(
        desk.screen_width_mm, rel=0.01)


def test_subpixels_per_lens_desk(desk):
    # screen 172.70mm over 239.68 lenses, 0.03mm subpixels
    expect = (172.70 / 239.68) / 0.03
    assert desk.subpixels_per_lens == pytest.approx(expect, rel=1e-12)
    assert desk.subpixels_per_lens == pytest.approx(24.0178, abs=5e-4)


def test_prototype_config_is_double_panel(desk):
    proto = LfdConfig.from_file(harness.resolve_display("prototype"))
    assert proto.panel_width_px == 2 * desk.panel_width_px
    assert proto.panel_height_px == 2 * desk.panel_height_px
    # same phase math: subpixels per lens agree to calibration accuracy
    assert proto.subpixels_per_lens == pytest.approx(
        desk.subpixels_per_lens, rel=2e-3)


def test_config_roundtrip(tmp_path, desk):
    path = tmp_path / "copy.cfg"
    desk.to_file(path)
    again = LfdConfig.from_file(path)
    assert again == desk


def test_config_validation_rejects_bad_pitch(desk):
    from dataclasses import replace

    with pytest.raises(ValueError):
        replace(desk, pixel_pitch_mm=2.5 * desk.subpixel_pitch_mm)
    with pytest.raises(ValueError):
        replace(desk, view_count=0)
    with pytest.raises(ValueError):
        replace(desk, lens_count=2 * desk.lens_count)


def test_with_overrides(desk):
    cfg = desk.with_overrides(view_count=96, view_res=(960, 720))
    assert cfg.view_count == 96
    assert (cfg.view_width_px, cfg.view_height_px) == (960, 720)
    # original untouched
    assert desk.view_count == 48


# --------------------------------------------------------------- subpixel map

def test_phase_period_straight_display():
    cfg = helpers.straight_display()
    x = np.arange(48)
    u = lfd_model.subpixel_view_phase(cfg, x, 0)
    # integral 12-subpixel pitch: phase repeats every 12 subpixels exactly
    assert np.allclose(u[:12], u[12:24])
    v = lfd_model.subpixel_to_view(cfg, x, 0)
    assert np.array_equal(v[:12], np.arange(12))
    assert np.array_equal(v, np.tile(np.arange(12), 4))


def test_tilt_shifts_phase_by_row(desk):
    u0 = lfd_model.subpixel_view_phase(desk, 100, 0)
    u1 = lfd_model.subpixel_view_phase(desk, 100, 1)
    ratio = desk.pixel_pitch_mm / desk.subpixel_pitch_mm
    shift = -math.tan(desk.lens_tilt_rad) * ratio / desk.subpixels_per_lens
    assert float(u1 - u0) == pytest.approx(shift % 1.0, abs=1e-12)


def test_view_indices_in_range(desk):
    xs = np.arange(0, desk.panel_width_px * 3, 7)
    v = lfd_model.subpixel_to_view(desk, xs, 17)
    assert v.min() >= 0 and v.max() < desk.view_count


# ------------------------------------------------------------------- framing

def test_frame_scene_aspect_and_margin(desk):
    framing = lfd_model.frame_scene(desk, (-1, -1, -1), (1, 1, 1), margin=1.1)
    aspect = desk.view_width_px / desk.view_height_px
    assert framing.focal_w / framing.focal_h == pytest.approx(aspect)
    # x-extent 2 fits with 10% margin (y is narrower than x * aspect here)
    assert framing.focal_w == pytest.approx(2.2)
    # similar triangles against the physical display
    scale = framing.focal_w / desk.screen_width_mm
    assert framing.distance == pytest.approx(desk.viewing_distance_mm * scale)
    assert framing.span == pytest.approx(desk.eye_span_mm * scale)
    assert 0.0 < framing.near < framing.distance < framing.far


def test_frame_scene_contains_scene_depth(desk):
    framing = lfd_model.frame_scene(desk, (-1, -1, -5), (1, 1, 1))
    assert framing.far > framing.distance + 5.0


# ------------------------------------------------------------------- cameras

def test_view_positions_fencepost():
    xs = lfd_model.view_positions(48, 300.0)
    assert xs[0] == pytest.approx(-150.0)
    assert xs[-1] == pytest.approx(150.0)
    steps = np.diff(xs)
    assert np.allclose(steps, 300.0 / 47)
    assert np.array_equal(lfd_model.view_positions(1, 300.0), [0.0])


def test_build_view_array_phases(desk):
    framing = lfd_model.frame_scene(desk, (-1, -1, -1), (1, 1, 1))
    cams = lfd_model.build_view_array(desk, framing)
    assert len(cams) == 48
    phases = lfd_model.camera_phases(cams)
    assert np.allclose(phases, (np.arange(48) + 0.5) / 48)
    assert all(c.d == framing.distance for c in cams)


def test_project_zero_parallax_at_focal_plane():
    cams = helpers.simple_cams(n=5, span=2.0)
    for cam in cams:
        sx, sy, zv = cam.project([[0.0, 0.0, 0.0]])
        assert float(sx[0]) == pytest.approx(cam.width / 2)
        assert float(sy[0]) == pytest.approx(cam.height / 2)
        assert float(zv[0]) == pytest.approx(cam.d)


def test_project_parallax_off_plane():
    cams = helpers.simple_cams(n=2, span=2.0)
    # a point in front of the focal plane moves opposite to the eye
    p = [[0.0, 0.0, 1.0]]
    sx0, _, _ = cams[0].project(p)
    sx1, _, _ = cams[1].project(p)
    assert cams[0].ex < cams[1].ex
    assert float(sx0[0]) > float(sx1[0])


def test_unproject_roundtrip():
    cam = helpers.simple_cams(n=3, span=1.0)[0]
    rng = np.random.default_rng(3)
    for n, c in (((0.0, 0.0, 1.0), 0.0), ((0.1, -0.2, 1.0), 0.05)):
        plane_pts = rng.uniform(-0.4, 0.4, size=(8, 3))
        n_arr = np.asarray(n)
        plane_pts[:, 2] = (c - plane_pts[:, 0] * n[0]
                           - plane_pts[:, 1] * n[1]) / n[2]
        sx, sy, _ = cam.project(plane_pts)
        back = cam.unproject_to_plane(sx, sy, n_arr, c)
        assert np.allclose(back, plane_pts, atol=1e-9)


def test_frustum_planes_sign_convention():
    cam = helpers.simple_cams(n=3, span=1.0)[1]
    planes = cam.frustum_planes()
    assert np.all(planes @ np.array([0.0, 0.0, 0.0, 1.0]) >= 0)
    # behind the eye -> outside the near plane
    behind = np.array([0.0, 0.0, cam.d + 1.0, 1.0])
    assert np.any(planes @ behind < 0)
    # corners of the focal rectangle are on the boundary (distance ~ 0)
    corner = np.array([cam.fw / 2, cam.fh / 2, 0.0, 1.0])
    dists = planes @ corner
    assert np.min(dists) > -1e-9


def test_jittered_view_array_properties(desk):
    framing = lfd_model.frame_scene(desk, (-1, -1, -1), (1, 1, 1))
    cams = lfd_model.build_jittered_view_array(desk, framing, 2, seed=7)
    assert len(cams) == 96
    phases = lfd_model.camera_phases(cams)
    assert np.all(np.diff(phases) >= 0)
    assert phases.min() >= 0 and phases.max() < 1
    # one sample in each half-interval of each view interval
    counts = np.bincount((phases * 48).astype(int), minlength=48)
    assert np.all(counts == 2)
    # seeded: same seed reproduces, different seed does not
    again = lfd_model.build_jittered_view_array(desk, framing, 2, seed=7)
    assert np.array_equal(lfd_model.camera_phases(again), phases)
    other = lfd_model.build_jittered_view_array(desk, framing, 2, seed=8)
    assert not np.array_equal(lfd_model.camera_phases(other), phases)
