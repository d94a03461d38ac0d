"""Acceptance suite: one test per shipping criterion, at stated tolerances.

Each test is self-describing and prints the measured numbers it judges.
The desk-display fixtures render the three bundled scenes end to end at
full comparison scale (48 views at 480x360), so this file is the slowest
in the suite by design — it reproduces the full evaluation methodology.
"""

import dataclasses
import os
import time

import numpy as np
import pytest

import helpers
from lfdrender import assets, eia, harness, lfd_model, mipmap, pointgen
from lfdrender import metrics, scene, splat_render
from lfdrender.eia import ReconstructionConfig, deinterleave, interleave
from lfdrender.harness import RunConfig, resolve_display
from lfdrender.splat_render import ViewBuffer

SCENES = ("hall", "rotor", "quad")
TEXTURED_SCENES = ("hall", "quad")


# ------------------------------------------------------------------ fixtures

@pytest.fixture(scope="session")
def desk_runs(tmp_path_factory):
    """Both renderers on every bundled scene at full desk comparison scale."""
    root = tmp_path_factory.mktemp("desk_runs")
    runs = {}
    for scene_name in SCENES:
        for renderer in ("lfdpr", "mvr"):
            out = root / f"{scene_name}_{renderer}"
            cfg = RunConfig(scene=scene_name, out_dir=str(out),
                            display="desk", renderer=renderer, recon="none",
                            frames=3, workers=4)
            runs[(scene_name, renderer)] = harness.run(cfg)
    return runs


@pytest.fixture(scope="session")
def quality_runs(tmp_path_factory):
    """Reconstruction-filtered runs plus gold standards for quality tests."""
    root = tmp_path_factory.mktemp("quality_runs")
    spec = {
        "hall_lfdpr": dict(scene="hall", renderer="lfdpr",
                           recon="view_spatial"),
        "hall_lfdpr_nomip": dict(scene="hall", renderer="lfdpr",
                                 recon="view_spatial", mipmap=False),
        "hall_mvr": dict(scene="hall", renderer="mvr", recon="view_spatial"),
        "hall_gstd": dict(scene="hall", renderer="gstd"),
        "quad_lfdpr": dict(scene="quad", renderer="lfdpr",
                           recon="view_spatial"),
        "quad_mvr": dict(scene="quad", renderer="mvr", recon="view_spatial"),
        "quad_gstd": dict(scene="quad", renderer="gstd"),
    }
    runs = {}
    for name, kw in spec.items():
        cfg = RunConfig(out_dir=str(root / name), display="desk", frames=1,
                        workers=4, **kw)
        runs[name] = harness.run(cfg)
    return runs


# ----------------------------------------------------------------- criteria

def test_c01_view_buffer_memory_exact():
    # one 480x360 packed buffer is exactly 1,382,400 bytes; the 48-view desk
    # set is exactly 66,355,200 bytes; a point record stays within 80 bytes
    t0 = time.perf_counter()
    buffers = [ViewBuffer.allocate(480, 360) for _ in range(48)]
    assert buffers[0].words.nbytes == 1_382_400
    assert buffers[0].words.dtype == np.uint64
    assert sum(b.words.nbytes for b in buffers) == 66_355_200
    assert pointgen.RECORD_DTYPE.itemsize <= 80
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"memory accounting took {elapsed:.3f}s"


def test_c02_geometry_stage_invocation_ratio(tmp_path):
    # the rasterizer submits every triangle to every view; the point pipeline
    # touches each triangle once per frame -> exact factor V for any V
    invocations = {}
    for v_count in (2, 48, 96):
        for renderer in ("lfdpr", "mvr"):
            out = tmp_path / f"v{v_count}_{renderer}"
            cfg = RunConfig(scene="quad", out_dir=str(out), display="desk",
                            renderer=renderer, recon="none", frames=1,
                            workers=2, views=v_count, view_res=(64, 48))
            res = harness.run(cfg)
            invocations[(v_count, renderer)] = \
                res.results["geometry_invocations_per_frame"]
    for v_count in (2, 48, 96):
        lfdpr = invocations[(v_count, "lfdpr")]
        mvr = invocations[(v_count, "mvr")]
        assert lfdpr > 0
        assert mvr == v_count * lfdpr, \
            f"V={v_count}: rasterizer {mvr} != {v_count} x {lfdpr}"


def test_c03_order_and_worker_invariance(desk_runs, tmp_path):
    # point order and worker count must not leak into the rendered bits
    base = desk_runs[("quad", "lfdpr")]

    def eia_bytes(run_dir):
        with open(os.path.join(run_dir, "eia.png"), "rb") as fh:
            return fh.read()

    ref_bytes = eia_bytes(base.out_dir)
    for workers in (1, 8):  # the fixture run used workers=4
        out = tmp_path / f"w{workers}"
        harness.run(RunConfig(scene="quad", out_dir=str(out), display="desk",
                              renderer="lfdpr", recon="none", frames=1,
                              workers=workers))
        assert eia_bytes(str(out)) == ref_bytes, f"workers={workers}"

    # record-shuffle invariance on the full desk view set
    display = lfd_model.LfdConfig.from_file(resolve_display("desk"))
    mesh, _anim = assets.load_scene_any("quad")
    framing = lfd_model.frame_scene(display, mesh.tri_pos.min(axis=(0, 1)),
                                    mesh.tri_pos.max(axis=(0, 1)))
    cams = lfd_model.build_view_array(display, framing)
    tess = scene.tessellate(mesh, cams, max_pixels=100.0)
    atlas = mipmap.build_atlas(tess.materials)
    cloud = pointgen.generate_points(tess, cams, atlas)
    perm = np.random.default_rng(11).permutation(cloud.n_points)
    shuffled = dataclasses.replace(cloud, records=cloud.records[perm].copy())
    ref = splat_render.render_views(cloud, cams, workers=1)
    got = splat_render.render_views(shuffled, cams, workers=8)
    for v in range(len(cams)):
        assert np.array_equal(got[v].words, ref[v].words), f"view {v}"


def test_c04_hole_free_coverage_agreement(desk_runs):
    # splatting must tile the surfaces it claims: per-view written-pixel
    # agreement with the rasterizer >= 0.999 after 1-pixel erosion
    worst = {}
    for scene_name in SCENES:
        ma = desk_runs[(scene_name, "lfdpr")].masks
        mb = desk_runs[(scene_name, "mvr")].masks
        assert ma is not None and mb is not None and ma.shape == mb.shape
        per_view = [metrics.coverage_agreement(ma[v], mb[v], erode=1)
                    for v in range(ma.shape[0])]
        worst[scene_name] = min(per_view)
        assert ma.shape[0] == 48
        assert worst[scene_name] >= 0.999, \
            f"{scene_name}: worst view agreement {worst[scene_name]:.6f}"
    print(f"[c04] worst per-view coverage agreement: {worst}")


def test_c05_sampling_density_analytic_counts():
    # dyadic probe: focal-plane unit quad under power-of-two cameras makes
    # every quantity exact, so emitted counts must track the closed form
    cams = helpers.simple_cams(3, d=4.0, fw=2.0, fh=2.0, near=0.1, far=10.0,
                               width=256, height=256, span=1.0)

    def build(tex_size):
        textures = None
        if tex_size:
            textures = {"albedo": helpers.checker_array(tex_size, 8)}
        mat = helpers.flat_material(textures=textures)
        mesh = helpers.quad_mesh(1.0, 1.0, 0.0, 1.0, material=mat)
        atlas = mipmap.build_atlas(mesh.materials)
        setup = pointgen.triangle_setup(mesh, cams, atlas)
        cloud = pointgen.generate_points(mesh, cams, atlas)
        return setup, cloud

    plain_setup, plain = build(None)
    assert np.all(plain_setup.size_xy == 2.0 ** -14)
    assert np.all(plain_setup.density == 128.0)
    assert np.all(plain_setup.ncell == 256)
    assert not plain_setup.reduced.any()
    analytic = 256 * 256
    measured = plain.n_points
    assert abs(measured - analytic) <= 0.10 * analytic, (measured, analytic)

    # texture coarser than the view sampling: density drops by the area ratio
    coarse_setup, coarse = build(64)
    assert np.all(coarse_setup.size_uv == 2.0 ** -10)
    assert coarse_setup.reduced.all()
    assert np.all(coarse_setup.density == 32.0)
    assert np.all(coarse_setup.ncell == 64)
    analytic_c = 64 * 64
    assert abs(coarse.n_points - analytic_c) <= 0.10 * analytic_c, \
        (coarse.n_points, analytic_c)

    # branch boundary: texel area exactly equals pixel area -> no reduction,
    # emission bitwise identical to the untextured quad
    edge_setup, edge = build(256)
    assert np.all(edge_setup.size_uv == edge_setup.size_xy)
    assert not edge_setup.reduced.any()
    assert edge.n_points == plain.n_points
    assert np.array_equal(edge.records["pos"], plain.records["pos"])
    assert np.array_equal(edge.records["uv"], plain.records["uv"])
    print(f"[c05] counts: plain {measured}/{analytic}, "
          f"coarse {coarse.n_points}/{analytic_c}, boundary unchanged")


def test_c06_texture_band_containment():
    # texture level band per emitted point, and the per-view interpolated
    # texture values the splatter actually shades with
    mesh = helpers.random_triangle_mesh(10_000, seed=42)
    cams = helpers.simple_cams(4, width=128, height=96)
    atlas = mipmap.build_atlas(mesh.materials)

    setup = pointgen.triangle_setup(mesh, cams, atlas)
    act = setup.active.astype(bool)
    assert act.sum() > 4_000  # random winding backface-culls roughly half
    assert np.all(setup.band[act, 0] <= setup.band[act, 1])
    assert np.all(setup.lodmin[act] <= setup.lodmax[act])

    cloud = pointgen.generate_points(mesh, cams, atlas)
    rec = cloud.records
    assert rec.shape[0] >= act.sum()          # every active triangle emits
    assert np.all(rec["band"][:, 0] <= rec["band"][:, 1])

    # shading probe that passes albedo through untouched: zero light color,
    # unit ambient (AO is scalar 1 here), so pixel = quantized albedo value
    probe = np.array([0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
    tvmin = rec["tvmin"].astype(np.float64)
    tvmax = rec["tvmax"].astype(np.float64)
    lo = np.minimum(tvmin, tvmax)[:, 0:3]
    hi = np.maximum(tvmin, tvmax)[:, 0:3]
    lo8 = np.trunc(np.clip(lo, 0.0, 1.0) * 255.0 + 0.5).astype(np.int64)
    hi8 = np.trunc(np.clip(hi, 0.0, 1.0) * 255.0 + 0.5).astype(np.int64)

    sample = np.random.default_rng(7).choice(rec.shape[0], size=200,
                                             replace=False)
    # probe at finer raster: the splats keep their world size, so each one
    # covers more pixel centers, giving the bound more samples to bite on
    fine = helpers.simple_cams(4, width=256, height=192)
    probe_cams = [fine[0], fine[1], fine[3]]
    covered_total = 0
    for idx in sample:
        single = dataclasses.replace(cloud, records=rec[idx:idx + 1])
        bufs = splat_render.render_views(single, probe_cams, probe)
        for buf in bufs:
            mask = buf.coverage_mask()
            if not mask.any():
                continue
            covered_total += int(mask.sum())
            rgb = buf.rgb8()[mask].astype(np.int64)
            assert np.all(rgb >= lo8[idx][None, :]), idx
            assert np.all(rgb <= hi8[idx][None, :]), idx
    assert covered_total > 1_000  # the probe actually exercised the splatter

    # single view: the band degenerates and the minimum-level value is used
    # exactly — corrupting the other band end cannot change a single bit
    mesh1 = helpers.random_triangle_mesh(2_000, seed=43)
    cam1 = helpers.simple_cams(1, width=160, height=120)
    atlas1 = mipmap.build_atlas(mesh1.materials)
    cloud1 = pointgen.generate_points(mesh1, cam1, atlas1)
    band1 = cloud1.records["band"]
    assert np.array_equal(band1[:, 0], band1[:, 1])
    ref = splat_render.render_views(cloud1, cam1, probe)[0].words
    corrupted = cloud1.records.copy()
    corrupted["tvmax"] = np.float16(37.0)
    got = splat_render.render_views(
        dataclasses.replace(cloud1, records=corrupted), cam1, probe)[0].words
    assert np.array_equal(got, ref)


def test_c07_mipmap_band_improves_eia_quality(quality_runs):
    # on the tiled-texture hall the level band must cut the gap to the
    # supersampled gold standard versus running with the band disabled
    gstd = quality_runs["hall_gstd"].eia_image
    with_band = metrics.rmse(quality_runs["hall_lfdpr"].eia_image, gstd)
    without = metrics.rmse(quality_runs["hall_lfdpr_nomip"].eia_image, gstd)
    print(f"[c07] EIA RMSE vs gold standard: mipmap {with_band:.3f}, "
          f"no mipmap {without:.3f}")
    assert with_band < without, (with_band, without)


def test_c08_quality_gap_vs_rasterizer(quality_runs):
    # point splatting must stay within the stated quality envelope of the
    # reference rasterizer on every textured scene
    for scene_name in TEXTURED_SCENES:
        gstd = quality_runs[f"{scene_name}_gstd"].eia_image
        lfdpr = quality_runs[f"{scene_name}_lfdpr"].eia_image
        mvr = quality_runs[f"{scene_name}_mvr"].eia_image
        ssim_l = metrics.ssim(lfdpr, gstd)
        ssim_m = metrics.ssim(mvr, gstd)
        rmse_l = metrics.rmse(lfdpr, gstd)
        rmse_m = metrics.rmse(mvr, gstd)
        print(f"[c08] {scene_name}: SSIM {ssim_l:.4f} vs {ssim_m:.4f}, "
              f"RMSE {rmse_l:.3f} vs {rmse_m:.3f}")
        assert ssim_l >= ssim_m - 0.05, \
            f"{scene_name}: SSIM {ssim_l:.4f} < {ssim_m:.4f} - 0.05"
        assert rmse_l <= rmse_m + 1.0, \
            f"{scene_name}: RMSE {rmse_l:.3f} > {rmse_m:.3f} + 1.0"


def test_c09_eia_roundtrip_bit_exact():
    # untilted display with an integral lens pitch and V dividing the
    # subpixels per lens: direct interleave must invert losslessly
    rng = np.random.default_rng(21)
    for v_count in (12, 6):
        cfg = helpers.straight_display(view_count=v_count)
        stack = rng.integers(0, 256, size=(v_count, cfg.view_height_px,
                                           cfg.view_width_px, 3),
                             dtype=np.uint8)
        panel = interleave(cfg, stack)
        back, mask = deinterleave(cfg, panel)
        assert mask.any(axis=(1, 2, 3)).all(), f"V={v_count}"
        assert np.array_equal(back[mask], stack[mask]), f"V={v_count}"


def test_c10_reconstruction_weight_normalization():
    # every reconstruction and supersampling mode keeps its per-subpixel
    # sample weights normalized, and seeded jitter is bit-reproducible
    display = lfd_model.LfdConfig.from_file(resolve_display("desk"))
    size = (display.view_width_px, display.view_height_px)
    for mode in eia.RECON_MODES:
        recon = None if mode == "none" else ReconstructionConfig(
            mode=mode, samples=8, seed=1)
        w = eia.interleave_weight_audit(display, size, recon=recon)
        err = float(np.max(np.abs(w - 1.0)))
        assert err <= 1e-6, f"mode {mode}: max |sum-1| = {err:.2e}"

    # angularly supersampled stack (view2x path): jittered non-uniform phases
    framing = lfd_model.frame_scene(display, np.array([-1.0, -1.0, -1.0]),
                                    np.array([1.0, 1.0, 1.0]))
    cams = lfd_model.build_jittered_view_array(display, framing, 2, seed=0)
    phases = lfd_model.camera_phases(cams)
    w = eia.interleave_weight_audit(
        display, size, recon=ReconstructionConfig(mode="view_spatial",
                                                  samples=8, seed=1),
        phases=phases, display_views=display.view_count)
    assert float(np.max(np.abs(w - 1.0))) <= 1e-6

    rng = np.random.default_rng(3)
    stack = rng.integers(0, 256, size=(display.view_count,
                                       display.view_height_px,
                                       display.view_width_px, 3),
                         dtype=np.uint8)
    recon = ReconstructionConfig(mode="view_spatial", samples=8, seed=5)
    a = interleave(display, stack, recon=recon, workers=4)
    b = interleave(display, stack, recon=recon, workers=1)
    assert np.array_equal(a, b)
    c = interleave(display, stack,
                   recon=ReconstructionConfig(mode="view_spatial", samples=8,
                                              seed=6))
    assert not np.array_equal(a, c)


def test_c11_speed_advantage_over_rasterizer(desk_runs):
    # summed over the bundled scenes, the point pipeline must beat the
    # per-view rasterizer end to end (direct interleave, steady-state frames)
    totals = {}
    per_scene = {}
    for renderer in ("lfdpr", "mvr"):
        times = {s: desk_runs[(s, renderer)].timings["mean"]["total"]
                 for s in SCENES}
        per_scene[renderer] = times
        totals[renderer] = sum(times.values())
    ratios = {s: per_scene["mvr"][s] / per_scene["lfdpr"][s] for s in SCENES}
    ratio = totals["mvr"] / totals["lfdpr"]
    print(f"[c11] wall-time ratio rasterizer/point (total): {ratio:.2f}; "
          f"per scene: " + ", ".join(f"{s} {ratios[s]:.2f}" for s in SCENES))
    assert ratio > 1.0, (
        f"point pipeline not faster: total mvr/lfdpr = {ratio:.3f} "
        f"(lfdpr {totals['lfdpr']:.3f}s, mvr {totals['mvr']:.3f}s)")
