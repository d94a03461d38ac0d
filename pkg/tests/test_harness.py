"""End-to-end run harness: artifacts, determinism, comparison, CLI."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

import helpers
from lfdrender import cli, harness
from lfdrender.harness import HarnessError, RunConfig, compare, resolve_display


@pytest.fixture(scope="module")
def display_cfg(tmp_path_factory):
    """Small untilted display config written to disk (fast test runs)."""
    path = tmp_path_factory.mktemp("display") / "straight.cfg"
    helpers.straight_display().to_file(str(path))
    return str(path)


def tiny_config(display_cfg, out_dir, **kw):
    base = dict(scene="quad", out_dir=str(out_dir), display=display_cfg,
                renderer="lfdpr", recon="none", frames=1, seed=0, workers=2,
                views=4, view_res=(120, 90))
    base.update(kw)
    return RunConfig(**base)


@pytest.fixture(scope="module")
def tiny_run(display_cfg, tmp_path_factory):
    out = tmp_path_factory.mktemp("run_a")
    cfg = tiny_config(display_cfg, out, frames=3)
    return cfg, harness.run(cfg)


# ------------------------------------------------------------- validation

def test_run_config_validation(display_cfg, tmp_path):
    good = tiny_config(display_cfg, tmp_path)
    good.validate()
    for bad in (dict(renderer="gpu"), dict(recon="bicubic"),
                dict(supersample="4x"), dict(frames=0), dict(workers=0),
                dict(scene="no_such_scene"), dict(display="no_such_display")):
        with pytest.raises(HarnessError):
            tiny_config(display_cfg, tmp_path, **bad).validate()


def test_resolve_display(display_cfg):
    assert resolve_display(display_cfg) == display_cfg
    assert resolve_display("desk").endswith("desk_tilted.cfg")
    assert os.path.exists(resolve_display("desk"))
    assert resolve_display("prototype").endswith("prototype_tilted.cfg")
    assert resolve_display("desk_tilted").endswith("desk_tilted.cfg")
    with pytest.raises(HarnessError):
        resolve_display("holodeck")


# -------------------------------------------------------------- artifacts

def test_run_artifacts_written(tiny_run):
    cfg, result = tiny_run
    for name in ("results.json", "records.jsonl", "timings.json", "eia.png",
                 "view_center.png", "masks.npy", "report.txt"):
        assert os.path.exists(os.path.join(cfg.out_dir, name)), name
    res = result.results
    assert res["schema"] == "lfdrender-run/1"
    assert res["render_view_count"] == 4
    assert res["render_view_res"] == [120, 90]
    assert res["geometry_invocations_per_frame"] == res["triangles"]
    assert result.eia_image.shape == (540, 960, 3)
    assert result.view_center.shape == (90, 120, 3)
    assert result.masks.shape == (4, 90, 120)
    assert res["memory"]["view_buffer_bytes"] == 120 * 90 * 8
    assert res["memory"]["view_buffers_total_bytes"] == 4 * 120 * 90 * 8
    assert all(len(t) == 3 for t in
               (res["points_per_frame"],))  # one entry per frame
    assert res["points_mean"] > 0


def test_stage_times_sum_to_total(tiny_run):
    _cfg, result = tiny_run
    for frame in result.timings["per_frame"]:
        parts = frame["point_gen"] + frame["view_gen"] + frame["eia"]
        assert parts == pytest.approx(frame["total"], rel=1e-9)
    mean = result.timings["mean"]
    assert mean["total"] == pytest.approx(
        mean["point_gen"] + mean["view_gen"] + mean["eia"], rel=1e-9)


def test_run_determinism(display_cfg, tmp_path, tiny_run):
    cfg_a, _res = tiny_run
    out_b = tmp_path / "run_b"
    harness.run(tiny_config(display_cfg, out_b, frames=3))

    def read(run_dir, name, mode="rb"):
        with open(os.path.join(str(run_dir), name), mode) as fh:
            return fh.read()

    for name in ("eia.png", "view_center.png", "records.jsonl"):
        assert read(cfg_a.out_dir, name) == read(out_b, name), name
    assert np.array_equal(np.load(os.path.join(cfg_a.out_dir, "masks.npy")),
                          np.load(os.path.join(str(out_b), "masks.npy")))
    ra = json.loads(read(cfg_a.out_dir, "results.json", "r"))
    rb = json.loads(read(out_b, "results.json", "r"))
    ra["config"].pop("out_dir"), rb["config"].pop("out_dir")
    assert ra == rb


def test_mvr_and_gstd_runs(display_cfg, tmp_path):
    out_m = tmp_path / "mvr"
    rm = harness.run(tiny_config(display_cfg, out_m, renderer="mvr"))
    res = rm.results
    # every view submits the full tessellated triangle list
    assert res["geometry_invocations_per_frame"] == 4 * res["triangles"]
    assert rm.masks is not None

    out_g = tmp_path / "gstd"
    rg = harness.run(tiny_config(display_cfg, out_g, renderer="gstd"))
    res = rg.results
    assert res["render_view_count"] == 8            # 2x views
    assert res["render_view_res"] == [240, 180]     # at 2x resolution
    assert res["aniso"] == 4
    assert res["recon"]["mode"] == "view_spatial"
    assert res["recon"]["samples"] == 32
    assert rg.masks is None
    assert rg.view_center.shape == (90, 120, 3)     # downsampled to base res


def test_supersample_modes(display_cfg, tmp_path):
    rs = harness.run(tiny_config(display_cfg, tmp_path / "sp2",
                                 supersample="spatial2x", recon="view"))
    assert rs.results["render_view_res"] == [240, 180]
    assert rs.results["base_view_res"] == [120, 90]
    assert rs.eia_image.shape == (540, 960, 3)

    rv = harness.run(tiny_config(display_cfg, tmp_path / "v2",
                                 supersample="view2x", recon="view"))
    assert rv.results["render_view_count"] == 8
    ph = np.array(rv.results["phases"])
    assert np.all(np.diff(ph) >= 0) and ph.min() >= 0 and ph.max() < 1
    # jittered phases are not the uniform comb
    assert not np.allclose(ph, (np.arange(8) + 0.5) / 8)


# ------------------------------------------------------------- comparison

def test_compare_self_is_perfect(display_cfg, tmp_path, tiny_run):
    cfg_a, _res = tiny_run
    out_b = tmp_path / "b"
    harness.run(tiny_config(display_cfg, out_b, renderer="mvr"))
    table = compare(cfg_a.out_dir, str(out_b), cfg_a.out_dir,
                    out_dir=str(tmp_path / "cmp"))
    assert table["schema"] == "lfdrender-compare/1"
    row_a, row_b = table["rows"]
    assert row_a["renderer"] == "lfdpr" and row_b["renderer"] == "mvr"
    assert row_a["eia_rmse"] == 0.0 and row_a["view_rmse"] == 0.0
    assert row_a["eia_ssim"] == pytest.approx(1.0, abs=1e-12)
    assert row_b["eia_rmse"] > 0.0
    cov = table["coverage_a_vs_b"]
    assert len(cov["per_view"]) == 4
    assert 0.0 <= cov["min"] <= cov["mean"] <= 1.0
    assert table["speed"]["b_over_a"] > 0
    for name in ("report.json", "report.jsonl", "report.txt"):
        assert os.path.exists(os.path.join(str(tmp_path / "cmp"), name))


def test_compare_rejects_mismatched_rasters(display_cfg, tmp_path, tiny_run):
    cfg_a, _res = tiny_run
    out_b = tmp_path / "b"
    harness.run(tiny_config(display_cfg, out_b, view_res=(60, 45)))
    with pytest.raises(HarnessError):
        compare(cfg_a.out_dir, str(out_b), cfg_a.out_dir)


def test_compare_rejects_non_run_dir(tmp_path, tiny_run):
    cfg_a, _res = tiny_run
    with pytest.raises(HarnessError):
        compare(cfg_a.out_dir, str(tmp_path / "nothing"), cfg_a.out_dir)


# -------------------------------------------------------------------- CLI

def test_cli_render_and_compare(display_cfg, tmp_path, capsys):
    out_a = str(tmp_path / "a")
    rc = cli.main(["render", "--scene", "quad", "--display", display_cfg,
                   "--views", "4", "--view-res", "120x90", "--recon",
                   "view-spatial", "--out", out_a, "--workers", "2"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "run complete" in text
    with open(os.path.join(out_a, "results.json"), encoding="utf-8") as fh:
        res = json.load(fh)
    assert res["config"]["recon"] == "view_spatial"  # dash alias normalized

    out_b = str(tmp_path / "b")
    assert cli.main(["render", "--scene", "quad", "--display", display_cfg,
                     "--views", "4", "--view-res", "120x90",
                     "--renderer", "mvr", "--out", out_b]) == 0
    capsys.readouterr()
    out_c = str(tmp_path / "cmp")
    assert cli.main(["compare", "--a", out_a, "--b", out_b, "--gstd", out_a,
                     "--out", out_c]) == 0
    assert "quality vs gold standard" in capsys.readouterr().out


def test_cli_gen_scene(tmp_path, capsys):
    rc = cli.main(["gen-scene", "--name", "quad", "--out",
                   str(tmp_path / "assets")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "scene written" in out
    manifest = out.split("scene written:")[1].strip()
    assert os.path.exists(manifest)


def test_cli_error_paths(display_cfg, tmp_path, capsys):
    rc = cli.main(["render", "--scene", "missing.obj", "--out",
                   str(tmp_path / "x")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["render"])  # missing required arguments
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["render", "--scene", "quad", "--out", "x",
                  "--view-res", "not-a-size"])


def test_cli_module_entrypoint(display_cfg, tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "lfdrender.cli", "render", "--scene", "quad",
         "--display", display_cfg, "--views", "2", "--view-res", "60x45",
         "--out", str(tmp_path / "m")],
        capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert os.path.exists(os.path.join(str(tmp_path / "m"), "eia.png"))
