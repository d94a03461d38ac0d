"""End-to-end benchmark and quality harness.

`run` renders a scene through one renderer configuration, writing images,
deterministic run records, and wall-clock stage timings; `compare` builds a
quality table (RMSE / SSIM / coverage, EIA-level and single-view) from two
runs and a gold-standard run.

Run directory layout:
  results.json     run record — config echo, counts, memory, cameras.
                   Deterministic: identical config + seed gives identical
                   bytes.
  records.jsonl    one deterministic record per frame (points, invocations).
  timings.json     per-frame and mean stage times; the only non-deterministic
                   output besides nothing — images and records never contain
                   times.
  report.txt       human-readable summary of results.json.
  eia.png          frame-0 panel image.
  view_center.png  frame-0 center view at the comparison raster.
  masks.npy        frame-0 per-view coverage masks (bool, V x H x W), saved
                   when the render raster equals the comparison raster.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from PIL import Image

from . import assets, eia as eia_mod, lfd_model, metrics as metrics_mod
from . import mvr_render, pointgen, scene as scene_mod, splat_render
from .kernels import common as kc
from .mipmap import build_atlas

RENDERERS = ("lfdpr", "mvr", "gstd")
SUPERSAMPLE_MODES = ("none", "spatial2x", "view2x")

GSTD_VIEW_FACTOR = 2       # gold standard: twice the views ...
GSTD_RES_FACTOR = 2        # ... at twice the per-view resolution
GSTD_ANISO = 4             # anisotropic texture probes per pixel
GSTD_RECON_SAMPLES = 32    # reconstruction samples per panel subpixel
RECON_SAMPLES = 8          # standard reconstruction sample count


class HarnessError(ValueError):
    """Configuration or compatibility failure with an actionable message."""


def resolve_display(name_or_path):
    """Display config path from a file path or a bundled short name."""
    if os.path.exists(name_or_path):
        return str(name_or_path)
    from importlib import resources

    short = {"desk": "desk_tilted.cfg", "prototype": "prototype_tilted.cfg"}
    fname = short.get(name_or_path, name_or_path)
    if not fname.endswith(".cfg"):
        fname += ".cfg"
    cand = resources.files("lfdrender") / "displays" / fname
    if cand.is_file():
        return str(cand)
    raise HarnessError(
        f"display {name_or_path!r} is neither a file nor a bundled config "
        f"(bundled: desk, prototype)")


@dataclass
class RunConfig:
    """One end-to-end render job."""

    scene: str                    # path, manifest, or bundled scene name
    out_dir: str
    display: str = "desk"
    renderer: str = "lfdpr"
    recon: str = "none"           # EIA reconstruction mode (lfdpr/mvr)
    supersample: str = "none"     # none | spatial2x | view2x (lfdpr/mvr)
    frames: int = 1
    seed: int = 0
    workers: int = 1
    views: int | None = None      # override display view count
    view_res: tuple | None = None  # override display view resolution (w, h)
    mipmap: bool = True           # lfdpr: multiview-mipmap LOD band on/off
    max_pixels: float = 100.0     # tessellation bound (projected px per tri)
    margin: float = 1.10          # focal-rectangle framing margin

    def validate(self):
        if self.renderer not in RENDERERS:
            raise HarnessError(f"renderer must be one of {RENDERERS}")
        if self.recon not in eia_mod.RECON_MODES:
            raise HarnessError(f"recon must be one of {eia_mod.RECON_MODES}")
        if self.supersample not in SUPERSAMPLE_MODES:
            raise HarnessError(
                f"supersample must be one of {SUPERSAMPLE_MODES}")
        if self.frames < 1:
            raise HarnessError("frames must be >= 1")
        if self.workers < 1:
            raise HarnessError("workers must be >= 1")
        if self.scene not in assets.SCENE_NAMES \
                and not os.path.exists(self.scene):
            raise HarnessError(
                f"scene {self.scene!r} is neither a file nor a bundled "
                f"scene name {assets.SCENE_NAMES}")
        resolve_display(self.display)


@dataclass
class RunResult:
    """In-memory handle on a completed run (files are authoritative)."""

    out_dir: str
    results: dict
    timings: dict
    eia_image: np.ndarray
    view_center: np.ndarray
    masks: np.ndarray | None


def _swept_bounds(mesh, anim):
    """Axis-aligned bounds covering every pose of the rotating mesh."""
    pts = mesh.tri_pos.reshape(-1, 3)
    if anim is None or anim.rate == 0.0:
        return pts.min(axis=0), pts.max(axis=0)
    axis = np.asarray(anim.axis, dtype=np.float64)
    axis = axis / max(np.linalg.norm(axis), 1e-300)
    pivot = np.asarray(anim.pivot, dtype=np.float64)
    rel = pts - pivot
    h = rel @ axis
    radial = rel - h[:, None] * axis
    rmax = float(np.max(np.linalg.norm(radial, axis=1)))
    perp = rmax * np.sqrt(np.maximum(1.0 - axis * axis, 0.0))
    centers = np.minimum(h.min() * axis, h.max() * axis), \
        np.maximum(h.min() * axis, h.max() * axis)
    lo = pivot + centers[0] - perp
    hi = pivot + centers[1] + perp
    return lo, hi


def _save_png(path, arr):
    Image.fromarray(np.ascontiguousarray(arr)).save(path)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(config: RunConfig) -> RunResult:
    """Render all frames of one configuration and write the run directory."""
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)

    display = lfd_model.LfdConfig.from_file(resolve_display(config.display))
    if config.views is not None:
        display = display.with_overrides(view_count=config.views)
    if config.view_res is not None:
        display = display.with_overrides(view_res=config.view_res)
    base_v = display.view_count
    base_res = (display.view_width_px, display.view_height_px)

    mesh0, anim = assets.load_scene_any(config.scene)
    lo, hi = _swept_bounds(mesh0, anim)
    framing = lfd_model.frame_scene(display, lo, hi, margin=config.margin)

    # camera array + EIA settings per renderer/supersample mode
    phases = None
    aniso = 1
    if config.renderer == "gstd":
        render_cfg = display.with_overrides(
            view_count=GSTD_VIEW_FACTOR * base_v,
            view_res=(GSTD_RES_FACTOR * base_res[0],
                      GSTD_RES_FACTOR * base_res[1]))
        cams = lfd_model.build_view_array(render_cfg, framing)
        recon = eia_mod.ReconstructionConfig(
            mode="view_spatial", samples=GSTD_RECON_SAMPLES, seed=config.seed)
        interleave_cfg = render_cfg
        aniso = GSTD_ANISO
    else:
        if config.supersample == "spatial2x":
            render_cfg = display.with_overrides(
                view_res=(2 * base_res[0], 2 * base_res[1]))
            cams = lfd_model.build_view_array(render_cfg, framing)
        elif config.supersample == "view2x":
            render_cfg = display
            cams = lfd_model.build_jittered_view_array(
                display, framing, 2, config.seed)
            phases = lfd_model.camera_phases(cams)
        else:
            render_cfg = display
            cams = lfd_model.build_view_array(display, framing)
        recon = None if config.recon == "none" else \
            eia_mod.ReconstructionConfig(mode=config.recon,
                                         samples=RECON_SAMPLES,
                                         seed=config.seed)
        interleave_cfg = display

    pre_tess_tris = mesh0.n_tris
    tess = scene_mod.tessellate(mesh0, cams, max_pixels=config.max_pixels)
    atlas = build_atlas(tess.materials)
    shading = kc.default_shading()

    # comparison view: camera nearest the display's uniform center eye
    base_eyes = lfd_model.view_positions(base_v, framing.span)
    center_eye = float(base_eyes[base_v // 2])
    cam_eyes = np.array([c.ex for c in cams])
    center_idx = int(np.argmin(np.abs(cam_eyes - center_eye)))

    is_lfdpr = config.renderer == "lfdpr"
    stage_names = ("point_gen", "view_gen", "eia")
    frame_times = []
    frame_records = []
    eia_img = view_center = masks = None
    for f in range(config.frames):
        mesh_f = scene_mod.mesh_at_frame(tess, anim, f)
        t0 = time.perf_counter()
        if is_lfdpr:
            cloud = pointgen.generate_points(mesh_f, cams, atlas,
                                             mipmap=config.mipmap)
            points = cloud.n_points
            invocations = mesh_f.n_tris
        else:
            points = 0
        t1 = time.perf_counter()
        if is_lfdpr:
            buffers = splat_render.render_views(cloud, cams, shading,
                                                workers=config.workers)
        else:
            buffers, rstats = mvr_render.render_views(
                mesh_f, cams, atlas, shading, workers=config.workers,
                aniso=aniso)
            invocations = rstats.triangles_submitted
        t2 = time.perf_counter()
        stack = eia_mod.as_view_stack(buffers)
        if config.supersample == "spatial2x" and config.renderer != "gstd":
            stack = eia_mod.downsample_supersampled(stack)
        frame_eia = eia_mod.interleave(
            interleave_cfg, stack, recon=recon, phases=phases,
            workers=config.workers)
        t3 = time.perf_counter()

        frame_times.append({"point_gen": t1 - t0, "view_gen": t2 - t1,
                            "eia": t3 - t2, "total": t3 - t0})
        frame_records.append({"frame": f, "points": int(points),
                              "geometry_invocations": int(invocations)})
        if f == 0:
            eia_img = frame_eia
            if config.renderer == "gstd":
                view_center = eia_mod.gaussian_downsample(
                    stack[center_idx], base_res,
                    samples=GSTD_RECON_SAMPLES, seed=config.seed)
            else:
                view_center = stack[center_idx]
            if stack.shape[2] == base_res[0] and stack.shape[1] == base_res[1] \
                    and config.renderer != "gstd":
                masks = np.stack([b.coverage_mask() for b in buffers])

    # timing means after warmup
    warmup = min(2, config.frames - 1)
    timed = frame_times[warmup:]
    mean_times = {k: float(np.mean([t[k] for t in timed]))
                  for k in (*stage_names, "total")}

    per_buffer_bytes = cams[0].width * cams[0].height * 8
    points_list = [r["points"] for r in frame_records]
    results = {
        "schema": "lfdrender-run/1",
        "config": {**asdict(config),
                   "display_path": resolve_display(config.display)},
        "display": asdict(display),
        "framing": asdict(framing),
        "base_view_count": base_v,
        "base_view_res": list(base_res),
        "render_view_count": len(cams),
        "render_view_res": [cams[0].width, cams[0].height],
        "aniso": aniso,
        "recon": None if recon is None else asdict(recon),
        "phases": [float(c.phase) for c in cams],
        "camera_eyes": [float(c.ex) for c in cams],
        "center_eye": center_eye,
        "center_view_index": center_idx,
        "triangles": tess.n_tris,
        "triangles_before_tessellation": pre_tess_tris,
        "points_per_frame": points_list,
        "points_mean": float(np.mean(points_list)),
        "points_max": int(np.max(points_list)),
        "geometry_invocations_per_frame": frame_records[0][
            "geometry_invocations"],
        "memory": {
            "view_buffer_bytes": per_buffer_bytes,
            "view_buffer_count": len(cams),
            "view_buffers_total_bytes": per_buffer_bytes * len(cams),
            "point_record_bytes": pointgen.RECORD_DTYPE.itemsize,
            "point_bytes_max": int(np.max(points_list))
            * pointgen.RECORD_DTYPE.itemsize,
        },
        "artifacts": {
            "eia": "eia.png",
            "view_center": "view_center.png",
            "masks": "masks.npy" if masks is not None else None,
            "records": "records.jsonl",
            "timings": "timings.json",
        },
    }

    _write_json(os.path.join(config.out_dir, "results.json"), results)
    with open(os.path.join(config.out_dir, "records.jsonl"), "w",
              encoding="utf-8") as fh:
        for rec in frame_records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")
    _write_json(os.path.join(config.out_dir, "timings.json"),
                {"per_frame": frame_times, "mean": mean_times,
                 "warmup_frames_excluded": warmup})
    _save_png(os.path.join(config.out_dir, "eia.png"), eia_img)
    _save_png(os.path.join(config.out_dir, "view_center.png"), view_center)
    if masks is not None:
        np.save(os.path.join(config.out_dir, "masks.npy"), masks)
    _write_report(os.path.join(config.out_dir, "report.txt"), results)

    return RunResult(out_dir=config.out_dir, results=results,
                     timings={"per_frame": frame_times, "mean": mean_times},
                     eia_image=eia_img, view_center=view_center, masks=masks)


def _write_report(path, results):
    mem = results["memory"]
    lines = [
        "run summary",
        "===========",
        f"scene                    {results['config']['scene']}",
        f"renderer                 {results['config']['renderer']}",
        f"display                  {results['config']['display']}"
        f" ({results['display']['panel_width_px']}x"
        f"{results['display']['panel_height_px']})",
        f"views rendered           {results['render_view_count']} @ "
        f"{results['render_view_res'][0]}x{results['render_view_res'][1]}",
        f"comparison raster        {results['base_view_count']} views @ "
        f"{results['base_view_res'][0]}x{results['base_view_res'][1]}",
        f"recon                    {results['recon']['mode'] if results['recon'] else 'none'}",
        f"supersample              {results['config']['supersample']}",
        f"triangles (tessellated)  {results['triangles']}"
        f" (from {results['triangles_before_tessellation']})",
        f"points per frame (mean)  {results['points_mean']:.1f}",
        f"geometry invocations     {results['geometry_invocations_per_frame']}"
        " per frame",
        f"view buffer memory       {mem['view_buffers_total_bytes']} bytes"
        f" ({mem['view_buffer_count']} x {mem['view_buffer_bytes']})",
        f"point record size        {mem['point_record_bytes']} bytes",
        "(stage times: see timings.json)",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# comparison

def _load_run(run_dir):
    path = os.path.join(run_dir, "results.json")
    if not os.path.exists(path):
        raise HarnessError(f"{run_dir} has no results.json (not a run dir?)")
    with open(path, "r", encoding="utf-8") as fh:
        results = json.load(fh)
    out = {"dir": run_dir, "results": results}
    out["eia"] = np.asarray(Image.open(os.path.join(run_dir, "eia.png")))
    out["view"] = np.asarray(
        Image.open(os.path.join(run_dir, "view_center.png")))
    mask_name = results["artifacts"].get("masks")
    out["masks"] = None
    if mask_name:
        mpath = os.path.join(run_dir, mask_name)
        if os.path.exists(mpath):
            out["masks"] = np.load(mpath)
    tpath = os.path.join(run_dir, "timings.json")
    out["timings"] = None
    if os.path.exists(tpath):
        with open(tpath, "r", encoding="utf-8") as fh:
            out["timings"] = json.load(fh)
    return out


def _check_compatible(runs):
    ref = runs[0]["results"]
    for other in runs[1:]:
        res = other["results"]
        if res["display"] != ref["display"] and (
                res["base_view_count"] != ref["base_view_count"]
                or res["base_view_res"] != ref["base_view_res"]
                or res["display"]["panel_width_px"] != ref["display"]["panel_width_px"]
                or res["display"]["panel_height_px"] != ref["display"]["panel_height_px"]):
            raise HarnessError(
                f"runs {runs[0]['dir']} and {other['dir']} use incompatible "
                "display configurations")
        if res["base_view_count"] != ref["base_view_count"] \
                or res["base_view_res"] != ref["base_view_res"]:
            raise HarnessError(
                f"runs {runs[0]['dir']} and {other['dir']} have different "
                "comparison rasters (views / view resolution)")


def compare(a_dir, b_dir, gstd_dir, out_dir=None):
    """Quality table for two runs against a gold-standard run.

    Returns the table as a dict; optionally writes report.txt (UTF-8 table)
    and report.jsonl (line-delimited records) into out_dir.
    """
    ra, rb, rg = _load_run(a_dir), _load_run(b_dir), _load_run(gstd_dir)
    _check_compatible([ra, rb, rg])

    def quality(test, ref):
        return {
            "eia_rmse": metrics_mod.rmse(test["eia"], ref["eia"]),
            "eia_ssim": metrics_mod.ssim(test["eia"], ref["eia"]),
            "view_rmse": metrics_mod.rmse(test["view"], ref["view"]),
            "view_ssim": metrics_mod.ssim(test["view"], ref["view"]),
        }

    rows = []
    for run_info in (ra, rb):
        row = {"run": run_info["dir"],
               "renderer": run_info["results"]["config"]["renderer"],
               **quality(run_info, rg)}
        rows.append(row)

    coverage = None
    if ra["masks"] is not None and rb["masks"] is not None \
            and ra["masks"].shape == rb["masks"].shape:
        per_view = [metrics_mod.coverage_agreement(ra["masks"][v],
                                                   rb["masks"][v], erode=1)
                    for v in range(ra["masks"].shape[0])]
        coverage = {"per_view": per_view,
                    "min": float(np.min(per_view)),
                    "mean": float(np.mean(per_view))}

    speed = None
    ta, tb = ra["timings"], rb["timings"]
    if ta and tb:
        speed = {
            "a_total_s": ta["mean"]["total"],
            "b_total_s": tb["mean"]["total"],
            "b_over_a": (tb["mean"]["total"] / ta["mean"]["total"]
                         if ta["mean"]["total"] > 0 else None),
        }

    table = {
        "schema": "lfdrender-compare/1",
        "gstd": gstd_dir,
        "rows": rows,
        "coverage_a_vs_b": coverage,
        "speed": speed,
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        _write_json(os.path.join(out_dir, "report.json"), table)
        with open(os.path.join(out_dir, "report.jsonl"), "w",
                  encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(_jsonable(row), sort_keys=True) + "\n")
        _write_compare_report(os.path.join(out_dir, "report.txt"), table)
    return table


def _write_compare_report(path, table):
    header = (f"{'run':40s} {'renderer':8s} {'EIA RMSE':>9s} {'EIA SSIM':>9s}"
              f" {'view RMSE':>10s} {'view SSIM':>10s}")
    lines = ["quality vs gold standard", "=" * len(header), header,
             "-" * len(header)]
    for row in table["rows"]:
        lines.append(
            f"{row['run'][:40]:40s} {row['renderer']:8s}"
            f" {row['eia_rmse']:9.3f} {row['eia_ssim']:9.4f}"
            f" {row['view_rmse']:10.3f} {row['view_ssim']:10.4f}")
    cov = table["coverage_a_vs_b"]
    if cov is not None:
        lines.append(f"coverage agreement (a vs b, erode=1): "
                     f"min {cov['min']:.6f} mean {cov['mean']:.6f}")
    spd = table["speed"]
    if spd and spd["b_over_a"] is not None:
        lines.append(f"wall-time ratio (b / a): {spd['b_over_a']:.2f}"
                     f" ({spd['b_total_s']:.3f}s / {spd['a_total_s']:.3f}s)")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
