"""Command-line interface: render runs, quality comparison, scene generation."""

from __future__ import annotations

import argparse
import sys


def _parse_view_res(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"view resolution must look like 480x360, got {text!r}") from exc


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lfdrender",
        description="CPU multiview renderer for lenticular light field "
                    "displays: point-splatting and reference rasterization "
                    "pipelines with EIA interleaving and a quality harness.")
    parser.add_argument("--backend", choices=("numba", "numpy"),
                        help="kernel backend override (default: numba when "
                             "available; env LFDRENDER_BACKEND)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser(
        "render", help="render a scene end to end into a run directory")
    p_render.add_argument("--scene", required=True,
                          help="OBJ path, .scene.json manifest, or bundled "
                               "name (hall, rotor, quad)")
    p_render.add_argument("--display", default="desk",
                          help="display config path or bundled name "
                               "(desk, prototype)")
    p_render.add_argument("--renderer", default="lfdpr",
                          choices=("lfdpr", "mvr", "gstd"))
    p_render.add_argument("--recon", default="none",
                          choices=("none", "spatial", "view", "view-spatial",
                                   "view_spatial"),
                          help="EIA reconstruction mode")
    p_render.add_argument("--supersample", default="none",
                          choices=("none", "spatial2x", "view2x"))
    p_render.add_argument("--views", type=int, default=None,
                          help="override display view count")
    p_render.add_argument("--view-res", type=_parse_view_res, default=None,
                          metavar="WxH", help="override view resolution")
    p_render.add_argument("--frames", type=int, default=1)
    p_render.add_argument("--seed", type=int, default=0)
    p_render.add_argument("--out", required=True, help="run output directory")
    p_render.add_argument("--workers", type=int, default=1)
    p_render.add_argument("--no-mipmap", action="store_true",
                          help="disable the multiview-mipmap LOD band "
                               "(point renderer)")
    p_render.add_argument("--max-pixels", type=float, default=100.0,
                          help="tessellation bound: max projected pixels per "
                               "triangle")

    p_cmp = sub.add_parser(
        "compare", help="quality table for two runs against a gold standard")
    p_cmp.add_argument("--a", required=True, dest="a_dir")
    p_cmp.add_argument("--b", required=True, dest="b_dir")
    p_cmp.add_argument("--gstd", required=True, dest="gstd_dir")
    p_cmp.add_argument("--out", required=True, help="report output directory")

    p_gen = sub.add_parser(
        "gen-scene", help="write a bundled procedural scene as OBJ/MTL/PNG")
    p_gen.add_argument("--name", required=True,
                       help="scene name: hall, rotor, or quad")
    p_gen.add_argument("--out", required=True, help="asset output directory")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    from . import backend

    if args.backend:
        backend.set_backend(args.backend)

    from . import assets, harness

    try:
        if args.command == "render":
            config = harness.RunConfig(
                scene=args.scene, out_dir=args.out, display=args.display,
                renderer=args.renderer,
                recon=args.recon.replace("-", "_"),
                supersample=args.supersample, frames=args.frames,
                seed=args.seed, workers=args.workers,
                views=args.views, view_res=args.view_res,
                mipmap=not args.no_mipmap, max_pixels=args.max_pixels)
            result = harness.run(config)
            mean = result.timings["mean"]
            print(f"run complete: {args.out}")
            print(f"  points/frame (mean):   "
                  f"{result.results['points_mean']:.1f}")
            print(f"  stage means: point_gen {mean['point_gen']:.3f}s, "
                  f"view_gen {mean['view_gen']:.3f}s, eia {mean['eia']:.3f}s, "
                  f"total {mean['total']:.3f}s")
        elif args.command == "compare":
            table = harness.compare(args.a_dir, args.b_dir, args.gstd_dir,
                                    out_dir=args.out)
            with open(f"{args.out}/report.txt", "r", encoding="utf-8") as fh:
                print(fh.read(), end="")
        elif args.command == "gen-scene":
            path = assets.write_scene(args.name, args.out)
            print(f"scene written: {path}")
    except (harness.HarnessError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
