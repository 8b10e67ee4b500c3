"""Command-line interface: batch rendering, LoD export, mesh info, serve."""
from __future__ import annotations

import argparse
import json
import sys
import time

from PIL import Image

from .mesh import MeshError
from .meshio import MeshFormatError
from .render import CapacityError, LensState, RenderParams, render
from .render.params import ParamError
from .session import build_bundle, load_source
from .sheets import export_lod_obj, export_merge_log


def _parse_size(text: str) -> tuple[int, int]:
    w, _, h = text.partition("x")
    return int(w), int(h)


def _parse_floats(text: str, n: int, flag: str) -> list[float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"{flag} expects {n} comma-separated numbers")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hexlens",
        description="Focus+context inspection of hexahedral meshes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render a mesh to PNG")
    p_render.add_argument("mesh", help="mesh file, or grid:N1xN2xN3 / twist:N")
    p_render.add_argument("-o", "--output", default="out.png")
    p_render.add_argument("--size", default="640x360", help="WxH pixels")
    p_render.add_argument("--metric", default="scaled-jacobian",
                          help="scaled-jacobian or field:<name>")
    p_render.add_argument("--lod", type=int, default=0)
    p_render.add_argument("--delta", type=float, default=0.5)
    p_render.add_argument("--wbase", type=float, default=None)
    p_render.add_argument("--accent", type=float, default=1.5)
    p_render.add_argument("--face-alpha", type=float, default=0.5)
    p_render.add_argument("--lens", default=None, help="cx,cy,r screen lens (pixels)")
    p_render.add_argument("--lens-obj", default=None, help="x,y,z,r object lens")
    p_render.add_argument("--background", choices=("black", "white"), default="black")
    p_render.add_argument("--stats", default=None, help="write a JSON stats report")

    p_lod = sub.add_parser("lod", help="build and export the LoD edge hierarchy")
    p_lod.add_argument("mesh")
    p_lod.add_argument("--export", default=None, help="OBJ line-set output path")
    p_lod.add_argument("--log", default=None, help="JSON merge-log output path")

    p_info = sub.add_parser("info", help="print a mesh summary as JSON")
    p_info.add_argument("mesh")
    p_info.add_argument("--metric", default="scaled-jacobian")

    p_serve = sub.add_parser("serve", help="run the HTTP/WebSocket session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8642)
    return parser


def _lens_from_args(args) -> LensState:
    if args.lens and args.lens_obj:
        raise ParamError("--lens and --lens-obj are mutually exclusive")
    if args.lens:
        cx, cy, r = _parse_floats(args.lens, 3, "--lens")
        return LensState(enabled=True, mode="screen", center=(cx, cy), radius=r)
    if args.lens_obj:
        x, y, z, r = _parse_floats(args.lens_obj, 4, "--lens-obj")
        return LensState(enabled=True, mode="object", anchor=(x, y, z), world_radius=r)
    return LensState()


def cmd_render(args) -> int:
    t0 = time.perf_counter()
    mesh = load_source(args.mesh)
    bundle = build_bundle(mesh, args.metric)
    width, height = _parse_size(args.size)
    params = RenderParams(
        width=width,
        height=height,
        w_base=args.wbase,
        delta=args.delta,
        lod=args.lod,
        accent=args.accent,
        face_alpha=args.face_alpha,
        background=args.background,
    )
    lens = _lens_from_args(args)
    result = render(bundle.scene, params=params, lens=lens)
    Image.fromarray(result.to_uint8(), mode="RGBA").save(args.output)
    total = time.perf_counter() - t0
    if args.stats:
        report = {
            "mesh": bundle.summary(),
            "lod": bundle.lod_summary(),
            "render": result.stats,
            "total_seconds": round(total, 6),
        }
        with open(args.stats, "w") as fh:
            json.dump(report, fh, indent=2)
    print(f"wrote {args.output} ({width}x{height}, "
          f"{result.stats['fragments']} fragments, {total:.2f}s)")
    return 0


def cmd_lod(args) -> int:
    mesh = load_source(args.mesh)
    bundle = build_bundle(mesh)
    if args.export:
        export_lod_obj(mesh, bundle.lod, args.export)
        print(f"wrote {args.export}")
    if args.log:
        export_merge_log(bundle.lod, args.log)
        print(f"wrote {args.log}")
    print(json.dumps(bundle.lod_summary(), indent=2))
    return 0


def cmd_info(args) -> int:
    mesh = load_source(args.mesh)
    bundle = build_bundle(mesh, args.metric)
    print(json.dumps({"mesh": bundle.summary(), "lod": bundle.lod_summary()}, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "render": cmd_render,
        "lod": cmd_lod,
        "info": cmd_info,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (MeshError, MeshFormatError, ParamError, CapacityError,
            FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
