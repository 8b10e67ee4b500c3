"""Tiled multi-threaded rendering pipeline.

The image is split into tiles; each tile rasterizes its triangles in
submission order and resolves its own fragment lists, so the result is
bit-identical for any thread count. Fragment generation and compositing
run in compiled kernels that mirror the scalar reference modules.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..mesh import HexMesh
from . import _kernels
from .composite import CapacityError
from .params import Camera, LensState, RenderParams


def thread_count() -> int:
    env = os.environ.get("HEXLENS_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


class Scene:
    """Render-ready flat arrays derived from a mesh and its attributes.

    Edge slot k of face f runs from corner k to corner (k + 1) % 4,
    matching the mesh's face_edges convention.
    """

    def __init__(
        self,
        mesh: HexMesh,
        vertex_importance: np.ndarray | None = None,
        edge_importance: np.ndarray | None = None,
        e_level: np.ndarray | None = None,
    ):
        self.mesh = mesh
        v_imp = (
            np.zeros(mesh.num_vertices)
            if vertex_importance is None
            else np.asarray(vertex_importance, dtype=np.float64)
        )
        e_imp = (
            np.zeros(mesh.num_edges)
            if edge_importance is None
            else np.asarray(edge_importance, dtype=np.float64)
        )
        lvl = (
            np.zeros(mesh.num_edges, dtype=np.int64)
            if e_level is None
            else np.asarray(e_level, dtype=np.int64)
        )
        self.vert_world = np.ascontiguousarray(mesh.vertices, dtype=np.float64)
        self.vert_imp = np.ascontiguousarray(v_imp)

        faces = mesh.faces
        nf = mesh.num_faces
        # two triangles per face: (0, 1, 2) and (0, 2, 3)
        tri = np.empty((2 * nf, 3), dtype=np.int64)
        tri[0::2] = faces[:, (0, 1, 2)]
        tri[1::2] = faces[:, (0, 2, 3)]
        self.tri_verts = tri
        self.tri_face = np.repeat(np.arange(nf, dtype=np.int64), 2)

        self.face_corners = np.ascontiguousarray(mesh.vertices[faces])
        self.edge_attr = np.ascontiguousarray(e_imp[mesh.face_edges])
        self.edge_level = np.ascontiguousarray(lvl[mesh.face_edges])
        self.edge_imp0 = np.ascontiguousarray(v_imp[faces])
        self.edge_imp1 = np.ascontiguousarray(v_imp[np.roll(faces, -1, axis=1)])

        bfaces = faces[mesh.boundary_face]
        btri = np.empty((2 * len(bfaces), 3), dtype=np.int64)
        btri[0::2] = bfaces[:, (0, 1, 2)]
        btri[1::2] = bfaces[:, (0, 2, 3)]
        self.boundary_tri_verts = btri
        self.bounds = mesh.bounds()


@dataclass
class RenderResult:
    image: np.ndarray                 # (H, W, 4) float64, alpha = 1
    stats: dict
    fragments: dict | None = field(default=None, repr=False)

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.rint(self.image * 255.0), 0, 255).astype(np.uint8)


def _lens_args(lens: LensState):
    enabled = 1 if lens.enabled else 0
    mode = 0 if lens.mode == "screen" else 1
    wp = lens.world_point()
    return (
        enabled, mode,
        float(lens.center[0]), float(lens.center[1]), float(lens.radius),
        float(wp[0]), float(wp[1]), float(wp[2]), float(lens.world_radius),
    )


def _bin_for_tiles(vert_view, sx, sy, tri_verts, width, height, tile_size, near):
    """Per-triangle tile ranges; conservative for near-clipped triangles."""
    z = vert_view[:, 2]
    tz = z[tri_verts]                       # (T, 3)
    behind = tz < near
    all_behind = behind.all(axis=1)
    any_behind = behind.any(axis=1)

    tx = sx[tri_verts]
    ty = sy[tri_verts]
    # padded by one pixel to be safe against center-sample rounding
    x0 = np.floor(tx.min(axis=1)).astype(np.int64) - 1
    x1 = np.ceil(tx.max(axis=1)).astype(np.int64) + 1
    y0 = np.floor(ty.min(axis=1)).astype(np.int64) - 1
    y1 = np.ceil(ty.max(axis=1)).astype(np.int64) + 1
    # clipped triangles can extend anywhere on screen
    x0 = np.where(any_behind, 0, x0)
    y0 = np.where(any_behind, 0, y0)
    x1 = np.where(any_behind, width - 1, x1)
    y1 = np.where(any_behind, height - 1, y1)
    x0 = np.clip(x0, 0, width - 1)
    x1 = np.clip(x1, 0, width - 1)
    y0 = np.clip(y0, 0, height - 1)
    y1 = np.clip(y1, 0, height - 1)
    tx0 = x0 // tile_size
    tx1 = x1 // tile_size
    ty0 = y0 // tile_size
    ty1 = y1 // tile_size
    offscreen = (tx.max(axis=1) < 0) | (tx.min(axis=1) > width) | \
                (ty.max(axis=1) < 0) | (ty.min(axis=1) > height)
    drop = all_behind | (offscreen & ~any_behind)
    tx0 = np.where(drop, 1, tx0)
    tx1 = np.where(drop, 0, tx1)            # tx0 > tx1 marks "skip"
    ntx = (width + tile_size - 1) // tile_size
    nty = (height + tile_size - 1) // tile_size
    offsets, ids = _kernels.bin_triangles(tx0, tx1, ty0, ty1, ntx, nty)
    return offsets, ids, ntx, nty


def detect_silhouette(zbuf: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean mask of pixels whose depth jumps by more than `threshold`
    towards any 4-neighbor that is farther away.
    """
    jump = np.zeros_like(zbuf)
    jump[:, :-1] = np.maximum(jump[:, :-1], zbuf[:, 1:] - zbuf[:, :-1])
    jump[:, 1:] = np.maximum(jump[:, 1:], zbuf[:, :-1] - zbuf[:, 1:])
    jump[:-1, :] = np.maximum(jump[:-1, :], zbuf[1:, :] - zbuf[:-1, :])
    jump[1:, :] = np.maximum(jump[1:, :], zbuf[:-1, :] - zbuf[1:, :])
    return (jump > threshold) & (zbuf < 1.0)


def render(
    scene: Scene,
    camera: Camera | None = None,
    params: RenderParams | None = None,
    lens: LensState | None = None,
    collect_fragments: bool = False,
) -> RenderResult:
    """Render a scene to a float RGBA image.

    Raises CapacityError when params.frag_capacity is set and any pixel
    needs a longer fragment list.
    """
    t_start = time.perf_counter()
    params = params or RenderParams()
    lens = lens or LensState()
    if camera is None:
        camera = Camera.framing(*scene.bounds)
    width, height = params.width, params.height
    w_base = params.resolved_w_base(scene.mesh)

    vert_view = np.ascontiguousarray(camera.world_to_view(scene.vert_world))
    fproj = 1.0 / math.tan(math.radians(camera.fov_y_deg) / 2.0)
    aspect = width / height
    with np.errstate(divide="ignore", invalid="ignore"):
        iz = np.where(vert_view[:, 2] > 0, 1.0 / vert_view[:, 2], 0.0)
        sx = (vert_view[:, 0] * fproj / aspect) * iz * (0.5 * width) + 0.5 * width
        sy = 0.5 * height - (vert_view[:, 1] * fproj) * iz * (0.5 * height)

    tile_size = params.tile_size
    offsets, tri_ids, ntx, nty = _bin_for_tiles(
        vert_view, sx, sy, scene.tri_verts, width, height, tile_size, camera.near
    )

    tfx, tfrgb, tfa = params.transfer_function.arrays()
    lens_args = _lens_args(lens)
    bg = 0.0 if params.background == "black" else 1.0
    capacity = -1 if params.frag_capacity is None else int(params.frag_capacity)

    image = np.zeros((height, width, 4), dtype=np.float64)
    image[..., 3] = 1.0

    timings = {"raster": 0.0, "composite": 0.0}
    totals = {"fragments": 0, "required_capacity": 0}
    frag_collect = [] if collect_fragments else None

    def run_tile(tid):
        ty, tx = divmod(tid, ntx)
        px0 = tx * tile_size
        py0 = ty * tile_size
        tw = min(tile_size, width - px0)
        th = min(tile_size, height - py0)
        ids = tri_ids[offsets[tid]:offsets[tid + 1]]
        cap = max(4096, 4 * tw * th)
        while True:
            frag_pix = np.empty(cap, dtype=np.int64)
            frag_depth = np.empty(cap, dtype=np.float64)
            frag_rgba = np.empty((cap, 4), dtype=np.float64)
            frag_kind = np.empty(cap, dtype=np.int8)
            t0 = time.perf_counter()
            n = _kernels.rasterize_tile(
                px0, py0, tw, th, ids,
                scene.tri_verts, scene.tri_face,
                vert_view, scene.vert_world, scene.vert_imp,
                scene.face_corners, scene.edge_attr, scene.edge_level,
                scene.edge_imp0, scene.edge_imp1,
                fproj, aspect, width, height, camera.near, camera.far,
                *lens_args,
                w_base, params.delta, params.lod, params.accent,
                params.face_alpha,
                params.halo_width_factor, params.halo_depth_offset,
                params.desaturation,
                tfx, tfrgb, tfa,
                frag_pix, frag_depth, frag_rgba, frag_kind,
            )
            t1 = time.perf_counter()
            if n >= 0:
                break
            cap *= 2
        tile_rgb = np.zeros((th, tw, 3), dtype=np.float64)
        required = _kernels.composite_tile(
            tw, th, n, frag_pix, frag_depth, frag_rgba, frag_kind,
            bg, bg, bg, capacity, tile_rgb,
        )
        t2 = time.perf_counter()
        return (tid, px0, py0, tw, th, tile_rgb, n, required, t1 - t0, t2 - t1,
                (frag_pix[:n].copy(), frag_depth[:n].copy(),
                 frag_rgba[:n].copy(), frag_kind[:n].copy()) if collect_fragments else None)

    ntiles = ntx * nty
    nthreads = thread_count()
    if nthreads > 1 and ntiles > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(run_tile, range(ntiles)))
    else:
        results = [run_tile(t) for t in range(ntiles)]

    over_capacity = 0
    for (tid, px0, py0, tw, th, tile_rgb, n, required, tr, tc, frags) in results:
        timings["raster"] += tr
        timings["composite"] += tc
        totals["fragments"] += n
        totals["required_capacity"] = max(totals["required_capacity"], required)
        if capacity >= 0 and required > capacity:
            over_capacity = max(over_capacity, required)
            continue
        image[py0:py0 + th, px0:px0 + tw, :3] = tile_rgb
        if collect_fragments:
            fp, fd, fr, fk = frags
            frag_collect.append((
                px0 + fp % tw, py0 + fp // tw, fd, fr, fk,
            ))
    if over_capacity:
        raise CapacityError(required=over_capacity, capacity=capacity)

    t_sil = time.perf_counter()
    if params.silhouette and len(scene.boundary_tri_verts):
        zbuf = np.ones((height, width), dtype=np.float64)
        _kernels.depth_raster(
            scene.boundary_tri_verts, vert_view,
            fproj, aspect, width, height, camera.near, camera.far, zbuf,
        )
        mask = detect_silhouette(zbuf, params.silhouette_threshold)
        image[mask, :3] = 1.0
    timings["silhouette"] = time.perf_counter() - t_sil
    timings["total"] = time.perf_counter() - t_start

    fragments = None
    if collect_fragments:
        if frag_collect:
            xs = np.concatenate([f[0] for f in frag_collect])
            ys = np.concatenate([f[1] for f in frag_collect])
            ds = np.concatenate([f[2] for f in frag_collect])
            cs = np.concatenate([f[3] for f in frag_collect])
            ks = np.concatenate([f[4] for f in frag_collect])
        else:
            xs = np.empty(0, np.int64)
            ys = np.empty(0, np.int64)
            ds = np.empty(0, np.float64)
            cs = np.empty((0, 4), np.float64)
            ks = np.empty(0, np.int8)
        fragments = {"x": xs, "y": ys, "depth": ds, "rgba": cs, "kind": ks}

    stats = {
        "width": width,
        "height": height,
        "tiles": ntiles,
        "threads": nthreads,
        "triangles": int(len(scene.tri_verts)),
        "fragments": totals["fragments"],
        "required_capacity": totals["required_capacity"],
        "w_base": w_base,
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
    }
    return RenderResult(image=image, stats=stats, fragments=fragments)
