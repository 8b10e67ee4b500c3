"""Surface picking for the object-space lens."""
from __future__ import annotations

import numpy as np

from .params import Camera, LensState
from .pipeline import Scene

_EPS = 1e-12


def ray_triangles(origin, direction, v0, v1, v2):
    """Vectorized ray/triangle intersection (Moeller-Trumbore).

    Returns the array of hit parameters t (inf where missed).
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    e1 = v1 - v0
    e2 = v2 - v0
    p = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, p)
    ok = np.abs(det) > _EPS
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    s = origin - v0
    u = np.einsum("ij,ij->i", s, p) * inv
    q = np.cross(s, e1)
    v = np.einsum("j,ij->i", direction, q) * inv
    t = np.einsum("ij,ij->i", e2, q) * inv
    hit = ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0) & (t > _EPS)
    return np.where(hit, t, np.inf)


def pick_surface_point(scene: Scene, camera: Camera, px: float, py: float,
                       width: int, height: int):
    """First intersection of the pixel's view ray with the mesh boundary.

    Returns (anchor point, ray direction, hit distance) or None.
    """
    origin, direction = camera.pixel_ray(px, py, width, height)
    tri = scene.boundary_tri_verts
    if len(tri) == 0:
        return None
    verts = scene.vert_world
    t = ray_triangles(origin, direction, verts[tri[:, 0]], verts[tri[:, 1]], verts[tri[:, 2]])
    best = float(t.min())
    if not np.isfinite(best):
        return None
    return origin + best * direction, direction, best


def make_object_lens(scene: Scene, camera: Camera, px: float, py: float,
                     width: int, height: int, world_radius: float,
                     depth: float = 0.0) -> LensState | None:
    """Object-space lens anchored at the picked surface point.

    The pick ray is stored so the lens can later be pushed into the
    volume along it; returns None when the pick misses the mesh.
    """
    hit = pick_surface_point(scene, camera, px, py, width, height)
    if hit is None:
        return None
    anchor, direction, _ = hit
    return LensState(
        enabled=True,
        mode="object",
        anchor=tuple(float(c) for c in anchor),
        ray=tuple(float(c) for c in direction),
        depth=depth,
        world_radius=world_radius,
    )
