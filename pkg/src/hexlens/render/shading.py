"""Fragment classification and shading equations (scalar reference).

These functions define the per-fragment contract; the tiled pipeline in
``_kernels`` mirrors them on flat arrays and is cross-checked against
them in the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import LensState, RenderParams

KIND_FOCUS_EDGE = 0
KIND_CONTEXT_EDGE = 1
KIND_FOCUS_FACE = 2
KIND_CONTEXT_FACE = 3
KIND_HALO = 4
KIND_SILHOUETTE = 5

# Edge color styling: darken towards the focus center, brighten in context.
FOCUS_EDGE_DARKEN = 0.8
CONTEXT_EDGE_BRIGHTEN = 1.2


def smoothstep(a: float, b: float, x: float) -> float:
    t = (x - a) / (b - a)
    t = min(max(t, 0.0), 1.0)
    return t * t * (3.0 - 2.0 * t)


def focus_factor(px: float, py: float, world_pos, lens: LensState) -> tuple[float, float]:
    """(focus, dist) of a fragment for the current lens.

    dist is the distance to the lens center normalized by the lens radius;
    focus = 1 - smoothstep(0.7, 1, dist). A disabled lens yields the pure
    context convention focus = 0, dist = 1.
    """
    if not lens.enabled:
        return 0.0, 1.0
    if lens.mode == "screen":
        cx, cy = lens.center
        dist = math.hypot(px - cx, py - cy) / lens.radius
    else:
        p = np.asarray(world_pos, dtype=np.float64)
        dist = float(np.linalg.norm(p - lens.world_point())) / lens.world_radius
    return 1.0 - smoothstep(0.7, 1.0, dist), dist


def point_segment_distance(p, a, b) -> tuple[float, float]:
    """(distance, parameter t in [0, 1]) from point p to segment ab."""
    p = np.asarray(p, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a)), 0.0
    t = float((p - a) @ ab) / denom
    t = min(max(t, 0.0), 1.0)
    return float(np.linalg.norm(p - (a + t * ab))), t


@dataclass
class FaceFragmentInputs:
    """Per-face data a fragment needs: the owning face's corners and its
    four edge records (edge k runs from corner k to corner (k+1) % 4).
    """

    corners: np.ndarray            # (4, 3) object-space positions
    edge_attr: np.ndarray          # (4,) edge importance
    edge_level: np.ndarray         # (4,) LoD level per edge
    edge_visible: np.ndarray       # (4,) bool, visibility at the current lod
    edge_end_importance: np.ndarray  # (4, 2) endpoint importances
    face_importance: float         # interpolated per-vertex importance


def edge_visibility(edge_level, edge_attr, lod: int, delta: float, in_focus: bool) -> np.ndarray:
    """Which of a face's edges take part in the closest-edge search.

    Edges hidden at the selected LoD are excluded so no star-shaped holes
    appear at intersections; inside the lens, importance above the
    threshold keeps an edge eligible.
    """
    vis = np.asarray(edge_level) >= lod
    if in_focus:
        vis = vis | (np.asarray(edge_attr) >= delta)
    return vis


def edge_distance(point, corners, mask) -> tuple[float, int, float]:
    """Minimum point-to-segment distance over the visible face edges.

    Returns (distance, edge slot, parameter along edge); distance is
    +inf when no edge is visible.
    """
    best = math.inf
    best_k = -1
    best_t = 0.0
    for k in range(4):
        if not mask[k]:
            continue
        d, t = point_segment_distance(point, corners[k], corners[(k + 1) % 4])
        if d < best:
            best, best_k, best_t = d, k, t
    return best, best_k, best_t


@dataclass
class ShadedFragment:
    color: np.ndarray
    alpha: float
    kind: int
    halo: tuple | None = None      # (alpha, depth) of an extra halo fragment


def _desaturate(color: np.ndarray, focus: float, depth: float, strength: float) -> np.ndarray:
    k = min(max(strength * focus * depth, 0.0), 1.0)
    gray = float(color.mean())
    return color + (gray - color) * k


def shade_fragment(
    point,
    inputs: FaceFragmentInputs,
    focus: float,
    dist: float,
    depth: float,
    params: RenderParams,
) -> ShadedFragment:
    """Shade one face fragment.

    Implements the focus/context edge classification, the accentuation of
    LoD-hidden edges in the context, the distance-modulated face opacity,
    and the final edge/face blend; optionally reports a depth-pushed halo
    fragment for focus edges.
    """
    w_base = params.w_base
    if w_base is None:
        raise ValueError("shade_fragment needs a resolved w_base")
    tf = params.transfer_function

    in_focus = focus > 0.0
    mask = edge_visibility(inputs.edge_level, inputs.edge_attr, params.lod, params.delta, in_focus)
    d_vis, k_vis, t_vis = edge_distance(point, inputs.corners, mask)
    d_all, _, _ = edge_distance(point, inputs.corners, np.ones(4, dtype=bool))

    w = (1.0 + 0.3 * focus) * w_base
    e_focus = 0.0
    e_context = 0.0
    edge_imp = 0.0
    qualifies_focus = False
    if k_vis >= 0:
        lvl = inputs.edge_level[k_vis]
        attr = inputs.edge_attr[k_vis]
        qualifies_focus = lvl >= params.lod or attr >= params.delta
        if d_vis <= w:
            if qualifies_focus:
                e_focus = 1.0
            if lvl >= params.lod:
                e_context = 1.0
        lo, hi = inputs.edge_end_importance[k_vis]
        edge_imp = lo * (1.0 - t_vis) + hi * t_vis
    alpha_e = e_context + (e_focus - e_context) * focus

    s_e = 1.0
    if alpha_e == 0.0 and d_all <= (2.0 / 3.0) * w_base:
        s_e = params.accent

    dist_c = min(max(dist, 0.0), 1.0)
    face_rgb, face_tf_alpha = tf(inputs.face_importance)
    alpha_f = params.face_alpha * dist_c ** 4 * face_tf_alpha

    edge_rgb, _ = tf(edge_imp)
    style = CONTEXT_EDGE_BRIGHTEN * (1.0 - focus) + FOCUS_EDGE_DARKEN * focus
    edge_rgb = np.clip(edge_rgb * style, 0.0, 1.0)

    color = alpha_e * edge_rgb + (1.0 - alpha_e) * s_e * alpha_f * face_rgb
    alpha = alpha_e + (1.0 - alpha_e) * s_e * alpha_f
    alpha = min(max(alpha, 0.0), 1.0)
    color = np.clip(color, 0.0, 1.0)
    color = _desaturate(color, focus, depth, params.desaturation)

    if alpha_e > 0.0:
        kind = KIND_FOCUS_EDGE if in_focus else KIND_CONTEXT_EDGE
    else:
        kind = KIND_FOCUS_FACE if in_focus else KIND_CONTEXT_FACE

    halo = None
    if in_focus and qualifies_focus:
        band_hi = w * (1.0 + params.halo_width_factor * focus)
        if w < d_vis <= band_hi:
            halo = (focus, depth + params.halo_depth_offset)

    return ShadedFragment(color=color, alpha=alpha, kind=kind, halo=halo)


def emit_halo(d_vis: float, w: float, e_focus: float, focus: float, depth: float, params: RenderParams):
    """Halo band test: white fragment pushed back in depth, emitted only
    around focus edges; the band shrinks with distance to the focus.
    """
    if focus <= 0.0 or e_focus != 1.0:
        return None
    band_hi = w * (1.0 + params.halo_width_factor * focus)
    if w < d_vis <= band_hi:
        return (focus, depth + params.halo_depth_offset)
    return None
