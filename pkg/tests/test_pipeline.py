import os
import subprocess
import sys

import numpy as np
import pytest

from hexlens.mesh import make_grid, make_twisted_grid
from hexlens.quality import importance_field, scaled_jacobian
from hexlens.render import (
    Camera,
    CapacityError,
    LensState,
    RenderParams,
    Scene,
    render,
)
from hexlens.render.pick import make_object_lens, pick_surface_point, ray_triangles
from hexlens.render.pipeline import detect_silhouette, thread_count


def _scene(mesh):
    imp = importance_field(mesh, scaled_jacobian(mesh))
    return Scene(mesh, vertex_importance=imp.per_vertex,
                 edge_importance=imp.per_edge)


# ---------------------------------------------------------------- determinism

def test_repeat_render_bit_identical():
    scene = _scene(make_twisted_grid(3))
    params = RenderParams(width=320, height=180)
    lens = LensState(enabled=True, mode="screen", center=(160, 90), radius=60)
    a = render(scene, params=params, lens=lens).image
    b = render(scene, params=params, lens=lens).image
    assert a.tobytes() == b.tobytes()


def _render_hash_subprocess(threads):
    code = (
        "import hashlib\n"
        "from hexlens.mesh import make_twisted_grid\n"
        "from hexlens.quality import importance_field, scaled_jacobian\n"
        "from hexlens.render import LensState, RenderParams, Scene, render\n"
        "mesh = make_twisted_grid(3)\n"
        "imp = importance_field(mesh, scaled_jacobian(mesh))\n"
        "scene = Scene(mesh, vertex_importance=imp.per_vertex,"
        " edge_importance=imp.per_edge)\n"
        "lens = LensState(enabled=True, mode='screen', center=(160, 90), radius=60)\n"
        "img = render(scene, params=RenderParams(width=320, height=180),"
        " lens=lens).image\n"
        "print(hashlib.sha256(img.tobytes()).hexdigest())\n"
    )
    env = dict(os.environ, HEXLENS_THREADS=str(threads))
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=env, check=True)
    return out.stdout.strip()


def test_thread_count_independence():
    assert _render_hash_subprocess(1) == _render_hash_subprocess(8)


def test_thread_count_env_override(monkeypatch):
    monkeypatch.setenv("HEXLENS_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.delenv("HEXLENS_THREADS")
    assert 1 <= thread_count() <= 8


# ------------------------------------------------------------------- results

def test_stats_contents():
    scene = _scene(make_grid(2, 2, 2))
    result = render(scene, params=RenderParams(width=100, height=70))
    s = result.stats
    assert s["width"] == 100 and s["height"] == 70
    assert s["tiles"] == 2 * 2  # 64-pixel tiles
    assert s["triangles"] == 2 * scene.mesh.num_faces
    assert s["fragments"] > 0
    assert s["required_capacity"] >= 1
    assert s["w_base"] == pytest.approx(0.15 * scene.mesh.mean_edge_length())
    for key in ("raster", "composite", "silhouette", "total"):
        assert s["timings_s"][key] >= 0.0


def test_image_shape_and_alpha():
    scene = _scene(make_grid(1, 1, 1))
    img = render(scene, params=RenderParams(width=33, height=21)).image
    assert img.shape == (21, 33, 4)
    assert (img[..., 3] == 1.0).all()
    assert np.isfinite(img).all()


def test_white_background_differs():
    scene = _scene(make_grid(1, 1, 1))
    black = render(scene, params=RenderParams(width=64, height=64,
                                              silhouette=False)).image
    white = render(scene, params=RenderParams(width=64, height=64,
                                              background="white",
                                              silhouette=False)).image
    assert (black[0, 0, :3] == 0.0).all()
    assert (white[0, 0, :3] == 1.0).all()


def test_scene_defaults_render():
    # a scene with no attribute arrays renders level-0, zero-importance
    scene = Scene(make_grid(2, 1, 1))
    img = render(scene, params=RenderParams(width=48, height=48)).image
    assert np.isfinite(img).all()


def test_explicit_w_base_respected():
    scene = _scene(make_grid(1, 1, 1))
    result = render(scene, params=RenderParams(width=32, height=32, w_base=0.4))
    assert result.stats["w_base"] == 0.4


# ------------------------------------------------------------------ capacity

def test_capacity_error_from_pipeline():
    scene = _scene(make_grid(3, 3, 3))
    params = RenderParams(width=200, height=150, frag_capacity=2,
                          silhouette=False)
    with pytest.raises(CapacityError) as exc:
        render(scene, params=params)
    assert exc.value.capacity == 2
    assert exc.value.required > 2
    assert f"required capacity is {exc.value.required}" in str(exc.value)
    # raising the cap to the reported requirement succeeds
    ok = params.with_updates(frag_capacity=exc.value.required)
    img = render(scene, params=ok).image
    assert np.isfinite(img).all()


# ---------------------------------------------------------------- silhouette

def test_detect_silhouette_flat_plane_empty():
    zbuf = np.full((20, 20), 0.4)
    assert not detect_silhouette(zbuf, 0.01).any()


def test_detect_silhouette_step_edge():
    zbuf = np.full((10, 10), 0.2)
    zbuf[:, 5:] = 0.6
    mask = detect_silhouette(zbuf, 0.01)
    # only the nearer side of the step qualifies
    assert mask[:, 4].all()
    assert not mask[:, :4].any() and not mask[:, 5:].any()


def test_detect_silhouette_ignores_background():
    zbuf = np.ones((10, 10))
    zbuf[4:6, 4:6] = 0.3
    mask = detect_silhouette(zbuf, 0.01)
    assert mask[4:6, 4:6].all()
    assert mask.sum() == 4  # the pixels at depth 1.0 never light up


def test_silhouette_overlay_draws_white():
    scene = _scene(make_grid(2, 2, 2))
    on = render(scene, params=RenderParams(width=128, height=96)).image
    off = render(scene, params=RenderParams(width=128, height=96,
                                            silhouette=False)).image
    changed = np.any(on != off, axis=-1)
    assert changed.any()
    assert (on[changed][:, :3] == 1.0).all()


# -------------------------------------------------------------------- picking

def test_ray_triangles_hit_and_miss():
    v0 = np.array([[0.0, 0.0, 0.0]])
    v1 = np.array([[1.0, 0.0, 0.0]])
    v2 = np.array([[0.0, 1.0, 0.0]])
    t = ray_triangles((0.25, 0.25, 1.0), (0.0, 0.0, -1.0), v0, v1, v2)
    assert t[0] == pytest.approx(1.0)
    t = ray_triangles((2.0, 2.0, 1.0), (0.0, 0.0, -1.0), v0, v1, v2)
    assert np.isinf(t[0])
    # ray parallel to the triangle plane
    t = ray_triangles((0.25, 0.25, 1.0), (1.0, 0.0, 0.0), v0, v1, v2)
    assert np.isinf(t[0])


def test_pick_center_of_cube_hits_front_face():
    scene = _scene(make_grid(1, 1, 1))
    camera = Camera(eye=(0.5, 0.5, 4.0), target=(0.5, 0.5, 0.5), up=(0, 1, 0))
    hit = pick_surface_point(scene, camera, 32.0, 32.0, 64, 64)
    assert hit is not None
    anchor, ray, t = hit
    assert anchor[2] == pytest.approx(1.0)  # nearest boundary face, z = 1
    assert t == pytest.approx(3.0)
    assert ray[2] < 0


def test_pick_miss_returns_none():
    scene = _scene(make_grid(1, 1, 1))
    camera = Camera(eye=(0.5, 0.5, 4.0), target=(0.5, 0.5, 0.5), up=(0, 1, 0))
    assert pick_surface_point(scene, camera, 1.0, 1.0, 64, 64) is None
    assert make_object_lens(scene, camera, 1.0, 1.0, 64, 64, 0.5) is None


def test_object_lens_depth_pushes_along_stored_ray():
    scene = _scene(make_grid(1, 1, 1))
    camera = Camera(eye=(0.5, 0.5, 4.0), target=(0.5, 0.5, 0.5), up=(0, 1, 0))
    lens = make_object_lens(scene, camera, 32.0, 32.0, 64, 64, 0.5)
    assert lens is not None and lens.enabled and lens.mode == "object"
    p0 = lens.world_point()
    assert p0 == pytest.approx(lens.anchor)
    import dataclasses
    pushed = dataclasses.replace(lens, depth=0.25)
    p1 = pushed.world_point()
    assert np.linalg.norm(p1 - p0) == pytest.approx(0.25)
    # anchor and ray are immutable under the push
    assert pushed.anchor == lens.anchor and pushed.ray == lens.ray
