"""Render parameters, lens state, transfer function, and camera."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class ParamError(ValueError):
    """Invalid render parameter value."""


@dataclass(frozen=True)
class TransferFunction:
    """Piecewise-linear map from importance in [0, 1] to (rgb, opacity).

    Control points are (x, (r, g, b), alpha) with x sorted ascending in
    [0, 1]. The default maps 0 -> blue, opacity 0 and 1 -> red, opacity 1.
    """

    points: tuple = (
        (0.0, (0.0, 0.0, 1.0), 0.0),
        (1.0, (1.0, 0.0, 0.0), 1.0),
    )

    def __post_init__(self):
        if len(self.points) < 2:
            raise ParamError("transfer function needs at least 2 control points")
        xs = [p[0] for p in self.points]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise ParamError("transfer function control points must be sorted")
        if xs[0] < 0.0 or xs[-1] > 1.0:
            raise ParamError("transfer function control points must lie in [0, 1]")
        for _, rgb, a in self.points:
            if len(rgb) != 3 or not (0.0 <= a <= 1.0):
                raise ParamError("transfer function colors must be rgb, alpha in [0, 1]")

    def arrays(self):
        xs = np.array([p[0] for p in self.points], dtype=np.float64)
        rgb = np.array([p[1] for p in self.points], dtype=np.float64)
        alpha = np.array([p[2] for p in self.points], dtype=np.float64)
        return xs, rgb, alpha

    def __call__(self, t: float) -> tuple[np.ndarray, float]:
        xs, rgb, alpha = self.arrays()
        t = min(max(float(t), xs[0]), xs[-1])
        k = int(np.searchsorted(xs, t, side="right")) - 1
        k = min(max(k, 0), len(xs) - 2)
        span = xs[k + 1] - xs[k]
        u = 0.0 if span == 0 else (t - xs[k]) / span
        return rgb[k] * (1 - u) + rgb[k + 1] * u, float(alpha[k] * (1 - u) + alpha[k + 1] * u)

    @staticmethod
    def from_json(obj) -> "TransferFunction":
        return TransferFunction(
            points=tuple((float(p["x"]), tuple(float(c) for c in p["rgb"]), float(p["alpha"])) for p in obj)
        )

    def to_json(self):
        return [{"x": x, "rgb": list(rgb), "alpha": a} for x, rgb, a in self.points]


@dataclass(frozen=True)
class LensState:
    """Screen- or object-space focus lens."""

    enabled: bool = False
    mode: str = "screen"                  # "screen" | "object"
    center: tuple = (0.0, 0.0)            # pixels (screen mode)
    radius: float = 100.0                 # pixels (screen mode)
    anchor: tuple = (0.0, 0.0, 0.0)       # model units (object mode)
    ray: tuple = (0.0, 0.0, -1.0)         # stored pick ray direction
    depth: float = 0.0                    # offset along the stored ray
    world_radius: float = 1.0             # model units (object mode)

    def __post_init__(self):
        if self.mode not in ("screen", "object"):
            raise ParamError(f"unknown lens mode {self.mode!r}")
        if self.enabled:
            r = self.radius if self.mode == "screen" else self.world_radius
            if r <= 0:
                raise ParamError("lens radius must be positive when enabled")

    def world_point(self) -> np.ndarray:
        a = np.asarray(self.anchor, dtype=np.float64)
        d = np.asarray(self.ray, dtype=np.float64)
        return a + self.depth * d

    @staticmethod
    def from_json(obj) -> "LensState":
        return LensState(
            enabled=bool(obj.get("enabled", False)),
            mode=obj.get("mode", "screen"),
            center=tuple(obj.get("center", (0.0, 0.0))),
            radius=float(obj.get("radius", 100.0)),
            anchor=tuple(obj.get("anchor", (0.0, 0.0, 0.0))),
            ray=tuple(obj.get("ray", (0.0, 0.0, -1.0))),
            depth=float(obj.get("depth", 0.0)),
            world_radius=float(obj.get("world_radius", 1.0)),
        )

    def to_json(self):
        return {
            "enabled": self.enabled,
            "mode": self.mode,
            "center": list(self.center),
            "radius": self.radius,
            "anchor": list(self.anchor),
            "ray": list(self.ray),
            "depth": self.depth,
            "world_radius": self.world_radius,
        }


@dataclass(frozen=True)
class Camera:
    """Perspective camera; looks from eye towards target."""

    eye: tuple = (3.0, 3.0, 3.0)
    target: tuple = (0.0, 0.0, 0.0)
    up: tuple = (0.0, 0.0, 1.0)
    fov_y_deg: float = 45.0
    near: float = 0.05
    far: float = 100.0

    def basis(self):
        eye = np.asarray(self.eye, dtype=np.float64)
        fwd = np.asarray(self.target, dtype=np.float64) - eye
        fwd = fwd / np.linalg.norm(fwd)
        up = np.asarray(self.up, dtype=np.float64)
        right = np.cross(fwd, up)
        right = right / np.linalg.norm(right)
        true_up = np.cross(right, fwd)
        return eye, right, true_up, fwd

    def world_to_view(self, pts: np.ndarray) -> np.ndarray:
        """View space: x right, y up, z = distance along the view axis."""
        eye, right, up, fwd = self.basis()
        rel = np.atleast_2d(pts) - eye
        return np.stack([rel @ right, rel @ up, rel @ fwd], axis=-1)

    def pixel_ray(self, px: float, py: float, width: int, height: int):
        eye, right, up, fwd = self.basis()
        f = 1.0 / np.tan(np.radians(self.fov_y_deg) / 2.0)
        aspect = width / height
        ndc_x = (px / width) * 2.0 - 1.0
        ndc_y = 1.0 - (py / height) * 2.0
        d = fwd + right * (ndc_x * aspect / f) + up * (ndc_y / f)
        return eye, d / np.linalg.norm(d)

    @staticmethod
    def framing(lo, hi, direction=(1.0, 0.8, 0.6), fov_y_deg: float = 45.0) -> "Camera":
        """Camera that frames the bounding box [lo, hi]."""
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        center = (lo + hi) / 2.0
        diag = float(np.linalg.norm(hi - lo))
        if diag == 0:
            diag = 1.0
        d = np.asarray(direction, dtype=np.float64)
        d = d / np.linalg.norm(d)
        eye = center + d * diag * 1.6
        return Camera(
            eye=tuple(eye),
            target=tuple(center),
            fov_y_deg=fov_y_deg,
            near=diag * 0.01,
            far=diag * 6.0,
        )

    @staticmethod
    def from_json(obj) -> "Camera":
        return Camera(
            eye=tuple(obj.get("eye", (3.0, 3.0, 3.0))),
            target=tuple(obj.get("target", (0.0, 0.0, 0.0))),
            up=tuple(obj.get("up", (0.0, 0.0, 1.0))),
            fov_y_deg=float(obj.get("fov_y_deg", 45.0)),
            near=float(obj.get("near", 0.05)),
            far=float(obj.get("far", 100.0)),
        )

    def to_json(self):
        return {
            "eye": list(self.eye),
            "target": list(self.target),
            "up": list(self.up),
            "fov_y_deg": self.fov_y_deg,
            "near": self.near,
            "far": self.far,
        }


@dataclass(frozen=True)
class RenderParams:
    """All user-tunable rendering knobs with explicit defaults."""

    width: int = 640
    height: int = 360
    w_base: float | None = None           # object units; None: 0.15 x mean edge length
    delta: float = 0.5                    # edge-importance threshold
    lod: int = 0                          # selected LoD level
    accent: float = 1.5                   # accentuation strength s (>= 1)
    face_alpha: float = 0.5               # user face opacity
    transfer_function: TransferFunction = field(default_factory=TransferFunction)
    background: str = "black"             # "black" | "white"
    halo_width_factor: float = 0.5
    halo_depth_offset: float = 0.002      # normalized depth
    desaturation: float = 0.3             # depth desaturation strength
    silhouette: bool = True
    silhouette_threshold: float = 0.01    # normalized depth jump
    frag_capacity: int | None = None      # per-pixel fragment list cap
    tile_size: int = 64

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ParamError("image size must be at least 1x1")
        if not (0.0 <= self.delta <= 1.1):
            raise ParamError("delta must lie in [0, 1.1]")
        if self.lod < 0:
            raise ParamError("lod must be >= 0")
        if self.accent < 1.0:
            raise ParamError("accentuation strength must be >= 1")
        if not (0.0 <= self.face_alpha <= 1.0):
            raise ParamError("face opacity must lie in [0, 1]")
        if self.background not in ("black", "white"):
            raise ParamError("background must be black or white")
        if self.w_base is not None and self.w_base <= 0:
            raise ParamError("w_base must be positive")

    def resolved_w_base(self, mesh) -> float:
        if self.w_base is not None:
            return self.w_base
        return 0.15 * mesh.mean_edge_length()

    def with_updates(self, **kw) -> "RenderParams":
        return replace(self, **kw)

    @staticmethod
    def from_json(obj) -> "RenderParams":
        kw = {}
        simple = [
            "width", "height", "w_base", "delta", "lod", "accent",
            "face_alpha", "background", "halo_width_factor",
            "halo_depth_offset", "desaturation", "silhouette",
            "silhouette_threshold", "frag_capacity", "tile_size",
        ]
        for key in simple:
            if key in obj:
                kw[key] = obj[key]
        if "transfer_function" in obj:
            kw["transfer_function"] = TransferFunction.from_json(obj["transfer_function"])
        return RenderParams(**kw)

    def to_json(self):
        return {
            "width": self.width,
            "height": self.height,
            "w_base": self.w_base,
            "delta": self.delta,
            "lod": self.lod,
            "accent": self.accent,
            "face_alpha": self.face_alpha,
            "transfer_function": self.transfer_function.to_json(),
            "background": self.background,
            "halo_width_factor": self.halo_width_factor,
            "halo_depth_offset": self.halo_depth_offset,
            "desaturation": self.desaturation,
            "silhouette": self.silhouette,
            "silhouette_threshold": self.silhouette_threshold,
            "frag_capacity": self.frag_capacity,
            "tile_size": self.tile_size,
        }
