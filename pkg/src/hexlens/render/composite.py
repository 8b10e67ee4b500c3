"""Per-pixel fragment lists, depth sorting, and front-to-back compositing.

Reference implementation used by tests and small renders; the tiled
pipeline mirrors the exact same semantics in a compiled kernel.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

ALPHA_CUTOFF = 0.999


class CapacityError(RuntimeError):
    """A per-pixel fragment list exceeded its capacity."""

    def __init__(self, required: int, capacity: int):
        super().__init__(
            f"per-pixel fragment capacity {capacity} exceeded; "
            f"required capacity is {required}"
        )
        self.required = required
        self.capacity = capacity


@dataclass
class FragmentRecord:
    x: int
    y: int
    depth: float
    color: tuple
    alpha: float
    kind: int


class FragmentBuffer:
    """Growable per-pixel lists of (depth, color, alpha, kind) records."""

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.pixels: list[list] = [[] for _ in range(width * height)]
        self.total = 0

    def add(self, x: int, y: int, depth: float, color, alpha: float, kind: int) -> None:
        if alpha <= 0.0:
            return
        self.pixels[y * self.width + x].append(
            (float(depth), (float(color[0]), float(color[1]), float(color[2])), float(alpha), kind)
        )
        self.total += 1

    def max_list_length(self) -> int:
        return max((len(p) for p in self.pixels), default=0)


def composite_pixel(fragments, background) -> np.ndarray:
    """Front-to-back alpha compositing of depth-sorted fragments.

    Sorting is stable in submission order for equal depths and uses a
    bounded priority queue. Compositing terminates early once the
    accumulated opacity exceeds the cutoff; residual transparency is
    filled with the background color.
    """
    heap = [(frag[0], seq, frag) for seq, frag in enumerate(fragments)]
    heapq.heapify(heap)
    rgb = np.zeros(3)
    acc = 0.0
    while heap:
        _, _, (depth, color, alpha, kind) = heapq.heappop(heap)
        rgb += (1.0 - acc) * alpha * np.asarray(color)
        acc += (1.0 - acc) * alpha
        if acc > ALPHA_CUTOFF:
            break
    rgb += (1.0 - acc) * np.asarray(background, dtype=np.float64)
    return rgb


def sort_and_composite(
    buffer: FragmentBuffer, background: str = "black", capacity: int | None = None
) -> np.ndarray:
    """Resolve a fragment buffer into a float RGBA image (H, W, 4).

    Raises CapacityError when any pixel's list exceeds `capacity`,
    reporting the required capacity.
    """
    if capacity is not None:
        longest = buffer.max_list_length()
        if longest > capacity:
            raise CapacityError(required=longest, capacity=capacity)
    bg = (0.0, 0.0, 0.0) if background == "black" else (1.0, 1.0, 1.0)
    image = np.zeros((buffer.height, buffer.width, 4), dtype=np.float64)
    image[..., 3] = 1.0
    for y in range(buffer.height):
        for x in range(buffer.width):
            image[y, x, :3] = composite_pixel(buffer.pixels[y * buffer.width + x], bg)
    return image


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
