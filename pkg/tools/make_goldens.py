"""Render and freeze the golden regression images in tests/golden/.

Run once; the renderer is bit-identical across thread counts, so the
frozen PNGs are reproducible on any machine with the same dependency
versions.
"""
import os
import sys

from PIL import Image

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

from golden_scenes import SCENES  # noqa: E402

from hexlens.render import render  # noqa: E402

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "golden")


def main():
    os.makedirs(OUT, exist_ok=True)
    for name, build in SCENES.items():
        scene, camera, params, lens = build()
        result = render(scene, camera=camera, params=params, lens=lens)
        path = os.path.join(OUT, f"{name}.png")
        Image.fromarray(result.to_uint8(), mode="RGBA").save(path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
