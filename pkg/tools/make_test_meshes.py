"""Generate the frozen irregular test meshes in tests/data/.

Run once; the outputs are committed and treated as fixed input data.

- bracket.mesh: a 6x6x6 grid with a 3x3x3 corner block removed, then
  gently warped. The re-entrant corner creates boundary edges of
  valence 3 (singular).
- rotor.mesh: a disk split into three quads around a central vertex
  (valence-3 interior axis after extrusion), each quad subdivided 4x4,
  extruded through 8 twisted layers.
"""
import os

import numpy as np

from hexlens.mesh import build_topology
from hexlens.meshio import write_mesh

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "data")


def bracket():
    n = 6
    hole = 3
    coords = {}
    cells = []

    def vid(i, j, k):
        return coords.setdefault((i, j, k), len(coords))

    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i >= n - hole and j >= n - hole and k >= n - hole:
                    continue
                cells.append([
                    vid(i, j, k), vid(i + 1, j, k),
                    vid(i + 1, j + 1, k), vid(i, j + 1, k),
                    vid(i, j, k + 1), vid(i + 1, j, k + 1),
                    vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1),
                ])
    verts = np.zeros((len(coords), 3))
    for (i, j, k), idx in coords.items():
        verts[idx] = (i, j, k)
    # gentle warp for a non-constant quality field
    verts[:, 0] += 0.15 * np.sin(verts[:, 2] * 0.8)
    verts[:, 1] += 0.1 * np.sin(verts[:, 0] * 0.5)
    return build_topology(verts, np.array(cells))


def rotor(k=4, nz=8):
    a = np.array([1.0, 0.0])
    b = np.array([-0.5, np.sqrt(3) / 2])
    c = np.array([-0.5, -np.sqrt(3) / 2])
    g = (a + b + c) / 3
    quads = [
        (a, (a + b) / 2, g, (a + c) / 2),
        (b, (b + c) / 2, g, (a + b) / 2),
        (c, (a + c) / 2, g, (b + c) / 2),
    ]
    coords = {}
    quads2d = []

    def vid2d(p):
        key = (round(p[0], 9), round(p[1], 9))
        return coords.setdefault(key, len(coords))

    for (p0, p1, p2, p3) in quads:
        for u in range(k):
            for v in range(k):
                corners = []
                for (du, dv) in ((0, 0), (1, 0), (1, 1), (0, 1)):
                    s, t = (u + du) / k, (v + dv) / k
                    p = ((1 - s) * (1 - t) * p0 + s * (1 - t) * p1
                         + s * t * p2 + (1 - s) * t * p3)
                    corners.append(vid2d(p))
                quads2d.append(corners)
    pts2d = np.zeros((len(coords), 2))
    for key, idx in coords.items():
        pts2d[idx] = key

    nv2d = len(pts2d)
    verts = np.zeros(((nz + 1) * nv2d, 3))
    for layer in range(nz + 1):
        ang = 0.6 * layer / nz
        rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        xy = pts2d @ rot.T
        verts[layer * nv2d:(layer + 1) * nv2d, :2] = xy
        verts[layer * nv2d:(layer + 1) * nv2d, 2] = layer * 0.35
    cells = []
    for layer in range(nz):
        lo = layer * nv2d
        hi = (layer + 1) * nv2d
        for q in quads2d:
            cells.append([lo + q[0], lo + q[1], lo + q[2], lo + q[3],
                          hi + q[0], hi + q[1], hi + q[2], hi + q[3]])
    return build_topology(verts, np.array(cells))


def main():
    os.makedirs(OUT, exist_ok=True)
    write_mesh(bracket(), os.path.join(OUT, "bracket.mesh"))
    write_mesh(rotor(), os.path.join(OUT, "rotor.mesh"))
    print("wrote bracket.mesh and rotor.mesh")


if __name__ == "__main__":
    main()
