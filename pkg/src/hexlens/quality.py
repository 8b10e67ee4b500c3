"""Per-cell deformation measures and their aggregation to vertices/edges."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .mesh import HEX_FACE_CORNERS, HexMesh

# Verdict-style corner frames: for corner k, the three corner-order
# neighbors whose edge vectors form a right-handed frame on a unit cube.
CORNER_NEIGHBORS = np.array(
    [
        (1, 3, 4), (2, 0, 5), (3, 1, 6), (0, 2, 7),
        (7, 5, 0), (4, 6, 1), (5, 7, 2), (6, 4, 3),
    ],
    dtype=np.int64,
)

_ZERO_EDGE_EPS = 1e-30


@dataclass
class AttributeField:
    """Scalar field over cells with optional vertex/edge aggregations."""

    name: str
    per_cell: np.ndarray
    per_vertex: np.ndarray | None = None
    per_edge: np.ndarray | None = None
    degenerate: np.ndarray | None = None   # per-cell flags, metric-specific

    @property
    def range(self) -> tuple[float, float]:
        return float(self.per_cell.min()), float(self.per_cell.max())


@dataclass
class CellVolume:
    """Tetrakis-hexahedron cell volumes (24 tets per hex)."""

    values: np.ndarray
    inverted: np.ndarray = field(default=None)


def scaled_jacobian(mesh: HexMesh) -> AttributeField:
    """Per-cell scaled Jacobian: min over the 8 corner frames of the
    determinant of unit-normalized corner edge vectors. Cells with a
    zero-length corner edge get J = 0 and a degeneracy flag.
    """
    pos = mesh.vertices[mesh.cells]                     # (C, 8, 3)
    corner = pos[:, :, None, :]                         # (C, 8, 1, 3)
    nbr = pos[:, CORNER_NEIGHBORS, :]                   # (C, 8, 3, 3)
    e = nbr - corner                                    # (C, 8, 3, 3)
    norms = np.linalg.norm(e, axis=-1)                  # (C, 8, 3)
    degenerate_corner = norms < _ZERO_EDGE_EPS
    safe = np.where(degenerate_corner[..., None], 1.0, norms[..., None])
    dets = np.linalg.det(e / safe)                      # (C, 8)
    dets = np.where(degenerate_corner.any(axis=-1), 0.0, dets)
    j = dets.min(axis=1)
    degenerate = degenerate_corner.any(axis=(1, 2))
    j = np.where(degenerate, 0.0, j)
    # clamp float overshoot only
    j = np.clip(j, -1.0 - 1e-9, 1.0 + 1e-9)
    j = np.clip(j, -1.0, 1.0)
    return AttributeField(name="scaled_jacobian", per_cell=j, degenerate=degenerate)


def cell_volumes(mesh: HexMesh) -> CellVolume:
    """Signed tetrakis-hexahedron volume per cell: 24 tets spanned by
    (face edge, face centroid, cell centroid) over the 6 outward faces.
    """
    pos = mesh.vertices[mesh.cells]                     # (C, 8, 3)
    cc = pos.mean(axis=1)                               # (C, 3)
    vol = np.zeros(mesh.num_cells)
    for f in range(6):
        quad = pos[:, HEX_FACE_CORNERS[f], :]           # (C, 4, 3)
        fc = quad.mean(axis=1)                          # (C, 3)
        for k in range(4):
            a = quad[:, k] - cc
            b = quad[:, (k + 1) % 4] - cc
            c = fc - cc
            vol += np.einsum("ij,ij->i", np.cross(a, b), c)
    vol /= 6.0
    return CellVolume(values=vol, inverted=vol < 0)


def vertex_importance(mesh: HexMesh, per_cell: np.ndarray) -> np.ndarray:
    """Max of the per-cell value over the cells incident to each vertex.

    Isolated vertices get 0.
    """
    out = np.zeros(mesh.num_vertices)
    off, cells = mesh._vertex_cell_offsets, mesh._vertex_cell_values
    has = off[1:] > off[:-1]
    out[has] = np.maximum.reduceat(per_cell[cells], off[:-1][has])
    return out


def edge_importance(mesh: HexMesh, per_cell: np.ndarray) -> np.ndarray:
    """Max of the per-cell value over the cells incident to each edge."""
    off, cells = mesh._edge_cell_offsets, mesh._edge_cell_values
    return np.maximum.reduceat(per_cell[cells], off[:-1])


def weighted_vertex_attribute(
    mesh: HexMesh, per_cell: np.ndarray, volumes: CellVolume
) -> np.ndarray:
    """Volume-weighted arithmetic mean per vertex: sum(V_i a_i) / sum(V_i).

    Vertices whose incident volumes sum to 0 fall back to the unweighted
    mean of the incident values.
    """
    off, cells = mesh._vertex_cell_offsets, mesh._vertex_cell_values
    v = volumes.values[cells]
    a = per_cell[cells]
    num = np.add.reduceat(v * a, off[:-1])
    den = np.add.reduceat(v, off[:-1])
    counts = (off[1:] - off[:-1]).astype(np.float64)
    plain = np.add.reduceat(a, off[:-1]) / np.maximum(counts, 1.0)
    bad = den == 0
    return np.where(bad, plain, num / np.where(bad, 1.0, den))


def weighted_jacobian_attribute(
    mesh: HexMesh, jacobians: np.ndarray, volumes: CellVolume
) -> np.ndarray:
    """Volume-weighted harmonic mean per vertex: sum(V_i) / sum(V_i / J_i).

    Cells with J_i = 0 (degenerate) are excluded from both sums; vertices
    with only degenerate incident cells get 0.
    """
    off, cells = mesh._vertex_cell_offsets, mesh._vertex_cell_values
    v = volumes.values[cells].astype(np.float64)
    j = jacobians[cells]
    ok = j != 0
    v = np.where(ok, v, 0.0)
    num = np.add.reduceat(v, off[:-1])
    den = np.add.reduceat(np.where(ok, v / np.where(ok, j, 1.0), 0.0), off[:-1])
    bad = den == 0
    return np.where(bad, 0.0, num / np.where(bad, 1.0, den))


def importance_field(mesh: HexMesh, base: AttributeField, orientation: str = "auto") -> AttributeField:
    """Normalize a field to [0, 1] importance and aggregate.

    For the scaled Jacobian (orientation "invert" / "auto" on a Jacobian
    field) high deformation (low J) maps to high importance; generic
    fields map increasing value to increasing importance. Vertex and edge
    aggregation is max-type, matching the importance contract.
    """
    lo, hi = base.range
    span = hi - lo
    vals = base.per_cell
    if orientation == "auto":
        orientation = "invert" if base.name == "scaled_jacobian" else "direct"
    if span <= 0:
        imp = np.zeros_like(vals)
    elif orientation == "invert":
        imp = (hi - vals) / span
    else:
        imp = (vals - lo) / span
    return AttributeField(
        name=f"importance({base.name})",
        per_cell=imp,
        per_vertex=vertex_importance(mesh, imp),
        per_edge=edge_importance(mesh, imp),
        degenerate=base.degenerate,
    )


def field_summary(field: AttributeField, bins: int = 32) -> dict:
    """JSON-ready summary: min/max and a fixed-bin histogram."""
    lo, hi = field.range
    hist, edges = np.histogram(field.per_cell, bins=bins, range=(lo, hi if hi > lo else lo + 1.0))
    return {
        "name": field.name,
        "min": lo,
        "max": hi,
        "bins": bins,
        "histogram": hist.tolist(),
        "bin_edges": edges.tolist(),
    }


def write_field_summary(field: AttributeField, path: str, bins: int = 32) -> None:
    with open(path, "w") as fh:
        json.dump(field_summary(field, bins), fh, indent=2)


def export_vtk_scalars(mesh: HexMesh, fields: list[AttributeField], target) -> None:
    """Export the mesh plus per-cell (and, when present, per-vertex)
    scalars as a VTK legacy ASCII file.
    """
    lines = ["# vtk DataFile Version 3.0", "hexlens export", "ASCII",
             "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.num_vertices} double")
    lines.extend(
        f"{float(x)!r} {float(y)!r} {float(z)!r}" for x, y, z in mesh.vertices
    )
    lines.append(f"CELLS {mesh.num_cells} {mesh.num_cells * 9}")
    lines.extend("8 " + " ".join(str(int(v)) for v in c) for c in mesh.cells)
    lines.append(f"CELL_TYPES {mesh.num_cells}")
    lines.extend("12" for _ in range(mesh.num_cells))
    lines.append(f"CELL_DATA {mesh.num_cells}")
    for f in fields:
        name = f.name.replace(" ", "_").replace("(", "_").replace(")", "")
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(repr(float(v)) for v in f.per_cell)
    vfields = [f for f in fields if f.per_vertex is not None]
    if vfields:
        lines.append(f"POINT_DATA {mesh.num_vertices}")
        for f in vfields:
            name = f.name.replace(" ", "_").replace("(", "_").replace(")", "")
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(repr(float(v)) for v in f.per_vertex)
    data = "\n".join(lines) + "\n"
    if isinstance(target, str):
        with open(target, "w") as fh:
            fh.write(data)
    else:
        target.write(data)
