"""Hexahedral mesh data model and topology construction.

Corner ordering follows the VTK hexahedron convention: vertices 0-3 form
the bottom quad counter-clockwise (seen from below, i.e. counter-clockwise
around +z), vertices 4-7 the top quad directly above them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Local (corner index) pairs of the 12 hex edges, VTK corner convention.
HEX_EDGE_CORNERS = np.array(
    [
        (0, 1), (1, 2), (2, 3), (3, 0),   # bottom ring
        (4, 5), (5, 6), (6, 7), (7, 4),   # top ring
        (0, 4), (1, 5), (2, 6), (3, 7),   # verticals
    ],
    dtype=np.int64,
)

# Local corner quads of the 6 hex faces, outward-oriented for a positively
# oriented cell.
HEX_FACE_CORNERS = np.array(
    [
        (0, 3, 2, 1),   # bottom (-z)
        (4, 5, 6, 7),   # top (+z)
        (0, 1, 5, 4),   # front (-y)
        (1, 2, 6, 5),   # right (+x)
        (2, 3, 7, 6),   # back (+y)
        (3, 0, 4, 7),   # left (-x)
    ],
    dtype=np.int64,
)

# The 12 edges of a hex partition into 3 classes of 4 topologically
# parallel edges (same combinatorial direction). Indices into
# HEX_EDGE_CORNERS.
HEX_PARALLEL_CLASSES = np.array(
    [
        (0, 2, 4, 6),
        (1, 3, 5, 7),
        (8, 9, 10, 11),
    ],
    dtype=np.int64,
)

_CLASS_OF_LOCAL_EDGE = np.empty(12, dtype=np.int64)
for _c, _members in enumerate(HEX_PARALLEL_CLASSES):
    _CLASS_OF_LOCAL_EDGE[_members] = _c


class MeshError(ValueError):
    """Raised for topologically or structurally invalid mesh input."""


@dataclass
class HexMesh:
    """Indexed hex mesh with full derived topology.

    Edge and face identity is the sorted vertex tuple; edges and faces are
    deduplicated and indexed in sorted-key order, so topology construction
    is reproducible across runs.
    """

    vertices: np.ndarray          # (V, 3) float64
    cells: np.ndarray             # (C, 8) int64
    edges: np.ndarray             # (E, 2) int64, each row sorted
    faces: np.ndarray             # (F, 4) int64, corner order of first use
    cell_edges: np.ndarray        # (C, 12) int64
    cell_faces: np.ndarray        # (C, 6) int64
    face_edges: np.ndarray        # (F, 4) int64
    face_cells: np.ndarray        # (F, 2) int64, second entry -1 on boundary
    boundary_face: np.ndarray     # (F,) bool
    boundary_edge: np.ndarray     # (E,) bool
    boundary_vertex: np.ndarray   # (V,) bool
    edge_valence: np.ndarray      # (E,) int64
    # CSR incidence: element -> incident cells
    _edge_cell_offsets: np.ndarray = field(repr=False, default=None)
    _edge_cell_values: np.ndarray = field(repr=False, default=None)
    _vertex_cell_offsets: np.ndarray = field(repr=False, default=None)
    _vertex_cell_values: np.ndarray = field(repr=False, default=None)
    # Named scalar fields ingested from file (e.g. VTK CELL_DATA/POINT_DATA)
    cell_data: dict = field(default_factory=dict)
    point_data: dict = field(default_factory=dict)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def edge_cell_ids(self, edge: int) -> np.ndarray:
        o = self._edge_cell_offsets
        return self._edge_cell_values[o[edge]:o[edge + 1]]

    def vertex_cell_ids(self, vertex: int) -> np.ndarray:
        o = self._vertex_cell_offsets
        return self._vertex_cell_values[o[vertex]:o[vertex + 1]]

    def mean_edge_length(self) -> float:
        a = self.vertices[self.edges[:, 0]]
        b = self.vertices[self.edges[:, 1]]
        return float(np.linalg.norm(b - a, axis=1).mean())

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


@dataclass
class SingularEdgeSet:
    """Edges whose (boundary, valence) pair is irregular."""

    edges: np.ndarray        # (S,) edge indices
    valences: np.ndarray     # (S,)
    boundary: np.ndarray     # (S,) bool

    @property
    def valence_one(self) -> np.ndarray:
        return self.edges[self.valences == 1]


def _csr(keys: np.ndarray, values: np.ndarray, nkeys: int):
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=nkeys)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return offsets, values[order]


def build_topology(vertices, cells, cell_data=None, point_data=None) -> HexMesh:
    """Build a HexMesh with deduplicated edges/faces and incidence maps.

    Raises MeshError for out-of-range indices, degenerate cells (repeated
    vertex index), duplicate cells, or faces shared by more than two cells.
    """
    vertices = np.ascontiguousarray(vertices, dtype=np.float64).reshape(-1, 3)
    cells = np.ascontiguousarray(cells, dtype=np.int64).reshape(-1, 8)
    nv, nc = len(vertices), len(cells)
    if nc == 0:
        raise MeshError("empty mesh: no hexahedra")
    if cells.min() < 0 or cells.max() >= nv:
        raise MeshError("vertex index out of range in cell list")
    sorted_corners = np.sort(cells, axis=1)
    if np.any(sorted_corners[:, :-1] == sorted_corners[:, 1:]):
        bad = int(np.nonzero(np.any(sorted_corners[:, :-1] == sorted_corners[:, 1:], axis=1))[0][0])
        raise MeshError(f"degenerate cell {bad}: repeated vertex index")
    uniq = np.unique(sorted_corners, axis=0)
    if len(uniq) != nc:
        raise MeshError("duplicate cells present")

    # Edges: canonical key = sorted vertex pair; np.unique assigns indices
    # in sorted-key order.
    edge_pairs = np.sort(cells[:, HEX_EDGE_CORNERS], axis=-1).reshape(-1, 2)
    edges, edge_inv = np.unique(edge_pairs, axis=0, return_inverse=True)
    cell_edges = edge_inv.reshape(nc, 12).astype(np.int64)
    ne = len(edges)

    # Faces: canonical key = sorted vertex quad; keep the corner order of
    # the first referencing (cell, slot) for rendering.
    face_quads = cells[:, HEX_FACE_CORNERS].reshape(-1, 4)
    face_keys = np.sort(face_quads, axis=-1)
    _, face_first, face_inv = np.unique(
        face_keys, axis=0, return_index=True, return_inverse=True
    )
    faces = face_quads[face_first]
    cell_faces = face_inv.reshape(nc, 6).astype(np.int64)
    nf = len(faces)

    # face -> cells (at most 2)
    face_counts = np.bincount(face_inv, minlength=nf)
    if face_counts.max() > 2:
        raise MeshError("face shared by more than two cells")
    face_cells = np.full((nf, 2), -1, dtype=np.int64)
    flat_cells = np.repeat(np.arange(nc, dtype=np.int64), 6)
    order = np.argsort(face_inv, kind="stable")
    sorted_faces = face_inv[order]
    sorted_cells = flat_cells[order]
    _, first_idx = np.unique(sorted_faces, return_index=True)
    face_cells[:, 0] = sorted_cells[first_idx]
    interior = face_counts == 2
    face_cells[interior, 1] = sorted_cells[first_idx[interior] + 1]

    # face -> edges via canonical-pair lookup
    edge_id = {(int(a), int(b)): i for i, (a, b) in enumerate(edges)}
    fe = np.empty((nf, 4), dtype=np.int64)
    rolled = np.roll(faces, -1, axis=1)
    lo = np.minimum(faces, rolled)
    hi = np.maximum(faces, rolled)
    for i in range(nf):
        for k in range(4):
            fe[i, k] = edge_id[(int(lo[i, k]), int(hi[i, k]))]

    boundary_face = ~interior
    boundary_edge = np.zeros(ne, dtype=bool)
    boundary_edge[fe[boundary_face].ravel()] = True
    boundary_vertex = np.zeros(nv, dtype=bool)
    boundary_vertex[faces[boundary_face].ravel()] = True

    eo, ev = _csr(cell_edges.ravel(), np.repeat(np.arange(nc, dtype=np.int64), 12), ne)
    vo, vv = _csr(cells.ravel(), np.repeat(np.arange(nc, dtype=np.int64), 8), nv)
    edge_valence = (eo[1:] - eo[:-1]).astype(np.int64)

    return HexMesh(
        vertices=vertices,
        cells=cells,
        edges=edges.astype(np.int64),
        faces=faces.astype(np.int64),
        cell_edges=cell_edges,
        cell_faces=cell_faces,
        face_edges=fe,
        face_cells=face_cells,
        boundary_face=boundary_face,
        boundary_edge=boundary_edge,
        boundary_vertex=boundary_vertex,
        edge_valence=edge_valence,
        _edge_cell_offsets=eo,
        _edge_cell_values=ev,
        _vertex_cell_offsets=vo,
        _vertex_cell_values=vv,
        cell_data=dict(cell_data or {}),
        point_data=dict(point_data or {}),
    )


def singular_edges(mesh: HexMesh) -> SingularEdgeSet:
    """Edges violating the regular (boundary, 2) / (interior, 4) valence."""
    val = mesh.edge_valence
    bnd = mesh.boundary_edge
    bad = np.where(bnd, val != 2, val != 4)
    idx = np.nonzero(bad)[0]
    return SingularEdgeSet(edges=idx, valences=val[idx], boundary=bnd[idx])


def topologically_parallel_edges(mesh: HexMesh, cell: int, edge: int) -> np.ndarray:
    """The 3 edges of `cell` topologically parallel to `edge`."""
    local = mesh.cell_edges[cell]
    slots = np.nonzero(local == edge)[0]
    if len(slots) == 0:
        raise MeshError(f"edge {edge} does not belong to cell {cell}")
    cls = _CLASS_OF_LOCAL_EDGE[slots[0]]
    members = HEX_PARALLEL_CLASSES[cls]
    return local[members[members != slots[0]]]


def make_grid(n1: int, n2: int, n3: int, spacing: float = 1.0) -> HexMesh:
    """Axis-aligned n1 x n2 x n3 cell grid with unit (scaled) cells."""
    xs = np.arange(n1 + 1) * spacing
    ys = np.arange(n2 + 1) * spacing
    zs = np.arange(n3 + 1) * spacing
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    verts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def vid(i, j, k):
        return (i * (n2 + 1) + j) * (n3 + 1) + k

    cells = []
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                cells.append(
                    [
                        vid(i, j, k), vid(i + 1, j, k),
                        vid(i + 1, j + 1, k), vid(i, j + 1, k),
                        vid(i, j, k + 1), vid(i + 1, j, k + 1),
                        vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1),
                    ]
                )
    return build_topology(verts, np.array(cells))


def make_twisted_grid(n: int, twist: float = 0.9) -> HexMesh:
    """Cubic n^3 grid twisted around its vertical axis, for demo scenes.

    Each z-layer of vertices is rotated proportionally to its height, which
    yields a smoothly varying scaled-Jacobian field.
    """
    base = make_grid(n, n, n)
    v = base.vertices.copy()
    c = n / 2.0
    t = v[:, 2] / n
    ang = twist * t
    x = v[:, 0] - c
    y = v[:, 1] - c
    v[:, 0] = c + np.cos(ang) * x - np.sin(ang) * y
    v[:, 1] = c + np.sin(ang) * x + np.cos(ang) * y
    return build_topology(v, base.cells)
