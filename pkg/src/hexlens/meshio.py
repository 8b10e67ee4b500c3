"""Mesh file ingestion: MEDIT ``.mesh`` and VTK legacy ASCII loaders.

MEDIT hexahedra use the same corner convention as VTK (bottom quad, then
top quad), so indices are taken over verbatim after converting to 0-based.
Orientation of the input is recorded as load metadata, not repaired.
"""
from __future__ import annotations

import io

import numpy as np

from .mesh import HexMesh, MeshError, build_topology


class MeshFormatError(MeshError):
    """Malformed or unsupported mesh file content."""


_MEDIT_SKIP_SECTIONS = {
    "corners", "ridges", "requirededges", "requiredvertices", "normals",
    "tangents", "edges", "triangles", "quadrilaterals",
}
_MEDIT_UNSUPPORTED = {"tetrahedra", "prisms", "pyramids"}


def load_mesh(source, fmt: str | None = None) -> HexMesh:
    """Load a hex mesh from a path, byte stream, or text stream.

    fmt is "medit" or "vtk"; when None it is inferred from the filename
    extension (.mesh -> medit, .vtk -> vtk) or from the content header.
    """
    text, name = _read_text(source)
    if fmt is None:
        if name.endswith(".mesh"):
            fmt = "medit"
        elif name.endswith(".vtk"):
            fmt = "vtk"
        elif text.lstrip().startswith("# vtk"):
            fmt = "vtk"
        else:
            fmt = "medit"
    fmt = fmt.lower()
    if fmt == "medit":
        return _load_medit(text)
    if fmt == "vtk":
        return _load_vtk(text)
    raise MeshFormatError(f"unknown mesh format {fmt!r}")


def _read_text(source) -> tuple[str, str]:
    if isinstance(source, (str,)) and "\n" not in source:
        with open(source, "r") as fh:
            return fh.read(), source
    if isinstance(source, bytes):
        return source.decode("utf-8", errors="replace"), ""
    if isinstance(source, str):
        return source, ""
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    return data, getattr(source, "name", "") or ""


def _load_medit(text: str) -> HexMesh:
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens:
        raise MeshFormatError("malformed header: empty MEDIT file")
    pos = 0
    n = len(tokens)
    verts = None
    hexes = None

    def take(count):
        nonlocal pos
        if pos + count > n:
            raise MeshFormatError("malformed header: truncated MEDIT section")
        out = tokens[pos:pos + count]
        pos += count
        return out

    while pos < n:
        key = tokens[pos].lower()
        pos += 1
        if key == "meshversionformatted":
            take(1)
        elif key == "dimension":
            (dim,) = take(1)
            if int(dim) != 3:
                raise MeshFormatError("malformed header: MEDIT dimension must be 3")
        elif key == "vertices":
            (count,) = take(1)
            count = int(count)
            vals = take(count * 4)
            verts = np.array(vals, dtype=np.float64).reshape(count, 4)[:, :3]
        elif key == "hexahedra":
            (count,) = take(1)
            count = int(count)
            vals = take(count * 9)
            hexes = np.array(vals, dtype=np.int64).reshape(count, 9)[:, :8] - 1
        elif key in _MEDIT_UNSUPPORTED:
            raise MeshFormatError(f"unsupported cell type: MEDIT section {key!r}")
        elif key in _MEDIT_SKIP_SECTIONS:
            (count,) = take(1)
            count = int(count)
            width = {"edges": 3, "triangles": 4, "quadrilaterals": 5}.get(key, 1)
            take(count * width)
        elif key == "end":
            break
        else:
            raise MeshFormatError(f"malformed header: unknown MEDIT keyword {key!r}")
    if verts is None:
        raise MeshFormatError("malformed header: missing Vertices section")
    if hexes is None or len(hexes) == 0:
        raise MeshFormatError("empty mesh: no Hexahedra section")
    if hexes.min() < 0 or hexes.max() >= len(verts):
        raise MeshFormatError("vertex index out of range in Hexahedra section")
    return build_topology(verts, hexes)


def _load_vtk(text: str) -> HexMesh:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# vtk"):
        raise MeshFormatError("malformed header: missing '# vtk' magic line")
    tokens = []
    line_starts = []
    for ln in lines[1:]:
        line_starts.append(len(tokens))
        tokens.extend(ln.split())
    pos = 0
    n = len(tokens)

    def take(count):
        nonlocal pos
        if pos + count > n:
            raise MeshFormatError("malformed header: truncated VTK file")
        out = tokens[pos:pos + count]
        pos += count
        return out

    points = None
    conn = None
    cell_types = None
    cell_data: dict[str, np.ndarray] = {}
    point_data: dict[str, np.ndarray] = {}
    data_target = None

    # skip title line tokens until ASCII/BINARY marker
    while pos < n and tokens[pos].upper() not in ("ASCII", "BINARY"):
        pos += 1
    if pos >= n:
        raise MeshFormatError("malformed header: missing ASCII marker")
    if tokens[pos].upper() != "ASCII":
        raise MeshFormatError("malformed header: only ASCII VTK legacy is supported")
    pos += 1

    while pos < n:
        key = tokens[pos].upper()
        pos += 1
        if key == "DATASET":
            (kind,) = take(1)
            if kind.upper() != "UNSTRUCTURED_GRID":
                raise MeshFormatError(
                    "malformed header: DATASET must be UNSTRUCTURED_GRID"
                )
        elif key == "POINTS":
            count, _dtype = take(2)
            count = int(count)
            points = np.array(take(count * 3), dtype=np.float64).reshape(count, 3)
        elif key == "CELLS":
            count, total = take(2)
            count, total = int(count), int(total)
            raw = np.array(take(total), dtype=np.int64)
            conn = []
            i = 0
            for _ in range(count):
                m = raw[i]
                conn.append(raw[i + 1:i + 1 + m])
                i += 1 + m
        elif key == "CELL_TYPES":
            (count,) = take(1)
            cell_types = np.array(take(int(count)), dtype=np.int64)
        elif key == "CELL_DATA":
            take(1)
            data_target = cell_data
        elif key == "POINT_DATA":
            take(1)
            data_target = point_data
        elif key == "SCALARS":
            name, _dtype = take(2)
            ncomp = 1
            if pos < n and tokens[pos].isdigit():
                ncomp = int(take(1)[0])
            if pos < n and tokens[pos].upper() == "LOOKUP_TABLE":
                take(2)
            if data_target is None:
                raise MeshFormatError("malformed header: SCALARS before CELL_DATA/POINT_DATA")
            count = len(conn) if data_target is cell_data else len(points)
            vals = np.array(take(count * ncomp), dtype=np.float64)
            data_target[name] = vals if ncomp == 1 else vals.reshape(count, ncomp)
        elif key == "LOOKUP_TABLE":
            name, count = take(2)
            take(int(count) * 4)
        elif key in ("FIELD",):
            raise MeshFormatError("malformed header: FIELD data is not supported")
        else:
            raise MeshFormatError(f"malformed header: unknown VTK keyword {key!r}")

    if points is None or conn is None or cell_types is None:
        raise MeshFormatError("malformed header: missing POINTS/CELLS/CELL_TYPES")
    if len(conn) == 0:
        raise MeshFormatError("empty mesh: no cells")
    if np.any(cell_types != 12):
        bad = int(cell_types[cell_types != 12][0])
        raise MeshFormatError(f"unsupported cell type: VTK cell type {bad} (expected 12)")
    cells = np.empty((len(conn), 8), dtype=np.int64)
    for i, row in enumerate(conn):
        if len(row) != 8:
            raise MeshFormatError("unsupported cell type: hexahedron needs 8 vertices")
        cells[i] = row
    if cells.min() < 0 or cells.max() >= len(points):
        raise MeshFormatError("vertex index out of range in CELLS section")
    return build_topology(points, cells, cell_data=cell_data, point_data=point_data)


def write_mesh(mesh: HexMesh, target) -> None:
    """Write a mesh in MEDIT ASCII format (reference tags set to 0)."""
    buf = io.StringIO()
    buf.write("MeshVersionFormatted 2\nDimension 3\n")
    buf.write(f"Vertices\n{mesh.num_vertices}\n")
    for x, y, z in mesh.vertices:
        buf.write(f"{float(x)!r} {float(y)!r} {float(z)!r} 0\n")
    buf.write(f"Hexahedra\n{mesh.num_cells}\n")
    for cell in mesh.cells:
        buf.write(" ".join(str(int(v) + 1) for v in cell) + " 0\n")
    buf.write("End\n")
    data = buf.getvalue()
    if isinstance(target, str):
        with open(target, "w") as fh:
            fh.write(data)
    elif hasattr(target, "write"):
        try:
            target.write(data)
        except TypeError:
            target.write(data.encode("utf-8"))
    else:
        raise TypeError("target must be a path or writable stream")
