"""Mesh analysis bundles shared by the CLI and the session service.

A bundle holds everything derived from one mesh load: the quality field,
its importance aggregation, the sheet/LoD structure, and the render-ready
scene. All of it is immutable after construction.
"""
from __future__ import annotations

import re
import sys
import time
from dataclasses import dataclass

import numpy as np

from .mesh import HexMesh, make_grid, make_twisted_grid, singular_edges
from .meshio import load_mesh
from .quality import AttributeField, importance_field, scaled_jacobian
from .render import Camera, Scene
from .sheets import LodEdgeStructure, build_lod, extract_sheets, merge_log_json

_GRID_RE = re.compile(r"^grid:(\d+)x(\d+)x(\d+)$")
_TWIST_RE = re.compile(r"^twist:(\d+)$")


def load_source(source: str) -> HexMesh:
    """Load a mesh file, or build a synthetic mesh from a spec string.

    Synthetic specs: ``grid:N1xN2xN3`` (axis-aligned grid) and
    ``twist:N`` (an N^3 grid twisted around its vertical axis).
    """
    m = _GRID_RE.match(source)
    if m:
        return make_grid(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    m = _TWIST_RE.match(source)
    if m:
        return make_twisted_grid(int(m.group(1)))
    return load_mesh(source)


@dataclass
class MeshBundle:
    mesh: HexMesh
    metric: str
    base_field: AttributeField
    importance: AttributeField
    lod: LodEdgeStructure
    sheet_count: int
    scene: Scene
    lod_seconds: float

    def summary(self) -> dict:
        mesh = self.mesh
        sing = singular_edges(mesh)
        return {
            "cells": mesh.num_cells,
            "vertices": mesh.num_vertices,
            "edges": mesh.num_edges,
            "faces": mesh.num_faces,
            "boundary_faces": int(mesh.boundary_face.sum()),
            "singular_edges": int(len(sing.edges)),
            "singular_valence1": int(len(sing.valence_one)),
            "sheets": self.sheet_count,
            "metric": self.metric,
            "metric_range": list(self.base_field.range),
            "buffer_bytes": mesh_buffer_bytes(mesh),
        }

    def lod_summary(self) -> dict:
        return {
            "level_count": self.lod.level_count,
            "initial_components": self.lod.initial_component_count,
            "merges": len(self.lod.merge_log),
            "lod_seconds": round(self.lod_seconds, 6),
            "edges_per_level": [
                int((self.lod.e_level == k).sum())
                for k in range(self.lod.level_count)
            ],
        }

    def lod_lines(self) -> dict:
        """Edge line sets per level: endpoints plus edge index."""
        mesh = self.mesh
        levels = []
        for k in range(self.lod.level_count):
            ids = np.nonzero(self.lod.e_level == k)[0]
            segs = np.concatenate(
                [mesh.vertices[mesh.edges[ids, 0]], mesh.vertices[mesh.edges[ids, 1]]],
                axis=1,
            ) if len(ids) else np.empty((0, 6))
            levels.append({
                "level": k,
                "edges": [int(e) for e in ids],
                "segments": [[float(v) for v in row] for row in segs],
            })
        return {"level_count": self.lod.level_count, "levels": levels}

    def merge_log(self) -> list[dict]:
        return merge_log_json(self.lod)

    def default_camera(self) -> Camera:
        return Camera.framing(*self.mesh.bounds())


def mesh_buffer_bytes(mesh: HexMesh) -> int:
    """Estimated size of the core mesh buffers (positions + indices)."""
    return int(
        mesh.vertices.nbytes + mesh.cells.nbytes + mesh.edges.nbytes
        + mesh.faces.nbytes + mesh.cell_edges.nbytes + mesh.cell_faces.nbytes
        + mesh.face_edges.nbytes + mesh.face_cells.nbytes
    )


def resolve_metric(mesh: HexMesh, metric: str) -> AttributeField:
    if metric == "scaled-jacobian":
        return scaled_jacobian(mesh)
    if metric.startswith("field:"):
        name = metric[len("field:"):]
        if name not in mesh.cell_data:
            raise KeyError(
                f"mesh has no per-cell field {name!r}; "
                f"available: {sorted(mesh.cell_data)}"
            )
        values = np.asarray(mesh.cell_data[name], dtype=np.float64)
        return AttributeField(name=name, per_cell=values)
    raise ValueError(f"unknown metric {metric!r}")


def build_bundle(mesh: HexMesh, metric: str = "scaled-jacobian") -> MeshBundle:
    base = resolve_metric(mesh, metric)
    imp = importance_field(mesh, base)
    t0 = time.perf_counter()
    sheets = extract_sheets(mesh)
    lod = build_lod(mesh, sheets)
    lod_seconds = time.perf_counter() - t0
    scene = Scene(
        mesh,
        vertex_importance=imp.per_vertex,
        edge_importance=imp.per_edge,
        e_level=lod.e_level,
    )
    return MeshBundle(
        mesh=mesh,
        metric=metric,
        base_field=base,
        importance=imp,
        lod=lod,
        sheet_count=len(sheets),
        scene=scene,
        lod_seconds=lod_seconds,
    )


def log(msg: str) -> None:
    print(msg, file=sys.stderr)
