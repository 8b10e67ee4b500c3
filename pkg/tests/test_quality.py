import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexlens.mesh import build_topology, make_grid
from hexlens.meshio import load_mesh
from hexlens.quality import (
    AttributeField,
    cell_volumes,
    edge_importance,
    field_summary,
    importance_field,
    scaled_jacobian,
    vertex_importance,
    weighted_jacobian_attribute,
    weighted_vertex_attribute,
    export_vtk_scalars,
)


def _hex(verts):
    return build_topology(np.asarray(verts, dtype=np.float64),
                          np.array([[0, 1, 2, 3, 4, 5, 6, 7]]))


UNIT = [
    [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
    [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
]


def test_unit_cube_jacobian_exact(cube):
    j = scaled_jacobian(cube)
    assert abs(j.per_cell[0] - 1.0) < 1e-12
    assert not j.degenerate[0]


def test_unit_cube_volume_exact(cube):
    v = cell_volumes(cube)
    assert abs(v.values[0] - 1.0) < 1e-12
    assert not v.inverted[0]


def test_sheared_cube_jacobian():
    verts = np.array(UNIT, dtype=np.float64)
    verts[4:, 0] += 1.0        # top face offset by (1, 0, 0)
    mesh = _hex(verts)
    j = scaled_jacobian(mesh).per_cell[0]
    assert abs(j - 1.0 / np.sqrt(2.0)) < 1e-12


def test_shear_volume_invariance():
    verts = np.array(UNIT, dtype=np.float64)
    verts[:, 0] += verts[:, 2]          # x <- x + z, unimodular
    mesh = _hex(verts)
    assert abs(cell_volumes(mesh).values[0] - 1.0) < 1e-9


def test_scaled_cube_volume():
    mesh = _hex(np.array(UNIT) * 2.0)
    assert abs(cell_volumes(mesh).values[0] - 8.0) < 1e-12


def test_degenerate_cell_jacobian_zero():
    verts = np.array(UNIT, dtype=np.float64)
    verts[1] = verts[0]                 # coincident corners, distinct indices
    mesh = _hex(verts)
    j = scaled_jacobian(mesh)
    assert j.per_cell[0] == 0.0
    assert j.degenerate[0]


def test_inverted_cell_negative_volume():
    verts = np.array(UNIT, dtype=np.float64)
    verts[:, 2] *= -1.0                 # mirror -> negative orientation
    mesh = _hex(verts)
    v = cell_volumes(mesh)
    assert v.values[0] < 0
    assert v.inverted[0]


def test_rigid_motion_invariance():
    rng = np.random.default_rng(3)
    mesh = make_grid(2, 2, 1)
    j0 = scaled_jacobian(mesh).per_cell
    v0 = cell_volumes(mesh).values
    # random rotation (QR) + translation
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    moved = build_topology(mesh.vertices @ q.T + rng.normal(size=3), mesh.cells)
    assert np.abs(scaled_jacobian(moved).per_cell - j0).max() < 1e-9
    assert np.abs(cell_volumes(moved).values - v0).max() < 1e-9


def test_volume_additivity():
    mesh = make_grid(3, 2, 4, spacing=0.5)
    total = cell_volumes(mesh).values.sum()
    lo, hi = mesh.bounds()
    assert abs(total - np.prod(hi - lo)) / np.prod(hi - lo) < 1e-9


def test_vertex_importance_max():
    mesh = make_grid(2, 1, 1)
    field = np.array([0.2, 0.9])
    vi = vertex_importance(mesh, field)
    # the 4 vertices on the shared face touch both cells -> 0.9
    shared = [v for v in range(mesh.num_vertices)
              if len(mesh.vertex_cell_ids(v)) == 2]
    assert len(shared) == 4
    assert all(vi[v] == 0.9 for v in shared)
    only_first = [v for v in range(mesh.num_vertices)
                  if list(mesh.vertex_cell_ids(v)) == [0]]
    assert all(vi[v] == 0.2 for v in only_first)


def test_vertex_importance_constant_identity():
    mesh = make_grid(2, 2, 2)
    c = 0.37
    vi = vertex_importance(mesh, np.full(mesh.num_cells, c))
    assert (vi == c).all()


def test_edge_importance_max():
    mesh = make_grid(2, 1, 1)
    field = np.array([0.3, 0.9])
    ei = edge_importance(mesh, field)
    for e in range(mesh.num_edges):
        cells = mesh.edge_cell_ids(e)
        assert ei[e] == field[cells].max()


def test_weighted_vertex_attribute_cases():
    mesh = make_grid(2, 1, 1)

    class V:
        pass

    # equal volumes: mean
    from hexlens.quality import CellVolume
    vols = CellVolume(values=np.array([1.0, 1.0]))
    a = weighted_vertex_attribute(mesh, np.array([2.0, 4.0]), vols)
    shared = [v for v in range(mesh.num_vertices)
              if len(mesh.vertex_cell_ids(v)) == 2]
    assert all(abs(a[v] - 3.0) < 1e-12 for v in shared)
    # V = {1,3}, a = {0,4} -> 3
    vols = CellVolume(values=np.array([1.0, 3.0]))
    a = weighted_vertex_attribute(mesh, np.array([0.0, 4.0]), vols)
    assert all(abs(a[v] - 3.0) < 1e-12 for v in shared)
    # single incident cell: identity
    solo = [v for v in range(mesh.num_vertices)
            if list(mesh.vertex_cell_ids(v)) == [0]]
    assert all(abs(a[v] - 0.0) < 1e-12 for v in solo)


def test_weighted_jacobian_cases():
    mesh = make_grid(2, 1, 1)
    from hexlens.quality import CellVolume
    shared = [v for v in range(mesh.num_vertices)
              if len(mesh.vertex_cell_ids(v)) == 2]
    # V = {1,1}, J = {0.5, 1} -> 2/3
    j = weighted_jacobian_attribute(
        mesh, np.array([0.5, 1.0]), CellVolume(values=np.array([1.0, 1.0])))
    assert all(abs(j[v] - 2.0 / 3.0) < 1e-12 for v in shared)
    # V = {2,1}, J = {1, 0.25} -> 0.5
    j = weighted_jacobian_attribute(
        mesh, np.array([1.0, 0.25]), CellVolume(values=np.array([2.0, 1.0])))
    assert all(abs(j[v] - 0.5) < 1e-12 for v in shared)
    # constant J -> J
    j = weighted_jacobian_attribute(
        mesh, np.array([0.7, 0.7]), CellVolume(values=np.array([2.0, 5.0])))
    assert np.abs(j - 0.7).max() < 1e-12


def test_weighted_jacobian_excludes_degenerate():
    mesh = make_grid(2, 1, 1)
    from hexlens.quality import CellVolume
    j = weighted_jacobian_attribute(
        mesh, np.array([0.0, 0.5]), CellVolume(values=np.array([1.0, 1.0])))
    shared = [v for v in range(mesh.num_vertices)
              if len(mesh.vertex_cell_ids(v)) == 2]
    assert all(abs(j[v] - 0.5) < 1e-12 for v in shared)
    # all incident degenerate -> 0
    j = weighted_jacobian_attribute(
        mesh, np.zeros(2), CellVolume(values=np.ones(2)))
    assert (j == 0).all()


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_harmonic_le_arithmetic(seed):
    rng = np.random.default_rng(seed)
    mesh = make_grid(2, 2, 2)
    from hexlens.quality import CellVolume
    j = rng.uniform(0.05, 1.0, mesh.num_cells)
    vols = CellVolume(values=rng.uniform(0.1, 2.0, mesh.num_cells))
    harm = weighted_jacobian_attribute(mesh, j, vols)
    arith = weighted_vertex_attribute(mesh, j, vols)
    assert (harm <= arith + 1e-12).all()


def test_importance_field_orientation_and_range():
    mesh = make_grid(3, 1, 1)
    base = AttributeField(name="scaled_jacobian",
                          per_cell=np.array([1.0, 0.5, 0.25]))
    imp = importance_field(mesh, base)
    # lowest J (most deformed) -> importance 1, highest J -> 0
    assert imp.per_cell[2] == 1.0
    assert imp.per_cell[0] == 0.0
    assert imp.per_vertex is not None and imp.per_edge is not None
    assert imp.per_cell.min() >= 0 and imp.per_cell.max() <= 1
    # generic field maps increasing value to increasing importance
    gen = importance_field(mesh, AttributeField(name="stress",
                                                per_cell=np.array([1.0, 2.0, 3.0])))
    assert gen.per_cell[2] == 1.0 and gen.per_cell[0] == 0.0


def test_aggregation_bounds():
    rng = np.random.default_rng(5)
    mesh = make_grid(2, 2, 2)
    field = rng.random(mesh.num_cells)
    vi = vertex_importance(mesh, field)
    for v in range(mesh.num_vertices):
        incident = field[mesh.vertex_cell_ids(v)]
        assert vi[v] == incident.max()


def test_field_summary_histogram():
    mesh = make_grid(2, 2, 2)
    base = scaled_jacobian(mesh)
    s = field_summary(base)
    assert s["bins"] == 32
    assert len(s["histogram"]) == 32
    assert sum(s["histogram"]) == mesh.num_cells
    json.dumps(s)


def test_export_vtk_scalars_roundtrip(tmp_path):
    mesh = make_grid(2, 1, 1)
    base = scaled_jacobian(mesh)
    imp = importance_field(mesh, base)
    path = tmp_path / "fields.vtk"
    export_vtk_scalars(mesh, [base, imp], str(path))
    again = load_mesh(str(path))
    assert again.num_cells == 2
    key = [k for k in again.cell_data if "scaled_jacobian" in k][0]
    assert np.abs(again.cell_data[key] - base.per_cell).max() < 1e-15
    assert any(again.point_data)
