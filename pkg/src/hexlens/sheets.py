"""Hexahedral sheets, sheet-component merging, and per-edge LoD levels.

A sheet is the set of cells connected through one class of topologically
parallel edges. Sheets seed disjoint components which are merged
greedily (adjacent before hybrid before intersecting, then by weight)
until one component remains; edges on merged-away shared boundary faces
become invisible at the level of the merge.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .mesh import HexMesh, singular_edges, topologically_parallel_edges


@dataclass
class Sheet:
    id: int
    cells: np.ndarray    # sorted cell indices
    edges: np.ndarray    # sorted edge indices (all edges visited while growing)


@dataclass
class SheetComponent:
    id: int
    cells: frozenset
    sheet_ids: tuple

    def boundary_faces(self, mesh: HexMesh) -> set:
        return component_boundary_faces(mesh, self.cells)


@dataclass
class MergeEvent:
    pair: tuple          # component ids merged (low, high)
    relation: str
    weight: Fraction
    level: int
    merged_id: int
    hidden_edges: list


@dataclass
class LodEdgeStructure:
    e_level: np.ndarray          # per-edge max level at which the edge is visible
    level_count: int
    merge_log: list              # ordered MergeEvent list
    initial_component_count: int

    def visible_edges(self, level: int) -> np.ndarray:
        return np.nonzero(self.e_level >= level)[0]


def extract_sheets(mesh: HexMesh) -> list[Sheet]:
    """Extract all hexahedral sheets by parallel-edge propagation.

    Seeds are taken in increasing edge-index order; propagation adds all
    cells incident to a frontier edge and, per newly added cell, the three
    edges topologically parallel to the frontier edge.
    """
    visited = np.zeros(mesh.num_edges, dtype=bool)
    cell_edges = mesh.cell_edges
    sheets = []
    for seed in range(mesh.num_edges):
        if visited[seed]:
            continue
        visited[seed] = True
        frontier = [seed]
        sheet_edges = [seed]
        in_sheet = set()
        cells = []
        while frontier:
            e = frontier.pop()
            for c in mesh.edge_cell_ids(e):
                c = int(c)
                if c in in_sheet:
                    continue
                in_sheet.add(c)
                cells.append(c)
                for p in topologically_parallel_edges(mesh, c, e):
                    p = int(p)
                    if not visited[p]:
                        visited[p] = True
                        frontier.append(p)
                        sheet_edges.append(p)
        sheets.append(
            Sheet(
                id=len(sheets),
                cells=np.array(sorted(cells), dtype=np.int64),
                edges=np.array(sorted(sheet_edges), dtype=np.int64),
            )
        )
    return sheets


def component_boundary_faces(mesh: HexMesh, cells) -> set:
    """Faces with exactly one incident cell inside the cell set."""
    counts: dict[int, int] = {}
    for c in cells:
        for f in mesh.cell_faces[c]:
            f = int(f)
            counts[f] = counts.get(f, 0) + 1
    return {f for f, k in counts.items() if k == 1}


def classify_relation(mesh: HexMesh, cells_i, cells_j) -> tuple[str, set]:
    """Neighbor relation of two cell sets and their mergeable shared faces.

    Shared faces are boundary faces of both sets that lie interior to the
    union after merging (i.e. both incident mesh cells are in the union).
    Returns (relation, shared_faces) with relation one of "adjacent",
    "intersecting", "hybrid", or "none".
    """
    ci = set(map(int, cells_i))
    cj = set(map(int, cells_j))
    if ci == cj and ci:
        raise ValueError("cannot classify a component against itself")
    shared_cells = ci & cj
    union = ci | cj
    bi = component_boundary_faces(mesh, ci)
    bj = component_boundary_faces(mesh, cj)
    shared_faces = set()
    for f in bi & bj:
        c0, c1 = mesh.face_cells[f]
        if c1 >= 0 and int(c0) in union and int(c1) in union:
            shared_faces.add(f)
    if shared_cells and shared_faces:
        return "hybrid", shared_faces
    if shared_cells:
        return "intersecting", shared_faces
    if shared_faces:
        return "adjacent", shared_faces
    return "none", shared_faces


def merge_weight(mesh: HexMesh, cells_i, cells_j) -> Fraction:
    """Exact merge priority weight for a pair of components."""
    relation, shared = classify_relation(mesh, cells_i, cells_j)
    if relation == "none":
        raise ValueError("components are not neighbors")
    bi = len(component_boundary_faces(mesh, set(map(int, cells_i))))
    bj = len(component_boundary_faces(mesh, set(map(int, cells_j))))
    return Fraction(len(shared), bi + bj) * Fraction(1, len(set(cells_i)) + len(set(cells_j)))


_RELATION_RANK = {"adjacent": 0, "hybrid": 1, "intersecting": 2}


def initial_components(mesh: HexMesh, sheets: list[Sheet]) -> list[SheetComponent]:
    """Disjoint components seeded from sheets: each cell joins the
    component of its lowest-id containing sheet; empty components drop.
    """
    owner = np.full(mesh.num_cells, -1, dtype=np.int64)
    for sheet in sheets:
        unclaimed = sheet.cells[owner[sheet.cells] < 0]
        owner[unclaimed] = sheet.id
    comps = []
    for sheet in sheets:
        cells = np.nonzero(owner == sheet.id)[0]
        if len(cells):
            comps.append(
                SheetComponent(
                    id=len(comps),
                    cells=frozenset(map(int, cells)),
                    sheet_ids=(sheet.id,),
                )
            )
    return comps


def build_lod(mesh: HexMesh, sheets: list[Sheet]) -> LodEdgeStructure:
    """Merge sheet components and record per-edge visibility levels.

    The merge queue is ordered by (relation rank, weight descending,
    smallest pair id); weights use exact rational arithmetic. A new LoD
    level starts when a merge produces a component more than twice the
    size of the largest component at the start of the current level.
    Valence-1 singular edges are never hidden; other singular edges are
    hidden only at the coarsest level.
    """
    comps = initial_components(mesh, sheets)
    ncomp = len(comps)
    sing = singular_edges(mesh)
    protected_always = set(map(int, sing.valence_one))
    protected_until_top = set(map(int, sing.edges)) - protected_always

    comp_cells = {c.id: c.cells for c in comps}
    comp_size = {c.id: len(c.cells) for c in comps}
    comp_boundary = {c.id: len(c.boundary_faces(mesh)) for c in comps}
    alive = set(comp_cells)

    # Components partition the cells, so pairs are adjacent via interior
    # mesh faces; track the face set per live pair.
    owner = np.full(mesh.num_cells, -1, dtype=np.int64)
    for c in comps:
        for cell in c.cells:
            owner[cell] = c.id
    pair_faces: dict[tuple, set] = {}
    interior = np.nonzero(~mesh.boundary_face)[0]
    for f in interior:
        a, b = owner[mesh.face_cells[f]]
        a, b = int(a), int(b)
        if a != b:
            key = (min(a, b), max(a, b))
            pair_faces.setdefault(key, set()).add(int(f))

    def weight_of(pair):
        i, j = pair
        shared = len(pair_faces[pair])
        return Fraction(shared, comp_boundary[i] + comp_boundary[j]) * Fraction(
            1, comp_size[i] + comp_size[j]
        )

    heap = []
    for pair in sorted(pair_faces):
        heapq.heappush(heap, (_RELATION_RANK["adjacent"], -weight_of(pair), pair[0], pair[1]))

    e_level = np.full(mesh.num_edges, -1, dtype=np.int64)   # -1: never hidden
    merge_log: list[MergeEvent] = []
    level = 0
    level_start_max = max(comp_size.values()) if comp_size else 0
    next_id = ncomp

    while heap:
        rank, negw, i, j = heapq.heappop(heap)
        if i not in alive or j not in alive:
            continue
        pair = (i, j)
        if pair not in pair_faces:
            continue
        shared = pair_faces.pop(pair)
        weight = -negw

        hidden = []
        for f in shared:
            for e in mesh.face_edges[f]:
                e = int(e)
                if e in protected_always or e in protected_until_top:
                    continue
                if e_level[e] < 0:
                    e_level[e] = level
                    hidden.append(e)

        merged = next_id
        next_id += 1
        alive.discard(i)
        alive.discard(j)
        alive.add(merged)
        comp_size[merged] = comp_size[i] + comp_size[j]
        comp_boundary[merged] = comp_boundary[i] + comp_boundary[j] - 2 * len(shared)

        merge_log.append(
            MergeEvent(
                pair=pair,
                relation="adjacent",
                weight=weight,
                level=level,
                merged_id=merged,
                hidden_edges=sorted(hidden),
            )
        )

        # re-key neighbor pairs of i and j onto the merged component
        moved = {}
        for key in list(pair_faces):
            a, b = key
            if a in (i, j) or b in (i, j):
                other = b if a in (i, j) else a
                nk = (min(other, merged), max(other, merged))
                moved.setdefault(nk, set()).update(pair_faces.pop(key))
        for nk, faces in moved.items():
            pair_faces[nk] = faces
            heapq.heappush(heap, (_RELATION_RANK["adjacent"], -weight_of(nk), nk[0], nk[1]))

        if comp_size[merged] > 2 * level_start_max:
            level += 1
            level_start_max = max(comp_size[c] for c in alive)

    merged_count = len(merge_log)
    top = level + 1 if merged_count else 0
    survivors = e_level < 0
    e_level[survivors] = top
    if top >= 1 and protected_until_top:
        for e in protected_until_top:
            if survivors[e]:
                e_level[e] = top - 1
    for e in protected_always:
        e_level[e] = top

    return LodEdgeStructure(
        e_level=e_level,
        level_count=top + 1,
        merge_log=merge_log,
        initial_component_count=ncomp,
    )


def merge_log_json(lod: LodEdgeStructure) -> list[dict]:
    return [
        {
            "pair": [int(ev.pair[0]), int(ev.pair[1])],
            "relation": ev.relation,
            "weight": str(ev.weight),
            "level": int(ev.level),
            "merged_id": int(ev.merged_id),
            "hidden_edges": [int(e) for e in ev.hidden_edges],
        }
        for ev in lod.merge_log
    ]


def export_merge_log(lod: LodEdgeStructure, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(
            {
                "initial_components": lod.initial_component_count,
                "level_count": lod.level_count,
                "merges": merge_log_json(lod),
            },
            fh,
            indent=2,
        )


def export_lod_obj(mesh: HexMesh, lod: LodEdgeStructure, path: str) -> None:
    """Write the LoD edge sets as an OBJ line file, one group per level."""
    with open(path, "w") as fh:
        fh.write("# hexlens LoD edge hierarchy\n")
        for x, y, z in mesh.vertices:
            fh.write(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n")
        for level in range(lod.level_count):
            fh.write(f"g level_{level}\n")
            for e in np.nonzero(lod.e_level == level)[0]:
                a, b = mesh.edges[e]
                fh.write(f"l {int(a) + 1} {int(b) + 1}\n")
