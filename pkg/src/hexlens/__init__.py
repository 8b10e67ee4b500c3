"""hexlens: focus+context inspection of hexahedral meshes.

Mesh topology, quality metrics, sheet-based LoD edge hierarchies, a
deterministic CPU focus+context renderer, a CLI, and a session service.
"""
from .mesh import (
    HexMesh,
    MeshError,
    build_topology,
    make_grid,
    make_twisted_grid,
    singular_edges,
    topologically_parallel_edges,
)
from .meshio import MeshFormatError, load_mesh, write_mesh
from .quality import (
    AttributeField,
    CellVolume,
    cell_volumes,
    edge_importance,
    importance_field,
    scaled_jacobian,
    vertex_importance,
    weighted_jacobian_attribute,
    weighted_vertex_attribute,
)
from .sheets import (
    LodEdgeStructure,
    Sheet,
    SheetComponent,
    build_lod,
    classify_relation,
    extract_sheets,
    merge_weight,
)
from .render import (
    Camera,
    CapacityError,
    LensState,
    RenderParams,
    RenderResult,
    Scene,
    TransferFunction,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "HexMesh", "MeshError", "build_topology", "make_grid", "make_twisted_grid",
    "singular_edges", "topologically_parallel_edges",
    "MeshFormatError", "load_mesh", "write_mesh",
    "AttributeField", "CellVolume", "cell_volumes", "edge_importance",
    "importance_field", "scaled_jacobian", "vertex_importance",
    "weighted_jacobian_attribute", "weighted_vertex_attribute",
    "LodEdgeStructure", "Sheet", "SheetComponent", "build_lod",
    "classify_relation", "extract_sheets", "merge_weight",
    "Camera", "CapacityError", "LensState", "RenderParams", "RenderResult",
    "Scene", "TransferFunction", "render",
    "__version__",
]
