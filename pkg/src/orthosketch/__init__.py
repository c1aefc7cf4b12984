"""orthosketch: 3D character-part meshes from two annotated orthographic drawings.

Draw a front and a side view, mark each part with an alignment stroke (its
skeleton), optionally add addition/erosion strokes, and reconstruct a
watertight generalized-cylinder mesh per part.
"""

from .annotations import (
    Project,
    StrokePair,
    add_stroke,
    delete_stroke,
    load_project,
    load_project_file,
    move_key_point,
    relocate_stroke,
    save_project,
    save_project_file,
    undo,
)
from .edges import EdgeMap, ViewImage, extract_edges, load_png, nearest_edge
from .geometry import Camera, CameraPair, HermiteCurve, bspline_interpolate, triangulate
from .mesh import PartMesh, Scene, export_obj, import_obj, validate
from .pipeline import PipelineConfig, reconstruct

__version__ = "0.1.0"

__all__ = [
    "Camera",
    "CameraPair",
    "EdgeMap",
    "HermiteCurve",
    "PartMesh",
    "PipelineConfig",
    "Project",
    "Scene",
    "StrokePair",
    "ViewImage",
    "add_stroke",
    "bspline_interpolate",
    "delete_stroke",
    "export_obj",
    "extract_edges",
    "import_obj",
    "load_png",
    "load_project",
    "load_project_file",
    "move_key_point",
    "nearest_edge",
    "reconstruct",
    "relocate_stroke",
    "save_project",
    "save_project_file",
    "triangulate",
    "undo",
    "validate",
]
