"""Triangle meshes for parts, scene assembly, validation, and OBJ I/O."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import ObjFormatError

DEGENERATE_AREA = 1e-12


@dataclass
class PartMesh:
    part_id: str
    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int
    provenance: str = "base"  # base | refined

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise ValueError("triangle indices out of range")


@dataclass
class Scene:
    parts: list[PartMesh] = field(default_factory=list)

    def __post_init__(self):
        ids = [p.part_id for p in self.parts]
        if len(ids) != len(set(ids)):
            raise ValueError("scene part ids must be unique")


@dataclass
class ValidationReport:
    vertex_count: int
    triangle_count: int
    watertight: bool
    manifold: bool
    oriented: bool
    boundary_edges: int
    nonmanifold_edges: int
    flipped_pairs: int
    degenerate_triangles: int
    euler_characteristic: int

    @property
    def ok(self) -> bool:
        return (
            self.watertight
            and self.manifold
            and self.oriented
            and self.degenerate_triangles == 0
        )

    def to_doc(self) -> dict:
        return {
            "vertex_count": self.vertex_count,
            "triangle_count": self.triangle_count,
            "watertight": self.watertight,
            "manifold": self.manifold,
            "oriented": self.oriented,
            "boundary_edges": self.boundary_edges,
            "nonmanifold_edges": self.nonmanifold_edges,
            "flipped_pairs": self.flipped_pairs,
            "degenerate_triangles": self.degenerate_triangles,
            "euler_characteristic": self.euler_characteristic,
            "ok": self.ok,
        }


def triangle_areas(mesh: PartMesh) -> np.ndarray:
    v = mesh.vertices
    t = mesh.triangles
    a = v[t[:, 1]] - v[t[:, 0]]
    b = v[t[:, 2]] - v[t[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(a, b), axis=1)


def validate(mesh: PartMesh) -> ValidationReport:
    """Topological and orientation checks; reports, never raises."""
    directed: dict[tuple[int, int], int] = defaultdict(int)
    undirected: dict[tuple[int, int], int] = defaultdict(int)
    for tri in mesh.triangles:
        i, j, k = (int(tri[0]), int(tri[1]), int(tri[2]))
        for a, b in ((i, j), (j, k), (k, i)):
            directed[(a, b)] += 1
            undirected[(a, b) if a < b else (b, a)] += 1

    boundary = sum(1 for c in undirected.values() if c == 1)
    nonmanifold = sum(1 for c in undirected.values() if c > 2)
    # Consistent winding: every interior edge appears once per direction.
    flipped = 0
    for (a, b), c in directed.items():
        if c > 1:
            flipped += 1
        elif undirected[(a, b) if a < b else (b, a)] == 2 and directed.get((b, a), 0) != 1:
            flipped += 1
    degenerate = int(np.sum(triangle_areas(mesh) <= DEGENERATE_AREA)) if len(
        mesh.triangles
    ) else 0
    used = np.unique(mesh.triangles) if len(mesh.triangles) else np.empty(0, int)
    euler = int(len(used) - len(undirected) + len(mesh.triangles))
    return ValidationReport(
        vertex_count=len(mesh.vertices),
        triangle_count=len(mesh.triangles),
        watertight=boundary == 0 and nonmanifold == 0 and len(mesh.triangles) > 0,
        manifold=nonmanifold == 0,
        oriented=flipped == 0,
        boundary_edges=boundary,
        nonmanifold_edges=nonmanifold,
        flipped_pairs=flipped,
        degenerate_triangles=degenerate,
        euler_characteristic=euler,
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_obj(scene: Scene) -> str:
    """Wavefront OBJ: one named object per part, v/f records only, LF lines.

    Coordinates carry 17 significant digits so the binary values round-trip.
    """
    lines = []
    base = 1
    for part in scene.parts:
        lines.append(f"o {part.part_id}")
        for v in part.vertices:
            lines.append(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}")
        for t in part.triangles:
            lines.append(f"f {base + int(t[0])} {base + int(t[1])} {base + int(t[2])}")
        base += len(part.vertices)
    return "\n".join(lines) + "\n"


def import_obj(text: str) -> Scene:
    parts: list[PartMesh] = []
    verts: list[list[float]] = []
    cur_name: str | None = None
    cur_tris: list[list[int]] = []
    cur_base = 0
    cur_count = 0

    def flush():
        nonlocal cur_name, cur_tris, cur_base, cur_count
        if cur_name is not None:
            try:
                parts.append(
                    PartMesh(
                        part_id=cur_name,
                        vertices=np.asarray(
                            verts[cur_base : cur_base + cur_count], float
                        )
                        if cur_count
                        else np.empty((0, 3)),
                        triangles=np.asarray(cur_tris, int) - 1 - cur_base
                        if cur_tris
                        else np.empty((0, 3), int),
                    )
                )
            except ValueError as exc:
                raise ObjFormatError(
                    f"object {cur_name!r}: {exc}", None
                ) from exc
        cur_base += cur_count
        cur_count = 0
        cur_tris = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if tok[0] == "o":
            if len(tok) < 2:
                raise ObjFormatError("object record needs a name", lineno)
            flush()
            cur_name = " ".join(tok[1:])
        elif tok[0] == "v":
            if len(tok) != 4:
                raise ObjFormatError("vertex record needs 3 coordinates", lineno)
            if cur_name is None:
                cur_name = "default"
            try:
                verts.append([float(tok[1]), float(tok[2]), float(tok[3])])
            except ValueError as exc:
                raise ObjFormatError(f"bad vertex coordinate: {exc}", lineno) from exc
            cur_count += 1
        elif tok[0] == "f":
            if len(tok) != 4:
                raise ObjFormatError("only triangle faces are supported", lineno)
            try:
                idx = [int(t.split("/")[0]) for t in tok[1:]]
            except ValueError as exc:
                raise ObjFormatError(f"bad face index: {exc}", lineno) from exc
            if any(i < 1 or i > len(verts) for i in idx):
                raise ObjFormatError("face index out of range", lineno)
            cur_tris.append(idx)
        elif tok[0] in ("vn", "vt", "s", "g", "usemtl", "mtllib"):
            continue
        else:
            raise ObjFormatError(f"unsupported record {tok[0]!r}", lineno)
    flush()
    return Scene(parts=parts)


def export_obj_file(scene: Scene, path):
    from pathlib import Path

    Path(path).write_text(export_obj(scene), encoding="utf-8", newline="\n")


def import_obj_file(path) -> Scene:
    from pathlib import Path

    return import_obj(Path(path).read_text(encoding="utf-8"))
