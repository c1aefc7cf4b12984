"""Per-part reconstruction flow: edges -> base mesh -> refinement -> scene.

One deterministic entry point shared by the CLI, the session service, and the
tests.  Parts are isolated: a failing part is reported in the diagnostics and
never blocks the others.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .annotations import Project
from .basemesh import build_generalized_cylinder, tessellate_with_layout
from .edges import extract_edges
from .errors import ModelingError, ReconstructionError
from .geometry import CameraPair
from .mesh import Scene, validate
from .refine import (
    CONTOUR,
    apply_profile_constraints,
    ingest_annotations,
    interpolate_sections,
    laplacian_endcap,
    minimize_objective,
    section_from_contour,
)

REPORT_VERSION = 1


@dataclass(frozen=True)
class PipelineConfig:
    skeleton_samples: int = 32
    angular_samples: int = 32
    edge_threshold_lo: float = 0.1
    edge_threshold_hi: float = 0.3
    snap_radius_px: float = 3.0
    epipolar_tol_px: float = 0.5
    regularizer_weight: float = 1.0
    cone_angle_deg: float = 5.0
    corridor_min_px: float = 1.0
    corridor_max_px: float = 1.25
    section_band_deg: float = 15.0
    attach_radius_factor: float = 3.0
    erosion_cap_rings: int = 4
    min_radius: float = 1e-3

    def __post_init__(self):
        if self.skeleton_samples < 2 or self.angular_samples < 8:
            raise ValueError("sample counts too small")
        for name in (
            "snap_radius_px",
            "epipolar_tol_px",
            "regularizer_weight",
            "cone_angle_deg",
            "corridor_min_px",
            "corridor_max_px",
            "section_band_deg",
            "attach_radius_factor",
            "min_radius",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_doc(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_doc(doc: dict) -> "PipelineConfig":
        known = {f for f in PipelineConfig.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return PipelineConfig(**doc)


@dataclass
class PartDiagnostics:
    part_id: str
    status: str = "ok"  # ok | failed
    error: str | None = None
    objective_before: float | None = None
    objective_after: float | None = None
    constraints: int = 0
    endcap_edits: int = 0
    validation: dict | None = None

    def to_doc(self) -> dict:
        return {
            "id": self.part_id,
            "status": self.status,
            "error": self.error,
            "objective_before": self.objective_before,
            "objective_after": self.objective_after,
            "constraints": self.constraints,
            "endcap_edits": self.endcap_edits,
            "validation": self.validation,
        }


@dataclass
class Diagnostics:
    parts: list[PartDiagnostics] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return all(p.status == "ok" for p in self.parts)

    def to_doc(self) -> dict:
        return {"version": REPORT_VERSION, "parts": [p.to_doc() for p in self.parts]}


def _reconstruct_one(part, pair, edges_front, edges_side, config: PipelineConfig):
    aligns = part.alignment_pairs()
    if not aligns:
        raise ReconstructionError(f"part {part.id!r} has no alignment stroke")
    gc = build_generalized_cylinder(
        pair,
        edges_front,
        edges_side,
        aligns[0],
        m=config.skeleton_samples,
        a=config.angular_samples,
        cone_angle_deg=config.cone_angle_deg,
        corridor_min_px=config.corridor_min_px,
        corridor_max_px=config.corridor_max_px,
        weight=config.regularizer_weight,
        min_radius=config.min_radius,
    )
    bset, edits = ingest_annotations(
        part,
        pair,
        gc,
        section_band_deg=config.section_band_deg,
        attach_radius_factor=config.attach_radius_factor,
    )
    bset, before, after = minimize_objective(
        edges_front,
        edges_side,
        bset,
        gc,
        snap_radius_px=config.snap_radius_px,
        weight=config.regularizer_weight,
    )
    gc = apply_profile_constraints(gc, bset, min_radius=config.min_radius)
    contours = [
        section_from_contour(gc, c, min_radius=config.min_radius)
        for c in bset.of_kind(CONTOUR)
    ]
    gc = interpolate_sections(contours, gc, min_radius=config.min_radius)

    refined = bool(len(bset) or edits)
    cap_segments = (
        config.erosion_cap_rings if any(e.end == 0 for e in edits) else 1,
        config.erosion_cap_rings if any(e.end == 1 for e in edits) else 1,
    )
    mesh, caps = tessellate_with_layout(
        gc,
        part_id=part.id,
        cap_segments=cap_segments,
        provenance="refined" if refined else "base",
    )
    for edit in edits:
        mesh = laplacian_endcap(mesh, edit, caps[edit.end])
    return mesh, before, after, len(bset), len(edits)


def extract_project_edges(project: Project, config: PipelineConfig) -> dict:
    """Edge maps for both views; raises when an image is missing."""
    out = {}
    for view in ("front", "side"):
        img = project.images.get(view)
        if img is None:
            raise ReconstructionError("both view images must be loaded")
        out[view] = extract_edges(
            img, config.edge_threshold_lo, config.edge_threshold_hi
        )
    return out


def reconstruct(
    project: Project,
    config: PipelineConfig | None = None,
    only_part: str | None = None,
    edges: dict | None = None,
) -> tuple[Scene, Diagnostics]:
    """Deterministic scene for the project plus per-part diagnostics.

    ``only_part`` restricts the rebuild to one part id; ``edges`` lets a
    caller reuse extracted edge maps across rebuilds."""
    config = config or PipelineConfig()
    if not project.parts:
        raise ReconstructionError("project has no parts")
    parts = project.parts
    if only_part is not None:
        parts = [p for p in parts if p.id == only_part]
        if not parts:
            raise ReconstructionError(f"no part {only_part!r}")
    if edges is None:
        edges = extract_project_edges(project, config)

    pair = CameraPair.canonical(snap_tol=max(config.epipolar_tol_px, 0.5))
    scene_parts = []
    diags = Diagnostics()
    for part in parts:
        d = PartDiagnostics(part_id=part.id)
        try:
            mesh, before, after, n_constraints, n_edits = _reconstruct_one(
                part, pair, edges["front"], edges["side"], config
            )
            report = validate(mesh)
            d.objective_before = before
            d.objective_after = after
            d.constraints = n_constraints
            d.endcap_edits = n_edits
            d.validation = report.to_doc()
            scene_parts.append(mesh)
        except (ModelingError, ValueError) as exc:
            d.status = "failed"
            d.error = str(exc)
        diags.parts.append(d)
    return Scene(parts=scene_parts), diags
