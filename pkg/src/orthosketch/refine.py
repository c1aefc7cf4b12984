"""Local refinement: annotation-driven boundary constraints, cross-section
rules, and end-cap deformation.

Addition strokes become typed boundary constraints: type 0 when the
triangulated points stay within an angular band of a cross-section plane,
otherwise a front (1) or side (2) profile.  Erosion strokes become end-cap
edits.  Constraint points snap toward nearby drawing edges only when that
lowers their data cost, so the reported objective never increases; where the
drawing is silent the annotation wins unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .annotations import Part, StrokePair
from .basemesh import CrossSection, GeneralizedCylinder, Skeleton
from .edges import EdgeMap, nearest_edge
from .errors import (
    AttachmentError,
    ConstraintIngestError,
    DegenerateRingError,
    SingularSystemError,
)
from .geometry import CameraPair, bspline_interpolate, triangulate

SECTION_BAND_DEG = 15.0
SNAP_RADIUS_PX = 3.0
ATTACH_RADIUS_FACTOR = 3.0
MIN_RADIUS = 1e-3

CONTOUR = 0  # closed cross-section contour
FRONT_PROFILE = 1
SIDE_PROFILE = 2


# ------------------------------------------------------------ section rule

@dataclass(frozen=True)
class EllipseCurve:
    """Axis-aligned ellipse in frame coordinates: A(x-x0)^2 + B(y-y0)^2 = 1."""

    center: tuple[float, float]
    coef_a: float  # 1/a^2
    coef_b: float  # 1/b^2

    @property
    def semi_axes(self) -> tuple[float, float]:
        return 1.0 / math.sqrt(self.coef_a), 1.0 / math.sqrt(self.coef_b)

    @property
    def is_circle(self) -> bool:
        return (
            self.coef_a == self.coef_b
            and self.center[0] == 0.0
            and self.center[1] == 0.0
        )

    def implicit(self, xi, eta):
        """Residual of the implicit equation (0 on the curve)."""
        x0, y0 = self.center
        return (
            self.coef_a * (np.asarray(xi) - x0) ** 2
            + self.coef_b * (np.asarray(eta) - y0) ** 2
            - 1.0
        )

    def radial(self, theta: float) -> float:
        """Distance from the frame origin to the curve along direction theta."""
        return float(self.radial_many(np.asarray([theta]))[0])

    def radial_many(self, theta) -> np.ndarray:
        c = np.cos(theta)
        s = np.sin(theta)
        x0, y0 = self.center
        p = self.coef_a * c * c + self.coef_b * s * s
        q = self.coef_a * x0 * c + self.coef_b * y0 * s
        r = self.coef_a * x0 * x0 + self.coef_b * y0 * y0 - 1.0
        disc = q * q - p * r
        if np.any(disc < 0):
            raise DegenerateRingError("frame origin lies outside the section curve")
        return (q + np.sqrt(disc)) / p


def _classify_poles(points) -> dict[str, float]:
    slots: dict[str, float] = {}
    for p in points:
        xi, eta = float(p[0]), float(p[1])
        r = math.hypot(xi, eta)
        if r < 1e-12:
            raise DegenerateRingError("pole coincides with the skeleton point")
        if abs(xi) >= abs(eta):
            name = "xi_pos" if xi >= 0 else "xi_neg"
            value = r
        else:
            name = "eta_pos" if eta >= 0 else "eta_neg"
            value = r
        if name in slots:
            raise ConstraintIngestError(f"two poles on the same semi-axis ({name})")
        slots[name] = value
    return slots


def fit_cross_section(points=None, axis_poles: dict | None = None) -> EllipseCurve:
    """Closed section curve from at most four poles.

    One pole means a circle through it; otherwise an axis-aligned ellipse
    passing through every pole, with per-axis centers at the midpoint of each
    pole pair (an axis with a single pole is treated as symmetric, an axis
    with none copies the other).
    """
    if axis_poles is None:
        if points is None or not 1 <= len(points) <= 4:
            raise ValueError("need between one and four poles")
        slots = _classify_poles(points)
        if len(points) == 1:
            p = points[0]
            r = math.hypot(float(p[0]), float(p[1]))
            return EllipseCurve(center=(0.0, 0.0), coef_a=1.0 / r**2, coef_b=1.0 / r**2)
    else:
        slots = {k: float(v) for k, v in axis_poles.items() if v is not None}
        if any(v <= 0 for v in slots.values()):
            raise DegenerateRingError("axis poles must be positive radii")
        if len(slots) == 1:
            r = next(iter(slots.values()))
            return EllipseCurve(center=(0.0, 0.0), coef_a=1.0 / r**2, coef_b=1.0 / r**2)

    def axis(pos_key, neg_key):
        pos, neg = slots.get(pos_key), slots.get(neg_key)
        if pos is not None and neg is not None:
            return (pos - neg) / 2.0, (pos + neg) / 2.0
        if pos is not None:
            return 0.0, pos
        if neg is not None:
            return 0.0, neg
        return None, None

    x0, a_half = axis("xi_pos", "xi_neg")
    y0, b_half = axis("eta_pos", "eta_neg")
    if a_half is not None and a_half <= 1e-12 or b_half is not None and b_half <= 1e-12:
        raise DegenerateRingError("zero-radius section")
    if a_half is not None and b_half is not None:
        det = a_half**2 * b_half**2 - x0**2 * y0**2
        if det <= 0:
            raise DegenerateRingError("pole configuration has no valid ellipse")
        coef_a = (b_half**2 - y0**2) / det
        coef_b = (a_half**2 - x0**2) / det
        if coef_a <= 0 or coef_b <= 0:
            raise DegenerateRingError("pole configuration has no valid ellipse")
        return EllipseCurve(center=(x0, y0), coef_a=coef_a, coef_b=coef_b)
    if a_half is not None:
        return EllipseCurve(center=(x0, 0.0), coef_a=1.0 / a_half**2, coef_b=1.0 / a_half**2)
    if b_half is not None:
        return EllipseCurve(center=(0.0, y0), coef_a=1.0 / b_half**2, coef_b=1.0 / b_half**2)
    raise ValueError("need at least one pole")


# ------------------------------------------------------------- constraints

@dataclass
class BoundaryConstraint:
    kind: int  # CONTOUR | FRONT_PROFILE | SIDE_PROFILE
    t: float
    sample_index: int
    points3d: np.ndarray  # (n, 3)
    stroke_id: str

    def views(self) -> tuple[str, ...]:
        if self.kind == CONTOUR:
            return ("front", "side")
        return ("front",) if self.kind == FRONT_PROFILE else ("side",)


@dataclass
class BoundarySet:
    constraints: list[BoundaryConstraint] = field(default_factory=list)

    def add(self, c: BoundaryConstraint):
        if c.kind == CONTOUR:
            for other in self.constraints:
                if other.kind == CONTOUR and other.sample_index == c.sample_index:
                    raise ConstraintIngestError(
                        f"duplicate section constraint at t={c.t:.4f}"
                    )
        self.constraints.append(c)

    def __len__(self):
        return len(self.constraints)

    def of_kind(self, kind: int) -> list[BoundaryConstraint]:
        return [c for c in self.constraints if c.kind == kind]


@dataclass
class EndCapEdit:
    stroke_id: str
    end: int  # 0 -> t=0 cap, 1 -> t=1 cap
    targets: np.ndarray  # (n, 3) triangulated erosion profile
    # populated by the solver
    matched_vertices: np.ndarray | None = None
    displacements: np.ndarray | None = None
    residual_inf: float | None = None
    max_constraint_error: float | None = None


def _triangulate_stroke(pair: CameraPair, stroke: StrokePair) -> np.ndarray:
    return np.asarray(
        [triangulate(pair, f, s) for f, s in zip(stroke.front, stroke.side)]
    )


def _nearest_sample(params: np.ndarray, t: float) -> int:
    return int(np.argmin(np.abs(params - t)))


def ingest_annotations(
    part: Part,
    pair: CameraPair,
    gc: GeneralizedCylinder,
    section_band_deg: float = SECTION_BAND_DEG,
    attach_radius_factor: float = ATTACH_RADIUS_FACTOR,
) -> tuple[BoundarySet, list[EndCapEdit]]:
    """Convert the part's addition/erosion strokes into typed constraints."""
    skeleton = gc.skeleton
    align_ids = {p.id for p in part.alignment_pairs()}
    bset = BoundarySet()
    edits: list[EndCapEdit] = []
    for stroke in part.pairs:
        if stroke.label == "alignment":
            continue
        if stroke.attach_id not in align_ids:
            raise AttachmentError(
                f"stroke {stroke.id} is not attached to an alignment stroke"
            )
        pts3 = _triangulate_stroke(pair, stroke)
        centroid = pts3.mean(axis=0)
        t_hat = skeleton.closest_param(centroid)

        if stroke.label == "erosion":
            edits.append(
                EndCapEdit(stroke_id=stroke.id, end=0 if t_hat < 0.5 else 1, targets=pts3)
            )
            continue

        idx = _nearest_sample(gc.params, t_hat)
        local_radius = float(np.max(gc.sections[idx].radii))
        d_skel = [np.linalg.norm(p - skeleton.point(skeleton.closest_param(p))) for p in pts3]
        if max(d_skel) > attach_radius_factor * local_radius:
            raise ConstraintIngestError(
                f"stroke {stroke.id} lies farther than "
                f"{attach_radius_factor}x the local radius from the skeleton"
            )

        origin = skeleton.point(t_hat)
        tangent = skeleton.tangent(t_hat)
        rel = pts3 - origin
        norms = np.linalg.norm(rel, axis=1)
        ok = norms > 1e-9
        angles = np.zeros(len(rel))
        angles[ok] = np.degrees(
            np.arcsin(np.clip(np.abs(rel[ok] @ tangent) / norms[ok], 0.0, 1.0))
        )
        if np.max(angles, initial=0.0) <= section_band_deg:
            kind = CONTOUR
            t_c = float(gc.params[idx])
        else:
            kind = FRONT_PROFILE if stroke.primary_view == "front" else SIDE_PROFILE
            t_c = t_hat
        bset.add(
            BoundaryConstraint(
                kind=kind,
                t=t_c,
                sample_index=idx,
                points3d=pts3,
                stroke_id=stroke.id,
            )
        )
    return bset, edits


# -------------------------------------------------------------- objective

def _view_project(p3: np.ndarray, view: str) -> np.ndarray:
    return np.array([p3[0], p3[1]]) if view == "front" else np.array([-p3[2], p3[1]])


def _point_cost(
    p3: np.ndarray,
    views,
    edge_maps: dict[str, EdgeMap],
    s_proj: dict[str, np.ndarray],
    weight: float,
) -> float:
    total = 0.0
    for view in views:
        q = _view_project(p3, view)
        edges = edge_maps[view]
        if len(edges):
            _, d = nearest_edge(edges, q)
        else:
            d = 0.0
        total += d + weight * float(np.linalg.norm(q - s_proj[view]))
    return total


def minimize_objective(
    edges_front: EdgeMap,
    edges_side: EdgeMap,
    bset: BoundarySet,
    gc: GeneralizedCylinder,
    snap_radius_px: float = SNAP_RADIUS_PX,
    weight: float = 1.0,
) -> tuple[BoundarySet, float, float]:
    """Snap constraint points toward nearby edges; a move is kept only when
    it lowers that point's cost, so the summed objective never increases.
    Returns (updated set, objective before, objective after)."""
    edge_maps = {"front": edges_front, "side": edges_side}
    before = 0.0
    after = 0.0
    new_constraints = []
    for c in bset.constraints:
        s3 = gc.skeleton.point(c.t)
        s_proj = {v: _view_project(s3, v) for v in ("front", "side")}
        views = c.views()
        pts = c.points3d.copy()
        for i, p3 in enumerate(pts):
            old_cost = _point_cost(p3, views, edge_maps, s_proj, weight)
            before += old_cost
            candidate = p3.copy()
            moved = False
            for view in views:
                edges = edge_maps[view]
                if not len(edges):
                    continue
                q = _view_project(candidate, view)
                e, d = nearest_edge(edges, q)
                if d <= snap_radius_px * edges.scale:
                    if view == "front":
                        candidate[0] = e[0]
                        candidate[1] = e[1]
                    else:
                        candidate[2] = -e[0]
                        if "front" not in views:
                            candidate[1] = e[1]
                    moved = True
            if moved:
                new_cost = _point_cost(candidate, views, edge_maps, s_proj, weight)
                if new_cost <= old_cost:
                    pts[i] = candidate
                    after += new_cost
                    continue
            after += old_cost
        new_constraints.append(
            BoundaryConstraint(
                kind=c.kind,
                t=c.t,
                sample_index=c.sample_index,
                points3d=pts,
                stroke_id=c.stroke_id,
            )
        )
    out = BoundarySet()
    out.constraints = new_constraints
    return out, before, after


# ------------------------------------------------- applying the constraints

def _ray_polyline_hit(origin, direction, polyline: np.ndarray) -> float | None:
    """Outermost intersection parameter of the ray with the polyline."""
    o = np.asarray(origin, float)
    d = np.asarray(direction, float)
    best = None
    for a, b in zip(polyline[:-1], polyline[1:]):
        seg = b - a
        # solve r*d - u*seg = a - o
        det = -d[0] * seg[1] + seg[0] * d[1]
        if abs(det) < 1e-12:
            continue
        rhs = a - o
        r = (-rhs[0] * seg[1] + seg[0] * rhs[1]) / det
        u = (d[0] * rhs[1] - d[1] * rhs[0]) / det
        if r > 1e-9 and -1e-9 <= u <= 1 + 1e-9:
            if best is None or r > best:
                best = r
    return best


def apply_profile_constraints(
    gc: GeneralizedCylinder, bset: BoundarySet, min_radius: float = MIN_RADIUS
) -> GeneralizedCylinder:
    """Override section poles wherever a profile constraint crosses the
    per-sample perpendicular rays, then re-fit the ellipses."""
    profiles = [c for c in bset.constraints if c.kind in (FRONT_PROFILE, SIDE_PROFILE)]
    if not profiles:
        return gc
    spacing = 1.0 / max(len(gc.params) - 1, 1)
    sections = list(gc.sections)
    overrides: dict[int, dict[str, float]] = {}
    for c in profiles:
        view = "front" if c.kind == FRONT_PROFILE else "side"
        poly = np.asarray([_view_project(p, view) for p in c.points3d])
        t_pts = [gc.skeleton.closest_param(p) for p in c.points3d]
        t_lo, t_hi = min(t_pts) - spacing / 2, max(t_pts) + spacing / 2
        for i, t in enumerate(gc.params):
            if not t_lo <= t <= t_hi:
                continue
            p3 = sections[i].center
            tan3 = sections[i].tangent
            if view == "front":
                o = np.array([p3[0], p3[1]])
                t2 = np.array([tan3[0], tan3[1]])
                axis3 = sections[i].normal
                a2 = np.array([axis3[0], axis3[1]])
            else:
                o = np.array([-p3[2], p3[1]])
                t2 = np.array([-tan3[2], tan3[1]])
                axis3 = sections[i].binormal
                a2 = np.array([-axis3[2], axis3[1]])
            n2 = np.linalg.norm(t2)
            if n2 < 1e-9:
                continue
            ray = np.array([-t2[1], t2[0]]) / n2
            pos_is_axis = float(a2 @ ray) >= 0.0
            for sign in (1.0, -1.0):
                r = _ray_polyline_hit(o, sign * ray, poly)
                if r is None:
                    continue
                axis_name = "xi" if view == "front" else "eta"
                positive = (sign > 0) == pos_is_axis
                key = f"{axis_name}_{'pos' if positive else 'neg'}"
                overrides.setdefault(i, {})[key] = max(r, min_radius)
    if not overrides:
        return gc
    theta = 2.0 * np.pi * np.arange(gc.angular_samples) / gc.angular_samples
    for i, new_poles in overrides.items():
        sec = sections[i]
        poles = dict(sec.poles) if sec.poles else {}
        poles.update(new_poles)
        curve = fit_cross_section(axis_poles=poles)
        radii = np.maximum(curve.radial_many(theta), min_radius)
        sections[i] = CrossSection(
            t=sec.t,
            center=sec.center,
            tangent=sec.tangent,
            normal=sec.normal,
            binormal=sec.binormal,
            radii=radii,
            source="constraint",
            poles=poles,
        )
    return GeneralizedCylinder(skeleton=gc.skeleton, params=gc.params, sections=sections)


def section_from_contour(
    gc: GeneralizedCylinder, c: BoundaryConstraint, min_radius: float = MIN_RADIUS
) -> CrossSection:
    """Radial resample of a closed contour constraint in its section plane."""
    base = gc.sections[c.sample_index]
    rel = c.points3d - base.center
    xi = rel @ base.normal
    eta = rel @ base.binormal
    phi = np.arctan2(eta, xi)
    rho = np.hypot(xi, eta)
    if np.any(rho < 1e-9):
        raise DegenerateRingError("contour constraint touches the skeleton")
    order = np.argsort(phi, kind="stable")
    phi_s = phi[order]
    rho_s = rho[order]
    # wrap for periodic interpolation
    phi_ext = np.concatenate([phi_s, [phi_s[0] + 2 * np.pi]])
    rho_ext = np.concatenate([rho_s, [rho_s[0]]])
    a = gc.angular_samples
    theta = 2.0 * np.pi * np.arange(a) / a
    theta_wrapped = np.where(theta < phi_s[0], theta + 2 * np.pi, theta)
    radii = np.interp(theta_wrapped, phi_ext, rho_ext)
    return CrossSection(
        t=base.t,
        center=base.center,
        tangent=base.tangent,
        normal=base.normal,
        binormal=base.binormal,
        radii=np.maximum(radii, min_radius),
        source="constraint",
    )


def interpolate_sections(
    constraint_sections: list[CrossSection],
    gc: GeneralizedCylinder,
    min_radius: float = MIN_RADIUS,
) -> GeneralizedCylinder:
    """Blend constrained sections into the base along t.

    Per angular direction, the radial offsets from the base are splined
    through the constraints and pinned to zero at unconstrained tube ends, so
    a constraint equal to the base leaves everything unchanged and the
    constrained sections are reproduced exactly."""
    if not constraint_sections:
        return gc
    params = gc.params
    m = len(params)
    by_index: dict[int, CrossSection] = {}
    for cs in constraint_sections:
        idx = _nearest_sample(params, cs.t)
        by_index[idx] = cs
    data_idx = sorted(by_index)
    anchor_idx = []
    if 0 not in by_index:
        anchor_idx.append(0)
    if m - 1 not in by_index:
        anchor_idx.append(m - 1)
    all_idx = sorted(set(data_idx) | set(anchor_idx))
    ts = params[all_idx]
    base_r = np.array([gc.sections[i].radii for i in range(m)])
    deltas = np.zeros((len(all_idx), gc.angular_samples))
    for row, i in enumerate(all_idx):
        if i in by_index:
            deltas[row] = by_index[i].radii - base_r[i]
    if len(all_idx) >= 2:
        spline = bspline_interpolate(deltas, ts)
        delta_all = spline.eval_many(params)
    else:
        delta_all = np.tile(deltas[0], (m, 1))
    new_sections = []
    for i in range(m):
        if i in by_index:
            cs = by_index[i]
            new_sections.append(
                CrossSection(
                    t=float(params[i]),
                    center=gc.sections[i].center,
                    tangent=gc.sections[i].tangent,
                    normal=gc.sections[i].normal,
                    binormal=gc.sections[i].binormal,
                    radii=np.maximum(cs.radii, min_radius),
                    source="constraint",
                )
            )
        else:
            radii = np.maximum(base_r[i] + delta_all[i], min_radius)
            sec = gc.sections[i]
            new_sections.append(
                CrossSection(
                    t=sec.t,
                    center=sec.center,
                    tangent=sec.tangent,
                    normal=sec.normal,
                    binormal=sec.binormal,
                    radii=radii,
                    source=sec.source,
                )
            )
    return GeneralizedCylinder(skeleton=gc.skeleton, params=gc.params, sections=new_sections)


# ---------------------------------------------------------------- end caps

@dataclass
class CapRegion:
    """Vertex/triangle bookkeeping for one tessellated cap."""

    end: int
    ring_vertices: np.ndarray  # fixed outer ring (shared with the tube)
    interior_vertices: np.ndarray  # movable cap vertices
    triangles: np.ndarray  # (k, 3) vertex triples of the cap faces
    axis: np.ndarray | None = None  # cap plane normal (skeleton tangent)


def laplacian_endcap(mesh, edit: EndCapEdit, cap: CapRegion):
    """Deform one cap: uniform-weight Laplacian editing with the outer ring
    fixed and profile-matched vertices moved to their targets.

    Mutates ``edit`` with the matched vertices, solved displacements, and the
    linear-system residual; returns a new PartMesh.
    """
    from .mesh import PartMesh

    cap_vertices = np.unique(cap.triangles)
    local = {int(v): i for i, v in enumerate(cap_vertices)}
    n = len(cap_vertices)
    x0 = mesh.vertices[cap_vertices]

    lap = np.zeros((n, n))
    for tri in cap.triangles:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            i, j = local[int(tri[a])], local[int(tri[b])]
            if lap[i, j] == 0.0:
                lap[i, j] = -1.0
                lap[j, i] = -1.0
    np.fill_diagonal(lap, 0.0)
    np.fill_diagonal(lap, -lap.sum(axis=1))

    delta = lap @ x0

    fixed = {local[int(v)] for v in cap.ring_vertices if int(v) in local}
    if not fixed:
        raise SingularSystemError("cap has no fixed boundary ring")

    # Match each target to the nearest free vertex in the cap plane.
    targets: dict[int, np.ndarray] = {}
    if len(edit.targets):
        if cap.axis is not None:
            axis = np.asarray(cap.axis, float)
        else:
            d = x0 - x0.mean(axis=0)
            _, _, vt = np.linalg.svd(d, full_matrices=False)
            axis = vt[-1]
        axis = axis / np.linalg.norm(axis)
        inplane = x0 - np.outer(x0 @ axis, axis)
        for tgt in np.asarray(edit.targets, float).reshape(-1, 3):
            t_in = tgt - (tgt @ axis) * axis
            d = np.linalg.norm(inplane - t_in, axis=1)
            d[list(fixed)] = np.inf
            j = int(np.argmin(d))
            if j not in targets or np.linalg.norm(x0[j] - tgt) < np.linalg.norm(
                x0[j] - targets[j]
            ):
                targets[j] = tgt

    a_mat = lap.copy()
    rhs = delta.copy()
    for i in fixed:
        a_mat[i, :] = 0.0
        a_mat[i, i] = 1.0
        rhs[i] = x0[i]
    for j, tgt in targets.items():
        a_mat[j, :] = 0.0
        a_mat[j, j] = 1.0
        rhs[j] = tgt

    try:
        x = np.linalg.solve(a_mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"cap system is singular: {exc}") from exc

    edit.residual_inf = float(np.max(np.abs(a_mat @ x - rhs)))
    edit.matched_vertices = cap_vertices[list(targets.keys())] if targets else np.empty(
        0, dtype=int
    )
    edit.displacements = x - x0
    edit.max_constraint_error = (
        float(
            max(
                np.max(np.abs(x[j] - tgt))
                for j, tgt in targets.items()
            )
        )
        if targets
        else 0.0
    )

    vertices = mesh.vertices.copy()
    vertices[cap_vertices] = x
    return PartMesh(
        part_id=mesh.part_id,
        vertices=vertices,
        triangles=mesh.triangles,
        provenance="refined",
    )
