"""Base-mesh generation: a generalized cylinder per part from the alignment
stroke pair and the two edge maps.

The boundary search casts, at each skeleton sample, the ray perpendicular to
the projected skeleton in each view (two directions per view).  Edge points
qualify when they sit inside a narrow corridor around the ray: half-width
clamp(along * tan(cone), corridor_min, corridor_max) in world units.  The
boundary offset is the outermost qualifying point, i.e. the first intersection
walking in from the free end of the section's perpendicular line, which keeps
end sections from latching onto contour runs parallel to the ray.  The
reported per-candidate cost is perp + weight * along; the weight is exposed
for experimentation and 1 reproduces the unweighted sum of the two distance
terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .annotations import StrokePair
from .edges import EdgeMap
from .errors import ReconstructionError
from .geometry import CameraPair, HermiteCurve, triangulate

CONE_ANGLE_DEG = 5.0
CORRIDOR_MIN_PX = 1.0
CORRIDOR_MAX_PX = 1.25
MIN_RADIUS = 1e-3


def cosine_spaced(m: int) -> np.ndarray:
    """Sample parameters clustered toward both ends (Chebyshev extrema)."""
    if m < 2:
        raise ValueError("need at least two samples")
    i = np.arange(m)
    return (1.0 - np.cos(np.pi * i / (m - 1))) / 2.0


@dataclass(frozen=True)
class Skeleton:
    """3D curve through the triangulated alignment key points."""

    curve: HermiteCurve

    @staticmethod
    def from_stroke_pair(pair: CameraPair, alignment: StrokePair) -> "Skeleton":
        pts = [
            triangulate(pair, f, s)
            for f, s in zip(alignment.front, alignment.side)
        ]
        return Skeleton(curve=HermiteCurve(np.asarray(pts)))

    def point(self, t: float) -> np.ndarray:
        return self.curve.eval(t)

    def tangent(self, t: float) -> np.ndarray:
        d = self.curve.derivative(t)
        n = np.linalg.norm(d)
        if n < 1e-12:
            raise ReconstructionError(f"skeleton tangent vanishes at t={t}")
        return d / n

    def closest_param(self, p, samples: int = 256) -> float:
        ts = np.linspace(0.0, 1.0, samples)
        pts = self.curve.eval_many(ts)
        d2 = np.sum((pts - np.asarray(p, dtype=float)) ** 2, axis=1)
        return float(ts[int(np.argmin(d2))])


@dataclass(frozen=True)
class BoundaryHit:
    offset: float  # distance along the ray
    perp: float  # perpendicular deviation of the chosen edge point
    point: np.ndarray  # the edge point, view coordinates
    cost: float  # perp + weight * offset


@dataclass(frozen=True)
class BoundaryOffsets:
    """Per-view, per-direction search results; None marks a failed side."""

    front_pos: BoundaryHit | None
    front_neg: BoundaryHit | None
    side_pos: BoundaryHit | None
    side_neg: BoundaryHit | None

    def all_failed(self) -> bool:
        return (
            self.front_pos is None
            and self.front_neg is None
            and self.side_pos is None
            and self.side_neg is None
        )


def _project_front(p):
    return np.array([p[0], p[1]])


def _project_side(p):
    return np.array([-p[2], p[1]])


def _ray_hit(
    edges: EdgeMap,
    origin,
    direction,
    cone_angle_deg: float,
    corridor_min_px: float,
    corridor_max_px: float,
    weight: float,
) -> BoundaryHit | None:
    if len(edges) == 0:
        return None
    idx, along, perp = kernels.corridor_select(
        edges.points[:, 0],
        edges.points[:, 1],
        float(origin[0]),
        float(origin[1]),
        float(direction[0]),
        float(direction[1]),
        math.tan(math.radians(cone_angle_deg)),
        corridor_min_px * edges.scale,
        corridor_max_px * edges.scale,
    )
    if idx < 0:
        return None
    return BoundaryHit(
        offset=along,
        perp=perp,
        point=edges.points[idx].copy(),
        cost=perp + weight * along,
    )


def boundary_search(
    edges_front: EdgeMap,
    edges_side: EdgeMap,
    skeleton: Skeleton,
    t: float,
    cone_angle_deg: float = CONE_ANGLE_DEG,
    corridor_min_px: float = CORRIDOR_MIN_PX,
    corridor_max_px: float = CORRIDOR_MAX_PX,
    weight: float = 1.0,
) -> BoundaryOffsets:
    """Boundary offsets of the cross-section at parameter t, per view and
    direction.  A side with no corridor candidate comes back as None."""
    p = skeleton.point(t)
    tan3 = skeleton.tangent(t)
    hits: dict[str, BoundaryHit | None] = {
        "front_pos": None,
        "front_neg": None,
        "side_pos": None,
        "side_neg": None,
    }
    for view, edges, proj_p, t2 in (
        ("front", edges_front, _project_front(p), np.array([tan3[0], tan3[1]])),
        ("side", edges_side, _project_side(p), np.array([-tan3[2], tan3[1]])),
    ):
        norm = np.linalg.norm(t2)
        if norm < 1e-9:
            continue  # skeleton is end-on in this view
        perp_dir = np.array([-t2[1], t2[0]]) / norm
        for sign, name in ((1.0, f"{view}_pos"), (-1.0, f"{view}_neg")):
            hits[name] = _ray_hit(
                edges,
                proj_p,
                sign * perp_dir,
                cone_angle_deg,
                corridor_min_px,
                corridor_max_px,
                weight,
            )
    return BoundaryOffsets(**hits)


@dataclass
class CrossSection:
    """One ring: orthonormal frame plus radial samples at uniform angles."""

    t: float
    center: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray
    radii: np.ndarray  # (angular_samples,) positive
    source: str = "base"  # base | constraint
    poles: dict | None = None  # signed-axis radii the section was fitted from

    def __post_init__(self):
        for name in ("center", "tangent", "normal", "binormal"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float))
        self.radii = np.asarray(self.radii, dtype=float)
        frame = np.stack([self.tangent, self.normal, self.binormal])
        if not np.allclose(frame @ frame.T, np.eye(3), atol=1e-9):
            raise ValueError("section frame must be orthonormal")
        if not np.all(np.isfinite(self.radii)) or np.any(self.radii <= 0):
            raise ValueError("section radii must be finite and positive")

    def boundary_points(self) -> np.ndarray:
        a = len(self.radii)
        theta = 2.0 * np.pi * np.arange(a) / a
        dirs = (
            np.cos(theta)[:, None] * self.normal[None, :]
            + np.sin(theta)[:, None] * self.binormal[None, :]
        )
        return self.center[None, :] + self.radii[:, None] * dirs


@dataclass
class GeneralizedCylinder:
    skeleton: Skeleton
    params: np.ndarray
    sections: list[CrossSection]

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        if len(self.sections) != len(self.params):
            raise ValueError("one section per parameter")
        if np.any(np.diff(self.params) <= 0):
            raise ValueError("sections must be ordered by t")
        for a, b in zip(self.sections[:-1], self.sections[1:]):
            if float(a.normal @ b.normal) <= 0.0:
                raise ValueError("section frames flip between samples")

    @property
    def angular_samples(self) -> int:
        return len(self.sections[0].radii)


def _transport_frames(tangents: np.ndarray) -> np.ndarray:
    """Rotation-minimizing normals: start from a view-aligned axis, rotate
    each frame by the minimal rotation between consecutive tangents, then
    re-align to the view axis whenever it is well conditioned."""
    z = np.array([0.0, 0.0, 1.0])
    m = len(tangents)
    normals = np.empty((m, 3))
    prev = None
    for i in range(m):
        t = tangents[i]
        raw = np.cross(z, t)
        nraw = np.linalg.norm(raw)
        if prev is None:
            if nraw > 1e-9:
                n = raw / nraw
            else:
                n = np.array([1.0, 0.0, 0.0])
                n = n - (n @ t) * t
                n /= np.linalg.norm(n)
        else:
            n = prev - (prev @ t) * t
            nn = np.linalg.norm(n)
            if nn < 1e-9:
                n = np.cross(z, t)
                nn = np.linalg.norm(n)
                if nn < 1e-9:
                    raise ReconstructionError("cannot transport section frame")
            n /= nn
            if nraw > 1e-6:
                aligned = raw / nraw
                n = aligned if (aligned @ n) >= 0 else -aligned
        normals[i] = n
        prev = n
    return normals


def _interpolate_channel(params: np.ndarray, values: list[float | None]) -> np.ndarray:
    """Fill failed samples from the nearest successful neighbors along t."""
    vals = np.array([np.nan if v is None else v for v in values], dtype=float)
    good = ~np.isnan(vals)
    if not np.any(good):
        raise ReconstructionError("boundary search failed at every sample")
    return np.interp(params, params[good], vals[good])


def build_generalized_cylinder(
    pair: CameraPair,
    edges_front: EdgeMap,
    edges_side: EdgeMap,
    alignment: StrokePair,
    m: int = 32,
    a: int = 32,
    cone_angle_deg: float = CONE_ANGLE_DEG,
    corridor_min_px: float = CORRIDOR_MIN_PX,
    corridor_max_px: float = CORRIDOR_MAX_PX,
    weight: float = 1.0,
    min_radius: float = MIN_RADIUS,
) -> GeneralizedCylinder:
    """Skeleton from the stroke pair, then one elliptical cross-section per
    sample with poles given by the per-view boundary offsets."""
    from .refine import fit_cross_section  # section rule lives with refinement

    if m < 2:
        raise ValueError("need at least two skeleton samples")
    if a < 8:
        raise ValueError("need at least eight angular samples")
    skeleton = Skeleton.from_stroke_pair(pair, alignment)
    params = cosine_spaced(m)

    offsets = [
        boundary_search(
            edges_front,
            edges_side,
            skeleton,
            float(t),
            cone_angle_deg,
            corridor_min_px,
            corridor_max_px,
            weight,
        )
        for t in params
    ]
    channels = {
        name: _interpolate_channel(
            params, [getattr(o, name).offset if getattr(o, name) else None for o in offsets]
        )
        for name in ("front_pos", "front_neg", "side_pos", "side_neg")
    }

    points = np.array([skeleton.point(float(t)) for t in params])
    tangents = np.array([skeleton.tangent(float(t)) for t in params])
    normals = _transport_frames(tangents)

    theta = 2.0 * np.pi * np.arange(a) / a
    sections = []
    for i, t in enumerate(params):
        tan3 = tangents[i]
        n = normals[i]
        b = np.cross(tan3, n)
        # Map the per-view offsets onto the signed frame axes.
        xi_pos, xi_neg = channels["front_pos"][i], channels["front_neg"][i]
        t2f = np.array([tan3[0], tan3[1]])
        if np.linalg.norm(t2f) > 1e-9:
            ray_f = np.array([-t2f[1], t2f[0]])
            if float(np.array([n[0], n[1]]) @ ray_f) < 0.0:
                xi_pos, xi_neg = xi_neg, xi_pos
        eta_pos, eta_neg = channels["side_pos"][i], channels["side_neg"][i]
        t2s = np.array([-tan3[2], tan3[1]])
        if np.linalg.norm(t2s) > 1e-9:
            ray_s = np.array([-t2s[1], t2s[0]])
            if float(np.array([-b[2], b[1]]) @ ray_s) < 0.0:
                eta_pos, eta_neg = eta_neg, eta_pos
        poles = {
            "xi_pos": max(xi_pos, min_radius),
            "xi_neg": max(xi_neg, min_radius),
            "eta_pos": max(eta_pos, min_radius),
            "eta_neg": max(eta_neg, min_radius),
        }
        curve = fit_cross_section(axis_poles=poles)
        radii = np.maximum(curve.radial_many(theta), min_radius)
        sections.append(
            CrossSection(
                t=float(t),
                center=points[i],
                tangent=tan3,
                normal=n,
                binormal=b,
                radii=radii,
                poles=poles,
            )
        )
    return GeneralizedCylinder(skeleton=skeleton, params=params, sections=sections)


def _signed_volume(vertices: np.ndarray, triangles: np.ndarray) -> float:
    v0 = vertices[triangles[:, 0]]
    v1 = vertices[triangles[:, 1]]
    v2 = vertices[triangles[:, 2]]
    return float(np.sum(np.einsum("ij,ij->i", v0, np.cross(v1, v2))) / 6.0)


def tessellate_with_layout(
    gc: GeneralizedCylinder,
    part_id: str = "part",
    cap_segments: tuple[int, int] = (1, 1),
    provenance: str = "base",
):
    """Closed triangle mesh plus cap bookkeeping for later editing.

    Side quads connect consecutive rings; each cap is a planar fan, optionally
    subdivided into concentric rings (cap_segments per end).  Windings are
    fixed up globally so outward normals enclose positive volume.  Returns
    (PartMesh, [CapRegion, CapRegion]).
    """
    from .mesh import PartMesh
    from .refine import CapRegion

    m = len(gc.sections)
    a = gc.angular_samples
    rings = [s.boundary_points() for s in gc.sections]
    vertices = [p for ring in rings for p in ring]
    triangles = []

    def ring_index(i, j):
        return i * a + j % a

    for i in range(m - 1):
        for j in range(a):
            p00 = ring_index(i, j)
            p01 = ring_index(i, j + 1)
            p10 = ring_index(i + 1, j)
            p11 = ring_index(i + 1, j + 1)
            triangles.append([p00, p01, p11])
            triangles.append([p00, p11, p10])

    def add_cap(section: CrossSection, ring_start: int, segments: int, flip: bool, end: int):
        tri_start = len(triangles)
        outer = list(range(ring_start, ring_start + a))
        interior: list[int] = []
        center_pt = section.center
        prev = outer
        for k in range(1, segments):
            scale = 1.0 - k / segments
            base = len(vertices)
            ring_pts = center_pt[None, :] + scale * (
                np.asarray([vertices[v] for v in outer]) - center_pt[None, :]
            )
            vertices.extend(ring_pts)
            cur = list(range(base, base + a))
            interior.extend(cur)
            for j in range(a):
                q00, q01 = prev[j], prev[(j + 1) % a]
                q10, q11 = cur[j], cur[(j + 1) % a]
                tri1, tri2 = [q00, q01, q11], [q00, q11, q10]
                if flip:
                    tri1, tri2 = tri1[::-1], tri2[::-1]
                triangles.append(tri1)
                triangles.append(tri2)
            prev = cur
        ci = len(vertices)
        vertices.append(center_pt)
        interior.append(ci)
        for j in range(a):
            tri = [prev[j], prev[(j + 1) % a], ci]
            if flip:
                tri = tri[::-1]
            triangles.append(tri)
        return CapRegion(
            end=end,
            ring_vertices=np.asarray(outer, dtype=int),
            interior_vertices=np.asarray(interior, dtype=int),
            triangles=np.arange(tri_start, len(triangles)),
            axis=section.tangent,
        )

    cap0 = add_cap(gc.sections[0], 0, cap_segments[0], flip=True, end=0)
    cap1 = add_cap(gc.sections[-1], (m - 1) * a, cap_segments[1], flip=False, end=1)

    verts = np.asarray(vertices, dtype=float)
    tris = np.asarray(triangles, dtype=np.int64)
    if _signed_volume(verts, tris) < 0:
        tris = tris[:, ::-1]
    mesh = PartMesh(part_id=part_id, vertices=verts, triangles=tris, provenance=provenance)
    for cap in (cap0, cap1):
        cap.triangles = tris[cap.triangles]
    return mesh, [cap0, cap1]


def tessellate(
    gc: GeneralizedCylinder,
    part_id: str = "part",
    cap_segments: tuple[int, int] = (1, 1),
    provenance: str = "base",
):
    """Closed triangle mesh for the generalized cylinder (see
    tessellate_with_layout)."""
    mesh, _ = tessellate_with_layout(gc, part_id, cap_segments, provenance)
    return mesh
