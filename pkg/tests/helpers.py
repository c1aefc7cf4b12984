"""Shared fixtures and independent oracles for the test suite."""

import math

import numpy as np

from orthosketch.annotations import Part, Project, StrokePair, add_stroke
from orthosketch.edges import EdgeMap, ViewImage
from orthosketch.geometry import CameraPair


# ---------------------------------------------------------------- oracles

def corridor_oracle(points, ox, oy, ux, uy, tan_cone, hw_min, hw_max):
    """Exhaustive scan implementing the boundary-search selection rule:
    outermost corridor candidate, ties by smaller perp then lower index.
    Plain Python on purpose; must agree with the kernels bit for bit."""
    best = None  # (along, perp, idx)
    for i in range(len(points)):
        dx = points[i][0] - ox
        dy = points[i][1] - oy
        along = ux * dx + uy * dy
        perp = abs(ux * dy - uy * dx)
        hw = along * tan_cone
        if hw < hw_min:
            hw = hw_min
        if hw > hw_max:
            hw = hw_max
        if along > 1e-9 and perp <= hw:
            if (
                best is None
                or along > best[0]
                or (along == best[0] and perp < best[1])
            ):
                best = (along, perp, i)
    return best


def point_triangle_distance(p, a, b, c):
    """Exact distance from points to triangles (matching leading shapes)."""
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = (ab * ap).sum(-1)
    d2 = (ac * ap).sum(-1)
    bp = p - b
    d3 = (ab * bp).sum(-1)
    d4 = (ac * bp).sum(-1)
    cp = p - c
    d5 = (ab * cp).sum(-1)
    d6 = (ac * cp).sum(-1)

    m_a = (d1 <= 0) & (d2 <= 0)
    m_b = (d3 >= 0) & (d4 <= d3)
    m_c = (d6 >= 0) & (d5 <= d6)
    vc = d1 * d4 - d3 * d2
    m_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    vb = d5 * d2 - d1 * d6
    m_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    va = d3 * d6 - d5 * d4
    m_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)

    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
        w = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
        den_bc = (d4 - d3) + (d5 - d6)
        u = np.where(den_bc != 0, (d4 - d3) / den_bc, 0.0)
        den = va + vb + vc
        vv = np.where(den != 0, vb / den, 0.0)
        ww = np.where(den != 0, vc / den, 0.0)

    closest = a + vv[..., None] * ab + ww[..., None] * ac
    closest = np.where(m_bc[..., None], b + u[..., None] * (c - b), closest)
    closest = np.where(m_ac[..., None], a + w[..., None] * ac, closest)
    closest = np.where(m_ab[..., None], a + v[..., None] * ab, closest)
    closest = np.where(m_c[..., None], c, closest)
    closest = np.where(m_b[..., None], b, closest)
    closest = np.where(m_a[..., None], a, closest)
    return np.linalg.norm(p - closest, axis=-1)


def point_mesh_distance(points, mesh, k=32):
    """Exact distance from each point to the mesh surface; candidate
    triangles come from a centroid tree."""
    from scipy.spatial import cKDTree

    v = mesh.vertices
    t = mesh.triangles
    centroids = v[t].mean(axis=1)
    k = min(k, len(t))
    _, cand = cKDTree(centroids).query(np.asarray(points, float), k=k)
    cand = np.atleast_2d(cand)
    p = np.asarray(points, float)[:, None, :]
    a = v[t[cand, 0]]
    b = v[t[cand, 1]]
    c = v[t[cand, 2]]
    return point_triangle_distance(p, a, b, c).min(axis=1)


# --------------------------------------------------------------- fixtures

def circle_edge_points(radius, n=720, center=(0.0, 0.0)):
    theta = 2 * np.pi * np.arange(n) / n
    return np.column_stack(
        [center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)]
    )


def circle_edge_map(radius, view="front", n=720, scale=1.0, center=(0.0, 0.0)):
    return EdgeMap(view=view, points=circle_edge_points(radius, n, center), scale=scale)


def tapered_wall_edge_map(r_bottom, r_top, half_height, view="front", n=400, scale=1.0):
    """Trapezoid outline: two slanted walls plus top and bottom edges."""
    ys = np.linspace(-half_height, half_height, n)
    w = r_bottom + (r_top - r_bottom) * (ys + half_height) / (2 * half_height)
    left = np.column_stack([-w, ys])
    right = np.column_stack([w, ys])
    xs_b = np.linspace(-r_bottom, r_bottom, n // 2)
    xs_t = np.linspace(-r_top, r_top, n // 2)
    bottom = np.column_stack([xs_b, np.full_like(xs_b, -half_height)])
    top = np.column_stack([xs_t, np.full_like(xs_t, half_height)])
    return EdgeMap(
        view=view, points=np.vstack([right, left, bottom, top]), scale=scale
    )


def vertical_alignment_pair(half_height, part_id="p1", stroke_id="s1"):
    pts = np.array([[0.0, -half_height], [0.0, half_height]])
    return StrokePair(
        id=stroke_id,
        part_id=part_id,
        label="alignment",
        primary_view="front",
        front=pts.copy(),
        side=pts.copy(),
    )


def canonical_pair():
    return CameraPair.canonical()


# ---------------------------------------------------- rendered drawings

def render_disk(size, radius, center=None):
    """White canvas, black filled disk; returns uint8 pixels."""
    h = w = size
    if center is None:
        center = ((w - 1) / 2, (h - 1) / 2)
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    d = np.hypot(cols - center[0], rows - center[1])
    return np.where(d <= radius, 0, 255).astype(np.uint8)


def render_trapezoid(size, r_bottom, r_top, half_height):
    """White canvas, black filled vertical trapezoid centered in the image."""
    h = w = size
    cy = (h - 1) / 2
    cx = (w - 1) / 2
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    y = cy - rows  # world y per pixel row
    frac = np.clip((y + half_height) / (2 * half_height), 0.0, 1.0)
    width = r_bottom + (r_top - r_bottom) * frac
    inside = (np.abs(cols - cx) <= width) & (np.abs(y) <= half_height)
    return np.where(inside, 0, 255).astype(np.uint8)


def sphere_project(size=512, radius=200.0):
    """Project with two rendered circle drawings and a diameter alignment."""
    project = Project()
    px = render_disk(size, radius)
    project.images = {
        "front": ViewImage(view="front", pixels=px),
        "side": ViewImage(view="side", pixels=px.copy()),
    }
    add_stroke(
        project,
        "front",
        [[0.0, -radius], [0.0, radius]],
        "alignment",
        "sphere",
    )
    return project


def tapered_project(size=512, r_bottom=50.0, r_top=30.0, half_height=150.0):
    project = Project()
    px = render_trapezoid(size, r_bottom, r_top, half_height)
    project.images = {
        "front": ViewImage(view="front", pixels=px),
        "side": ViewImage(view="side", pixels=px.copy()),
    }
    add_stroke(
        project,
        "front",
        [[0.0, -half_height], [0.0, half_height]],
        "alignment",
        "cone",
    )
    return project


def make_part(pairs, part_id="p1"):
    part = Part(id=part_id, name=part_id)
    part.pairs = list(pairs)
    return part


def random_edge_map(rng, size=64, n_points=150, view="front"):
    pts = rng.uniform(-size / 2, size / 2, size=(n_points, 2))
    return EdgeMap(view=view, points=pts, scale=1.0)
