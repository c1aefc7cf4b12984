import math

import numpy as np
import pytest

from orthosketch.edges import (
    EdgeMap,
    ViewImage,
    extract_edges,
    load_png,
    nearest_edge,
    ray_edge_intersections,
)
from orthosketch.errors import EmptyEdgeMapError, UnsupportedFormatError


# ---------------------------------------------------------------- oracles

def nearest_oracle(points, qx, qy):
    """Linear scan, plain Python, lowest index on ties."""
    best_i, best_d2 = -1, float("inf")
    for i, (x, y) in enumerate(points):
        d2 = (x - qx) ** 2 + (y - qy) ** 2
        if d2 < best_d2:
            best_i, best_d2 = i, d2
    return best_i, math.sqrt(best_d2)


def cone_oracle(points, ox, oy, ux, uy, tol):
    """Brute-force cone filter + distance sort."""
    hits = []
    tan_tol = math.tan(tol)
    for i, (x, y) in enumerate(points):
        dx, dy = x - ox, y - oy
        along = ux * dx + uy * dy
        perp = abs(ux * dy - uy * dx)
        if along > 1e-9 and perp <= tan_tol * along:
            hits.append((dx * dx + dy * dy, i, (x, y)))
    hits.sort(key=lambda h: (h[0], h[1]))
    return [h[2] for h in hits]


def disk_image(size=64, radius=20.0, center=None):
    h = w = size
    if center is None:
        center = ((w - 1) / 2, (h - 1) / 2)
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    d = np.hypot(cols - center[0], rows - center[1])
    return ViewImage(view="front", pixels=np.where(d <= radius, 0, 255).astype(np.uint8))


# --------------------------------------------------------------- ViewImage

def test_world_pixel_round_trip():
    img = ViewImage(view="front", pixels=np.full((32, 48), 255, np.uint8), scale=2.0)
    x, y = img.world_from_pixel(10, 3)
    col, row = img.pixel_from_world(x, y)
    assert col == pytest.approx(10)
    assert row == pytest.approx(3)


def test_center_pixel_maps_to_origin():
    img = ViewImage(view="front", pixels=np.full((33, 33), 255, np.uint8))
    x, y = img.world_from_pixel(16, 16)
    assert x == 0.0 and y == 0.0


def test_y_is_up():
    img = ViewImage(view="front", pixels=np.full((33, 33), 255, np.uint8))
    _, y_top = img.world_from_pixel(0, 0)
    _, y_bot = img.world_from_pixel(0, 32)
    assert y_top > 0 > y_bot


def test_viewimage_rejects_small_and_bad_dtype():
    with pytest.raises(ValueError):
        ViewImage(view="front", pixels=np.zeros((4, 4), np.uint8))
    with pytest.raises(UnsupportedFormatError):
        ViewImage(view="front", pixels=np.zeros((16, 16), np.float32))
    with pytest.raises(UnsupportedFormatError):
        ViewImage(view="front", pixels=np.zeros((16, 16, 3), np.uint8))


def test_load_png_round_trip(tmp_path):
    from PIL import Image

    arr = np.random.default_rng(0).integers(0, 255, size=(16, 16), dtype=np.uint8)
    p = tmp_path / "g.png"
    Image.fromarray(arr, mode="L").save(p)
    img = load_png(p, view="side", scale=0.5)
    assert img.pixels.shape == (16, 16)
    assert np.array_equal(img.pixels, arr)
    assert img.scale == 0.5


def test_load_png_rejects_non_png(tmp_path):
    p = tmp_path / "x.jpg"
    from PIL import Image

    Image.fromarray(np.zeros((16, 16), np.uint8), mode="L").save(p, format="JPEG")
    with pytest.raises(UnsupportedFormatError):
        load_png(p, view="front")


# ------------------------------------------------------------ extract_edges

def test_blank_image_has_no_edges():
    img = ViewImage(view="front", pixels=np.full((64, 64), 255, np.uint8))
    edges = extract_edges(img)
    assert len(edges) == 0


def test_disk_edges_form_a_ring():
    img = disk_image(64, 20.0)
    edges = extract_edges(img)
    assert len(edges) > 30
    r = np.hypot(edges.points[:, 0], edges.points[:, 1])
    assert np.all(np.abs(r - 20.0) <= 1.5)


def test_vertical_step_edge_location():
    w = h = 64
    c = 40
    px = np.full((h, w), 255, np.uint8)
    px[:, c:] = 0
    img = ViewImage(view="front", pixels=px)
    edges = extract_edges(img)
    assert len(edges) > 0
    x_step, _ = img.world_from_pixel(c - 0.5, 0)
    inner = edges.points[np.abs(edges.points[:, 1]) < (h / 2 - 4)]
    assert np.all(np.abs(inner[:, 0] - float(x_step)) <= 1.0)


def test_extract_edges_deterministic():
    img = disk_image(64, 17.0)
    e1 = extract_edges(img)
    e2 = extract_edges(img)
    assert np.array_equal(e1.points, e2.points)


def test_edge_points_map_back_into_image():
    img = disk_image(64, 20.0)
    edges = extract_edges(img)
    cols, rows = img.pixel_from_world(edges.points[:, 0], edges.points[:, 1])
    assert np.all((cols >= 0) & (cols <= 63) & (rows >= 0) & (rows <= 63))
    # integer pixel centers exactly recover the stored indices
    assert np.array_equal(np.rint(rows).astype(int), edges.pixel_indices[:, 0])
    assert np.array_equal(np.rint(cols).astype(int), edges.pixel_indices[:, 1])


def test_threshold_validation():
    img = disk_image()
    with pytest.raises(ValueError):
        extract_edges(img, 0.3, 0.1)


# ------------------------------------------------------------- nearest_edge

def test_nearest_singleton():
    edges = EdgeMap(view="front", points=np.array([[3.0, 4.0]]), scale=1.0)
    p, d = nearest_edge(edges, (0.0, 0.0))
    assert np.allclose(p, [3.0, 4.0])
    assert d == pytest.approx(5.0)


def test_nearest_zero_distance():
    edges = EdgeMap(view="front", points=np.array([[1.0, 1.0], [2.0, 2.0]]), scale=1.0)
    _, d = nearest_edge(edges, (2.0, 2.0))
    assert d == 0.0


def test_nearest_empty_raises():
    edges = EdgeMap(view="front", points=np.empty((0, 2)), scale=1.0)
    with pytest.raises(EmptyEdgeMapError):
        nearest_edge(edges, (0.0, 0.0))


def test_nearest_matches_bruteforce_on_random_queries():
    rng = np.random.default_rng(23)
    pts = rng.uniform(-50, 50, size=(700, 2))
    edges = EdgeMap(view="front", points=pts, scale=1.0)
    for _ in range(1000):
        q = rng.uniform(-80, 80, size=2)
        want_i, want_d = nearest_oracle(pts.tolist(), q[0], q[1])
        got_p, got_d = nearest_edge(edges, q)
        assert np.array_equal(got_p, pts[want_i])
        assert got_d == pytest.approx(want_d, abs=1e-12)


def test_nearest_tie_breaks_to_lowest_index():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    edges = EdgeMap(view="front", points=pts, scale=1.0)
    p, d = nearest_edge(edges, (0.0, 0.0))
    assert np.array_equal(p, pts[0])


# --------------------------------------------------- ray_edge_intersections

def test_ray_axis_aligned_hit():
    ys = np.arange(-3, 4, dtype=float)
    pts = np.column_stack([np.full_like(ys, 5.0), ys])
    edges = EdgeMap(view="front", points=pts, scale=1.0)
    hits = ray_edge_intersections(edges, (0.0, 0.0), (1.0, 0.0), math.radians(10))
    assert len(hits) >= 1
    assert np.allclose(hits[0], [5.0, 0.0])


def test_ray_no_hits_in_cone():
    pts = np.array([[0.0, 10.0], [0.0, -10.0]])
    edges = EdgeMap(view="front", points=pts, scale=1.0)
    hits = ray_edge_intersections(edges, (0.0, 0.0), (1.0, 0.0), math.radians(5))
    assert len(hits) == 0


def test_ray_matches_bruteforce_oracle():
    rng = np.random.default_rng(31)
    pts = rng.uniform(-30, 30, size=(400, 2))
    edges = EdgeMap(view="front", points=pts, scale=1.0)
    for _ in range(50):
        origin = rng.uniform(-10, 10, size=2)
        ang = rng.uniform(0, 2 * math.pi)
        d = (math.cos(ang), math.sin(ang))
        tol = rng.uniform(0.05, math.pi / 4)
        want = cone_oracle(pts.tolist(), origin[0], origin[1], d[0], d[1], tol)
        got = ray_edge_intersections(edges, origin, d, tol)
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert g[0] == w[0] and g[1] == w[1]


def test_ray_validates_input():
    edges = EdgeMap(view="front", points=np.array([[1.0, 0.0]]), scale=1.0)
    with pytest.raises(ValueError):
        ray_edge_intersections(edges, (0, 0), (2.0, 0.0), 0.1)
    with pytest.raises(ValueError):
        ray_edge_intersections(edges, (0, 0), (1.0, 0.0), 2.0)
