"""Drawing images, edge extraction, and edge-point queries.

World convention: each view plane has its origin at the image center, x right,
y up, so a pixel (col, row) maps to
    x = (col - (W-1)/2) * scale + ox
    y = ((H-1)/2 - row) * scale + oy
Under this convention the two drawings share the vertical axis and the
canonical camera pair applies directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage

from . import kernels
from .errors import EmptyEdgeMapError, UnsupportedFormatError

GAUSSIAN_SIGMA = 1.4
GRID_CELL_PX = 4.0


@dataclass(frozen=True)
class ViewImage:
    """One orthographic drawing: pixels plus the pixel-to-world transform."""

    view: str
    pixels: np.ndarray  # HxW uint8 grayscale or HxWx4 uint8 RGBA
    scale: float = 1.0
    offset: tuple[float, float] = (0.0, 0.0)
    source: str | None = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim == 2:
            pass
        elif px.ndim == 3 and px.shape[2] == 4:
            pass
        else:
            raise UnsupportedFormatError(
                f"expected grayscale or RGBA pixels, got shape {px.shape}"
            )
        if px.dtype != np.uint8:
            raise UnsupportedFormatError("expected 8-bit pixel data")
        if px.shape[0] < 8 or px.shape[1] < 8:
            raise ValueError("image must be at least 8x8")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def world_from_pixel(self, col, row):
        ox, oy = self.offset
        x = (np.asarray(col, dtype=float) - (self.width - 1) / 2) * self.scale + ox
        y = ((self.height - 1) / 2 - np.asarray(row, dtype=float)) * self.scale + oy
        return x, y

    def pixel_from_world(self, x, y):
        ox, oy = self.offset
        col = (np.asarray(x, dtype=float) - ox) / self.scale + (self.width - 1) / 2
        row = (self.height - 1) / 2 - (np.asarray(y, dtype=float) - oy) / self.scale
        return col, row

    def world_bounds(self):
        """(xmin, ymin, xmax, ymax) spanned by pixel centers."""
        x0, y0 = self.world_from_pixel(0, self.height - 1)
        x1, y1 = self.world_from_pixel(self.width - 1, 0)
        return float(x0), float(y0), float(x1), float(y1)

    def grayscale(self) -> np.ndarray:
        """Float64 luminance; RGBA is composited over white."""
        px = self.pixels
        if px.ndim == 2:
            return px.astype(np.float64)
        rgb = px[..., :3].astype(np.float64)
        lum = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
        alpha = px[..., 3].astype(np.float64) / 255.0
        return alpha * lum + (1.0 - alpha) * 255.0


def load_png(path, view: str, scale: float = 1.0, offset=(0.0, 0.0)) -> ViewImage:
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise UnsupportedFormatError(f"cannot read image {path}: {exc}") from exc
    if img.format != "PNG":
        raise UnsupportedFormatError(f"{path}: only PNG input is supported")
    if img.mode == "L":
        px = np.asarray(img, dtype=np.uint8)
    elif img.mode == "RGBA":
        px = np.asarray(img, dtype=np.uint8)
    elif img.mode in ("RGB", "LA", "P", "I;16", "1"):
        px = np.asarray(img.convert("RGBA"), dtype=np.uint8)
    else:
        raise UnsupportedFormatError(f"{path}: unsupported PNG mode {img.mode}")
    return ViewImage(view=view, pixels=px, scale=scale, offset=tuple(offset), source=str(path))


class _UniformGrid:
    """Exact nearest-point index: uniform cells, expanding-ring search."""

    def __init__(self, points: np.ndarray, cell: float):
        self.points = points
        self.cell = cell
        self.x0 = float(points[:, 0].min())
        self.y0 = float(points[:, 1].min())
        self.extent = float(
            max(np.ptp(points[:, 0]), np.ptp(points[:, 1]), cell)
        )
        ci = np.floor((points[:, 0] - self.x0) / cell).astype(np.int64)
        cj = np.floor((points[:, 1] - self.y0) / cell).astype(np.int64)
        self.cells: dict[tuple[int, int], np.ndarray] = {}
        order = np.lexsort((np.arange(len(points)), cj, ci))
        keys = np.stack([ci[order], cj[order]], axis=1)
        if len(order):
            change = np.nonzero(np.any(np.diff(keys, axis=0) != 0, axis=1))[0] + 1
            starts = np.concatenate([[0], change, [len(order)]])
            for a, b in zip(starts[:-1], starts[1:]):
                self.cells[(int(keys[a, 0]), int(keys[a, 1]))] = np.sort(order[a:b])

    def nearest(self, qx: float, qy: float):
        ci = int(math.floor((qx - self.x0) / self.cell))
        cj = int(math.floor((qy - self.y0) / self.cell))
        best_idx, best_d2 = -1, math.inf
        r = 0
        pts = self.points
        while True:
            ring = self._ring(ci, cj, r)
            for key in ring:
                sub = self.cells.get(key)
                if sub is None:
                    continue
                i, d2 = kernels.nearest_index(pts[sub, 0], pts[sub, 1], qx, qy)
                gi = int(sub[i])
                if d2 < best_d2 or (d2 == best_d2 and gi < best_idx):
                    best_idx, best_d2 = gi, d2
            if best_idx >= 0 and (r - 1) * self.cell > math.sqrt(best_d2):
                break
            r += 1
            # Safety stop: one extra ring beyond the grid plus the query offset.
            reach = abs(qx - self.x0) + abs(qy - self.y0) + self.extent
            if r > 2 + int(reach / self.cell):
                break
        return best_idx, best_d2

    @staticmethod
    def _ring(ci, cj, r):
        if r == 0:
            return [(ci, cj)]
        out = []
        for dj in range(-r, r + 1):
            out.append((ci - r, cj + dj))
            out.append((ci + r, cj + dj))
        for di in range(-r + 1, r):
            out.append((ci + di, cj - r))
            out.append((ci + di, cj + r))
        return out


@dataclass
class EdgeMap:
    """Edge pixels of one view lifted to world coordinates, with an index."""

    view: str
    points: np.ndarray  # (n, 2) world coordinates
    scale: float
    pixel_indices: np.ndarray | None = None  # (n, 2) as (row, col)
    _grid: _UniformGrid | None = field(default=None, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(self.points) and self._grid is None:
            self._grid = _UniformGrid(self.points, GRID_CELL_PX * self.scale)

    def __len__(self) -> int:
        return len(self.points)


def extract_edges(
    img: ViewImage, threshold_lo: float = 0.1, threshold_hi: float = 0.3
) -> EdgeMap:
    """Canny-style detector: blur, gradient, thinning, hysteresis.

    Thresholds are fractions of the maximum thinned gradient magnitude.
    Deterministic; an image with no gradients yields an empty map.
    """
    if not 0 <= threshold_lo < threshold_hi:
        raise ValueError("need 0 <= threshold_lo < threshold_hi")
    gray = img.grayscale()
    smooth = ndimage.gaussian_filter(gray, sigma=GAUSSIAN_SIGMA, mode="nearest")
    gx = ndimage.sobel(smooth, axis=1, mode="nearest")
    gy = ndimage.sobel(smooth, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    keep = kernels.nonmax_suppress(mag, gx, gy)
    thinned = np.where(keep, mag, 0.0)
    peak = float(thinned.max())
    if peak <= 0.0:
        return EdgeMap(view=img.view, points=np.empty((0, 2)), scale=img.scale)
    strong = thinned >= threshold_hi * peak
    weak = (thinned >= threshold_lo * peak) & ~strong
    mask = kernels.hysteresis(strong, weak)
    rows, cols = np.nonzero(mask)
    x, y = img.world_from_pixel(cols, rows)
    return EdgeMap(
        view=img.view,
        points=np.column_stack([x, y]),
        scale=img.scale,
        pixel_indices=np.column_stack([rows, cols]),
    )


def nearest_edge(edges: EdgeMap, q) -> tuple[np.ndarray, float]:
    """Closest edge point to q (exact; ties resolved to the lowest index)."""
    if len(edges) == 0:
        raise EmptyEdgeMapError("edge map has no points")
    qx, qy = float(q[0]), float(q[1])
    idx, d2 = edges._grid.nearest(qx, qy)
    return edges.points[idx].copy(), math.sqrt(d2)


def ray_edge_intersections(edges: EdgeMap, origin, direction, angular_tol: float):
    """Edge points within angular_tol of the ray, ordered by distance."""
    d = np.asarray(direction, dtype=float)
    if abs(float(d @ d) - 1.0) > 2e-9:
        raise ValueError("direction must be a unit vector")
    if not 0.0 < angular_tol <= math.pi / 4:
        raise ValueError("angular tolerance must be in (0, pi/4]")
    if len(edges) == 0:
        return np.empty((0, 2))
    idx = kernels.cone_candidates(
        edges.points[:, 0],
        edges.points[:, 1],
        float(origin[0]),
        float(origin[1]),
        float(d[0]),
        float(d[1]),
        math.tan(angular_tol),
    )
    return edges.points[idx].copy()
