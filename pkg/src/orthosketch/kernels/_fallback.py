"""Vectorized numpy implementations of the hot kernels.

These are the reference semantics; the compiled extension must reproduce them
bit for bit.  All selection rules are pure float arithmetic (no trig, no
norms) so the two backends cannot disagree on ties.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

BACKEND = "python"

# tan(22.5 deg) and tan(67.5 deg): sector boundaries for gradient orientation
_T_LO = 0.41421356237309503
_T_HI = 2.414213562373095


def nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep pixels that are local maxima along their gradient direction.

    Sectors are chosen by comparing |gy| against tan(22.5)/tan(67.5) times
    |gx|; diagonal sign comes from gx*gy.  Border pixels are dropped.
    """
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=bool)
    if h < 3 or w < 3:
        return keep
    c = mag[1:-1, 1:-1]
    adx = np.abs(gx[1:-1, 1:-1])
    ady = np.abs(gy[1:-1, 1:-1])
    sgn = gx[1:-1, 1:-1] * gy[1:-1, 1:-1]

    horiz = ady <= _T_LO * adx
    vert = ady >= _T_HI * adx
    diag_main = ~horiz & ~vert & (sgn > 0)
    diag_anti = ~horiz & ~vert & (sgn <= 0)

    n1 = np.where(
        horiz,
        mag[1:-1, 2:],
        np.where(vert, mag[2:, 1:-1], np.where(diag_main, mag[2:, 2:], mag[2:, :-2])),
    )
    n2 = np.where(
        horiz,
        mag[1:-1, :-2],
        np.where(vert, mag[:-2, 1:-1], np.where(diag_main, mag[:-2, :-2], mag[:-2, 2:])),
    )
    keep[1:-1, 1:-1] = (c >= n1) & (c >= n2) & (c > 0)
    return keep


def hysteresis(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """Strong pixels plus weak pixels 8-connected to a strong one."""
    both = strong | weak
    labels, n = ndimage.label(both, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return np.zeros_like(strong)
    keep_label = np.zeros(n + 1, dtype=bool)
    keep_label[np.unique(labels[strong])] = True
    keep_label[0] = False
    return keep_label[labels]


def nearest_index(xs: np.ndarray, ys: np.ndarray, qx: float, qy: float):
    """Index of the point minimizing squared distance; ties -> lowest index."""
    if len(xs) == 0:
        return -1, np.inf
    d2 = (xs - qx) ** 2 + (ys - qy) ** 2
    i = int(np.argmin(d2))
    return i, float(d2[i])


def corridor_select(
    xs: np.ndarray,
    ys: np.ndarray,
    ox: float,
    oy: float,
    ux: float,
    uy: float,
    tan_cone: float,
    hw_min: float,
    hw_max: float,
):
    """Outermost edge point inside the ray corridor.

    A point qualifies when its along-ray coordinate is positive and its
    perpendicular offset is within clamp(along * tan_cone, hw_min, hw_max).
    Among qualifiers the largest along wins; ties prefer smaller perp, then
    smaller index.  Returns (index, along, perp) or (-1, 0.0, 0.0).
    """
    dx = xs - ox
    dy = ys - oy
    along = ux * dx + uy * dy
    perp = np.abs(ux * dy - uy * dx)
    hw = along * tan_cone
    hw = np.where(hw < hw_min, hw_min, hw)
    hw = np.where(hw > hw_max, hw_max, hw)
    mask = (along > 1e-9) & (perp <= hw)
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return -1, 0.0, 0.0
    order = np.lexsort((idx, perp[idx], -along[idx]))
    best = int(idx[order[0]])
    return best, float(along[best]), float(perp[best])


def cone_candidates(
    xs: np.ndarray,
    ys: np.ndarray,
    ox: float,
    oy: float,
    ux: float,
    uy: float,
    tan_tol: float,
):
    """Indices of points within the angular cone of the ray, ordered by
    squared distance from the origin (ties -> lowest index)."""
    dx = xs - ox
    dy = ys - oy
    along = ux * dx + uy * dy
    perp = np.abs(ux * dy - uy * dx)
    mask = (along > 1e-9) & (perp <= tan_tol * along)
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return idx
    d2 = dx[idx] ** 2 + dy[idx] ** 2
    order = np.lexsort((idx, d2))
    return idx[order]
