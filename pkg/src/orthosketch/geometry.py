"""Two-view camera model, triangulation, and the parametric curves used everywhere else.

Conventions: world units are view-plane units (pixels of the drawing, scaled).
The shared vertical axis is y.  The front view images (x, y); the side view
images (-z, y).  A world point p maps to view coordinates by a simplified
pinhole: the divisor is either the point's own depth (true pinhole) or a fixed
depth, which makes the projection parallel.  The canonical two-view rig uses
the fixed-depth form so that corresponding points have exactly equal y and the
pair of views inverts exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline, make_interp_spline

from .errors import (
    DegenerateDepthError,
    DomainParameterError,
    EpipolarViolationError,
    SingularSystemError,
)

_DEPTH_EPS = 1e-12
_ORTHO_TOL = 1e-9

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]


def _as_vec(p, dim):
    v = np.asarray(p, dtype=float)
    if v.shape != (dim,):
        raise ValueError(f"expected a {dim}-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("coordinates must be finite")
    return v


@dataclass(frozen=True)
class Camera:
    """One view: row-major rotation, translation, focal length.

    ``fixed_depth`` switches the divisor from the projected point's depth to a
    constant, which turns the projection parallel (the drawing-plane model the
    two-view rig relies on).  ``None`` keeps the true pinhole divisor.
    """

    rotation: np.ndarray
    translation: np.ndarray
    focal: float
    fixed_depth: float | None = None

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = _as_vec(self.translation, 3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        if not np.allclose(r @ r.T, np.eye(3), atol=_ORTHO_TOL):
            raise ValueError("rotation must be orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant +1")
        if not self.focal > 0:
            raise ValueError("focal length must be positive")
        if self.fixed_depth is not None and abs(self.fixed_depth) < _DEPTH_EPS:
            raise ValueError("fixed depth must be nonzero")

    @property
    def view_dir(self) -> np.ndarray:
        return self.rotation[2]


def project(camera: Camera, p) -> np.ndarray:
    """Map a world point into the camera's 2D view plane.

    Divisor is R2.p + Tz for a true pinhole camera, or the camera's fixed
    depth when set.  Raises DegenerateDepthError when the divisor vanishes.
    """
    v = _as_vec(p, 3)
    r, t, f = camera.rotation, camera.translation, camera.focal
    if camera.fixed_depth is not None:
        den = camera.fixed_depth
    else:
        den = float(r[2] @ v + t[2])
    if abs(den) < _DEPTH_EPS:
        raise DegenerateDepthError(f"point depth {den!r} too close to the camera plane")
    return np.array(
        [f * (r[0] @ v + t[0]) / den, f * (r[1] @ v + t[1]) / den]
    )


def epipolar_ok(q1, q2, tol: float) -> bool:
    """True iff the two view points agree in y within ``tol``."""
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    return abs(float(q1[1]) - float(q2[1])) <= tol


# Side view x axis is -z so that the reconstruction of a point seen at
# (x1, y1) front and (x2, y2) side is (x1, y1, -x2).
_SIDE_ROTATION = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


@dataclass(frozen=True)
class CameraPair:
    """The front/side rig: equal focal lengths, shared y axis, orthogonal views."""

    front: Camera
    side: Camera
    snap_tol: float = 0.5

    def __post_init__(self):
        f, s = self.front, self.side
        if abs(f.focal - s.focal) > _ORTHO_TOL:
            raise ValueError("focal lengths must match")
        if abs(f.translation[2]) > _ORTHO_TOL or abs(s.translation[2]) > _ORTHO_TOL:
            raise ValueError("both z translations must be zero")
        if abs(f.translation[1] - s.translation[1]) > _ORTHO_TOL:
            raise ValueError("y translations must match")
        if abs(f.view_dir @ s.view_dir) > _ORTHO_TOL:
            raise ValueError("view directions must be orthogonal")
        y = np.array([0.0, 1.0, 0.0])
        if abs(f.view_dir @ y) > _ORTHO_TOL or abs(s.view_dir @ y) > _ORTHO_TOL:
            raise ValueError("view directions must be orthogonal to the y axis")
        if abs(f.rotation[1] @ s.rotation[1] - 1.0) > _ORTHO_TOL:
            raise ValueError("views must share the vertical image axis")

    @staticmethod
    def canonical(focal: float = 1.0, snap_tol: float = 0.5) -> "CameraPair":
        """Front view (x, y), side view (-z, y), parallel projection."""
        front = Camera(np.eye(3), np.zeros(3), focal, fixed_depth=focal)
        side = Camera(_SIDE_ROTATION, np.zeros(3), focal, fixed_depth=focal)
        return CameraPair(front, side, snap_tol)

    def project_front(self, p) -> np.ndarray:
        return project(self.front, p)

    def project_side(self, p) -> np.ndarray:
        return project(self.side, p)


def triangulate(pair: CameraPair, q1, q2) -> np.ndarray:
    """Reconstruct the world point seen at q1 (front) and q2 (side).

    y is averaged across the views to absorb sub-tolerance disagreement; a
    mismatch beyond the pair's snap tolerance raises EpipolarViolationError.
    """
    q1 = _as_vec(q1, 2)
    q2 = _as_vec(q2, 2)
    if not epipolar_ok(q1, q2, pair.snap_tol):
        raise EpipolarViolationError(
            f"|{q1[1]} - {q2[1]}| exceeds snap tolerance {pair.snap_tol}"
        )
    y = 0.5 * (q1[1] + q2[1])
    fr, si = pair.front, pair.side
    if fr.fixed_depth is None or si.fixed_depth is None:
        raise ValueError("triangulation requires the fixed-depth rig")
    # Each view contributes linear equations R0.p + Tx = q_x * d / f (and the
    # shared row for y); three of them pin the point.
    m = np.vstack([fr.rotation[0], fr.rotation[1], si.rotation[0]])
    rhs = np.array(
        [
            q1[0] * fr.fixed_depth / fr.focal - fr.translation[0],
            y * fr.fixed_depth / fr.focal - fr.translation[1],
            q2[0] * si.fixed_depth / si.focal - si.translation[0],
        ]
    )
    # Canonical rig: rows are +/- unit axes, solvable by direct assignment so
    # the round trip is bit-exact.
    if (
        np.array_equal(fr.rotation, np.eye(3))
        and np.array_equal(si.rotation, _SIDE_ROTATION)
    ):
        return np.array([rhs[0], rhs[1], -rhs[2]])
    return np.linalg.solve(m, rhs)


def _catmull_rom_tangents(points: np.ndarray) -> np.ndarray:
    """Central differences inside, one-sided at the ends."""
    n = len(points)
    tangents = np.empty_like(points)
    tangents[0] = points[1] - points[0]
    tangents[-1] = points[-1] - points[-2]
    if n > 2:
        tangents[1:-1] = 0.5 * (points[2:] - points[:-2])
    return tangents


@dataclass(frozen=True)
class HermiteCurve:
    """Piecewise-cubic curve through ordered key points, any dimension.

    Knots are uniform on [0, 1]; tangents follow the Catmull-Rom rule, so the
    curve is C1 and passes through every key point exactly.
    """

    points: np.ndarray
    tangents: np.ndarray = field(init=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 2:
            raise ValueError("need at least two key points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("key points must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tangents", _catmull_rom_tangents(pts))

    @property
    def n_keys(self) -> int:
        return len(self.points)

    def eval(self, t: float) -> np.ndarray:
        if not 0.0 <= t <= 1.0:
            raise DomainParameterError(f"parameter {t} outside [0, 1]")
        n = self.n_keys
        s = t * (n - 1)
        i = min(int(s), n - 2)
        u = s - i
        if u == 0.0:
            return self.points[i].copy()
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        return (
            h00 * self.points[i]
            + h10 * self.tangents[i]
            + h01 * self.points[i + 1]
            + h11 * self.tangents[i + 1]
        )

    def derivative(self, t: float) -> np.ndarray:
        """dP/dt (chain rule over the segment-local parameter)."""
        if not 0.0 <= t <= 1.0:
            raise DomainParameterError(f"parameter {t} outside [0, 1]")
        n = self.n_keys
        s = t * (n - 1)
        i = min(int(s), n - 2)
        u = s - i
        d00 = 6 * u * (u - 1)
        d10 = (1 - u) * (1 - 3 * u)
        d01 = -d00
        d11 = u * (3 * u - 2)
        seg = (
            d00 * self.points[i]
            + d10 * self.tangents[i]
            + d01 * self.points[i + 1]
            + d11 * self.tangents[i + 1]
        )
        return seg * (n - 1)

    def eval_many(self, ts) -> np.ndarray:
        return np.array([self.eval(float(t)) for t in ts])


def hermite_eval(curve: HermiteCurve, t: float) -> np.ndarray:
    return curve.eval(t)


@dataclass(frozen=True)
class CubicBSpline:
    """Interpolating B-spline wrapper: knots, control coefficients, degree."""

    knots: np.ndarray
    coefficients: np.ndarray
    degree: int
    parameters: np.ndarray

    def eval(self, t) -> np.ndarray:
        spl = BSpline(self.knots, self.coefficients, self.degree, extrapolate=False)
        lo, hi = self.parameters[0], self.parameters[-1]
        return spl(np.clip(t, lo, hi))

    def eval_many(self, ts) -> np.ndarray:
        return self.eval(np.asarray(ts, dtype=float))


def averaged_knots(params, degree: int) -> np.ndarray:
    """Clamped knot vector with interior knots averaged over runs of params."""
    u = np.asarray(params, dtype=float)
    n = len(u)
    interior = [u[j + 1 : j + degree + 1].mean() for j in range(n - degree - 1)]
    return np.concatenate([[u[0]] * (degree + 1), interior, [u[-1]] * (degree + 1)])


def bspline_interpolate(constraints, params) -> CubicBSpline:
    """Spline through every constraint at its parameter.

    Degree is min(3, n-1) so short inputs degrade to a single low-order
    polynomial; interior knots use the parameter-averaging rule, which keeps
    the collocation system nonsingular for strictly increasing parameters.
    """
    values = np.asarray(constraints, dtype=float)
    u = np.asarray(params, dtype=float)
    if len(values) < 2:
        raise ValueError("need at least two constraints")
    if u.shape != (len(values),):
        raise ValueError("one parameter per constraint")
    if np.any(np.diff(u) <= 0):
        raise SingularSystemError("parameters must be strictly increasing")
    k = min(3, len(values) - 1)
    spl = make_interp_spline(u, values, k=k, t=averaged_knots(u, k))
    return CubicBSpline(spl.t, np.asarray(spl.c, dtype=float), k, u)


def chord_length_params(points) -> np.ndarray:
    """Chord-length parameterization normalized to [0, 1]."""
    pts = np.asarray(points, dtype=float)
    d = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = d.sum()
    if total <= 0:
        raise SingularSystemError("coincident points have no chord parameterization")
    u = np.concatenate([[0.0], np.cumsum(d)]) / total
    return u
