import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orthosketch.errors import (
    DegenerateDepthError,
    DomainParameterError,
    EpipolarViolationError,
    SingularSystemError,
)
from orthosketch.geometry import (
    Camera,
    CameraPair,
    CubicBSpline,
    HermiteCurve,
    bspline_interpolate,
    chord_length_params,
    epipolar_ok,
    hermite_eval,
    project,
    triangulate,
)


# ---------------------------------------------------------------- oracles

def project_oracle(r, t, f, p, fixed_depth=None):
    """Scalar re-implementation of the view mapping, written independently."""
    num_x = r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0]
    num_y = r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1]
    if fixed_depth is None:
        den = r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2]
    else:
        den = fixed_depth
    return (f * num_x / den, f * num_y / den)


def hermite_two_point_oracle(p0, p1, u):
    """Closed-form cubic for a 2-point curve with one-sided chord tangents."""
    m = (p1[0] - p0[0], p1[1] - p0[1])
    h00 = (1 + 2 * u) * (1 - u) ** 2
    h10 = u * (1 - u) ** 2
    h01 = u * u * (3 - 2 * u)
    h11 = u * u * (u - 1)
    return (
        h00 * p0[0] + h10 * m[0] + h01 * p1[0] + h11 * m[0],
        h00 * p0[1] + h10 * m[1] + h01 * p1[1] + h11 * m[1],
    )


def bspline_basis_oracle(knots, degree, i, t):
    """Cox-de Boor recursion, plain Python."""
    if degree == 0:
        last = knots[i] < knots[i + 1] == knots[-1] and t == knots[-1]
        return 1.0 if (knots[i] <= t < knots[i + 1]) or last else 0.0
    left = 0.0
    if knots[i + degree] > knots[i]:
        left = (t - knots[i]) / (knots[i + degree] - knots[i]) * bspline_basis_oracle(
            knots, degree - 1, i, t
        )
    right = 0.0
    if knots[i + degree + 1] > knots[i + 1]:
        right = (
            (knots[i + degree + 1] - t)
            / (knots[i + degree + 1] - knots[i + 1])
            * bspline_basis_oracle(knots, degree - 1, i + 1, t)
        )
    return left + right


def bspline_interp_oracle(values, params, ts):
    """Dense collocation solve with averaged interior knots, degree 3."""
    values = np.asarray(values, dtype=float)
    u = np.asarray(params, dtype=float)
    n = len(values)
    k = 3
    interior = [u[j + 1 : j + k + 1].mean() for j in range(n - k - 1)]
    knots = np.concatenate([[u[0]] * (k + 1), interior, [u[-1]] * (k + 1)])
    coll = np.array(
        [[bspline_basis_oracle(knots, k, i, t) for i in range(n)] for t in u]
    )
    coef = np.linalg.solve(coll, values)
    out = []
    for t in np.asarray(ts, dtype=float):
        basis = np.array([bspline_basis_oracle(knots, k, i, t) for i in range(n)])
        out.append(basis @ coef)
    return np.array(out)


# ------------------------------------------------------------- projection

def test_project_optical_axis_maps_to_origin():
    cam = Camera(np.eye(3), [0.0, 0.0, 1.0], 1.0)
    assert np.allclose(project(cam, [0.0, 0.0, 0.0]), [0.0, 0.0])


def test_project_unit_depth_unit_focal():
    cam = Camera(np.eye(3), [0.0, 0.0, 1.0], 1.0)
    assert np.allclose(project(cam, [1.0, 2.0, 0.0]), [1.0, 2.0])


def test_project_degenerate_depth():
    cam = Camera(np.eye(3), [0.0, 0.0, 1.0], 1.0)
    with pytest.raises(DegenerateDepthError):
        project(cam, [5.0, 5.0, -1.0])


def _random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def test_project_matches_oracle_on_random_cameras():
    rng = np.random.default_rng(7)
    for _ in range(200):
        r = _random_rotation(rng)
        t = rng.uniform(-5, 5, size=3)
        f = rng.uniform(0.5, 3.0)
        p = rng.uniform(-10, 10, size=3)
        den = r[2] @ p + t[2]
        if abs(den) < 1e-3:
            continue
        cam = Camera(r, t, f)
        got = project(cam, p)
        want = project_oracle(r.tolist(), t.tolist(), f, p.tolist())
        assert got[0] == pytest.approx(want[0], abs=1e-12)
        assert got[1] == pytest.approx(want[1], abs=1e-12)


def test_camera_rejects_bad_rotation():
    with pytest.raises(ValueError):
        Camera(np.ones((3, 3)), np.zeros(3), 1.0)
    flipped = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        Camera(flipped, np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        Camera(np.eye(3), np.zeros(3), -2.0)


# --------------------------------------------------------------- epipolar

def test_epipolar_exact_equality():
    assert epipolar_ok((3.0, 5.0), (-1.0, 5.0), tol=0.0)


def test_epipolar_violation_beyond_tolerance():
    assert not epipolar_ok((3.0, 5.0), (-1.0, 5.1), tol=0.05)


def test_epipolar_rejects_negative_tolerance():
    with pytest.raises(ValueError):
        epipolar_ok((0, 0), (0, 0), tol=-1.0)


def test_epipolar_identity_under_canonical_pair():
    pair = CameraPair.canonical()
    rng = np.random.default_rng(11)
    pts = rng.uniform(-200, 200, size=(1000, 3))
    for p in pts:
        q1 = pair.project_front(p)
        q2 = pair.project_side(p)
        assert epipolar_ok(q1, q2, tol=1e-9)


# ------------------------------------------------------------ triangulate

def test_triangulate_paper_instance():
    pair = CameraPair.canonical()
    assert np.allclose(triangulate(pair, (2.0, 3.0), (5.0, 3.0)), [2.0, 3.0, -5.0])


def test_triangulate_origin():
    pair = CameraPair.canonical()
    assert np.allclose(triangulate(pair, (0.0, 0.0), (0.0, 0.0)), [0.0, 0.0, 0.0])


def test_triangulate_rejects_epipolar_violation():
    pair = CameraPair.canonical(snap_tol=0.5)
    with pytest.raises(EpipolarViolationError):
        triangulate(pair, (0.0, 0.0), (0.0, 1.0))


@settings(max_examples=200, deadline=None)
@given(
    st.tuples(
        st.floats(-500, 500),
        st.floats(-500, 500),
        st.floats(-500, 500),
    )
)
def test_triangulate_round_trip(p):
    pair = CameraPair.canonical()
    p = np.array(p)
    q1 = pair.project_front(p)
    q2 = pair.project_side(p)
    back = triangulate(pair, q1, q2)
    assert np.max(np.abs(back - p)) <= 1e-9


def test_triangulate_averages_y():
    pair = CameraPair.canonical(snap_tol=0.5)
    out = triangulate(pair, (1.0, 2.0), (3.0, 2.4))
    assert out[1] == pytest.approx(2.2)


# ---------------------------------------------------------------- hermite

def test_hermite_endpoint_interpolation():
    curve = HermiteCurve([[0.0, 0.0], [2.0, 1.0], [4.0, -1.0]])
    assert np.allclose(curve.eval(0.0), [0.0, 0.0], atol=1e-12)
    assert np.allclose(curve.eval(1.0), [4.0, -1.0], atol=1e-12)


def test_hermite_two_point_midpoint():
    curve = HermiteCurve([[0.0, 0.0], [1.0, 0.0]])
    want = hermite_two_point_oracle((0.0, 0.0), (1.0, 0.0), 0.5)
    got = curve.eval(0.5)
    assert got[0] == pytest.approx(want[0], abs=1e-12)
    assert got[1] == pytest.approx(want[1], abs=1e-12)
    assert got[0] == pytest.approx(0.5)
    assert got[1] == pytest.approx(0.0, abs=1e-12)


def test_hermite_knot_interpolation_many_points():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-10, 10, size=(7, 2))
    curve = HermiteCurve(pts)
    for i in range(7):
        t = i / 6
        assert np.max(np.abs(curve.eval(t) - pts[i])) <= 1e-12


def test_hermite_domain_error():
    curve = HermiteCurve([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(DomainParameterError):
        curve.eval(1.5)
    with pytest.raises(DomainParameterError):
        hermite_eval(curve, -0.1)


def test_hermite_c1_continuity():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-10, 10, size=(5, 2))
    curve = HermiteCurve(pts)
    for i in range(1, 4):
        t = i / 4
        h = 1e-7
        left = (curve.eval(t) - curve.eval(t - h)) / h
        right = (curve.eval(t + h) - curve.eval(t)) / h
        assert np.max(np.abs(left - right)) < 1e-4


def test_hermite_3d_points():
    curve = HermiteCurve([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    assert np.allclose(curve.eval(0.5), [0.5, 0.5, 0.5])


# ---------------------------------------------------------------- bspline

def test_bspline_linear_precision():
    pts = np.array([[0.0, 0.0, 0.0], [2.0, 2.0, 2.0]])
    spl = bspline_interpolate(pts, [0.0, 1.0])
    assert np.allclose(spl.eval(0.5), [1.0, 1.0, 1.0], atol=1e-9)
    for t in np.linspace(0, 1, 17):
        v = spl.eval(t)
        assert np.max(np.abs(v - t * 2.0)) <= 1e-9


def test_bspline_interpolates_circle_arc():
    theta = np.linspace(0.0, np.pi / 2, 4)
    pts = np.column_stack([np.cos(theta), np.sin(theta), np.zeros(4)])
    u = chord_length_params(pts)
    spl = bspline_interpolate(pts, u)
    for t, p in zip(u, pts):
        assert np.max(np.abs(spl.eval(t) - p)) <= 1e-9


def test_bspline_matches_dense_oracle():
    rng = np.random.default_rng(17)
    pts = rng.uniform(-5, 5, size=(5, 3))
    u = np.sort(rng.uniform(0, 1, size=5))
    u[0], u[-1] = 0.0, 1.0
    spl = bspline_interpolate(pts, u)
    ts = np.linspace(0, 1, 23)
    want = bspline_interp_oracle(pts, u, ts)
    got = spl.eval_many(ts)
    assert np.max(np.abs(got - want)) <= 1e-8


def test_bspline_duplicate_params_singular():
    pts = np.zeros((3, 3))
    with pytest.raises(SingularSystemError):
        bspline_interpolate(pts, [0.0, 0.5, 0.5])


def test_bspline_scalar_values():
    vals = [1.0, 3.0, 2.0, 5.0]
    u = [0.0, 0.3, 0.7, 1.0]
    spl = bspline_interpolate(vals, u)
    for t, v in zip(u, vals):
        assert np.asarray(spl.eval(t)).item() == pytest.approx(v, abs=1e-9)


def test_chord_length_params():
    u = chord_length_params([[0.0, 0.0], [3.0, 0.0], [3.0, 1.0]])
    assert np.allclose(u, [0.0, 0.75, 1.0])
