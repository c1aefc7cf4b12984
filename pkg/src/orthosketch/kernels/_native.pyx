# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Must match kernels._fallback bit for bit: all
selection rules are plain float arithmetic with the same operation order."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "native"

cdef double T_LO = 0.41421356237309503
cdef double T_HI = 2.414213562373095


def nonmax_suppress(mag, gx, gy):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] m = np.ascontiguousarray(mag, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dx = np.ascontiguousarray(gx, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dy = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t h = m.shape[0]
    cdef Py_ssize_t w = m.shape[1]
    out = np.zeros((h, w), dtype=bool)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] keep = out
    if h < 3 or w < 3:
        return out
    cdef Py_ssize_t i, j
    cdef double c, adx, ady, sgn, n1, n2
    for i in range(1, h - 1):
        for j in range(1, w - 1):
            c = m[i, j]
            if c <= 0.0:
                continue
            adx = dx[i, j]
            if adx < 0.0:
                adx = -adx
            ady = dy[i, j]
            if ady < 0.0:
                ady = -ady
            sgn = dx[i, j] * dy[i, j]
            if ady <= T_LO * adx:
                n1 = m[i, j + 1]
                n2 = m[i, j - 1]
            elif ady >= T_HI * adx:
                n1 = m[i + 1, j]
                n2 = m[i - 1, j]
            elif sgn > 0.0:
                n1 = m[i + 1, j + 1]
                n2 = m[i - 1, j - 1]
            else:
                n1 = m[i + 1, j - 1]
                n2 = m[i - 1, j + 1]
            if c >= n1 and c >= n2:
                keep[i, j] = 1
    return out


def hysteresis(strong, weak):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] s = np.ascontiguousarray(strong, dtype=bool)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] wk = np.ascontiguousarray(weak, dtype=bool)
    cdef Py_ssize_t h = s.shape[0]
    cdef Py_ssize_t w = s.shape[1]
    out = np.zeros((h, w), dtype=bool)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] res = out
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack_i = np.empty(h * w, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack_j = np.empty(h * w, dtype=np.int64)
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t i, j, ci, cj, ni, nj, di, dj
    for i in range(h):
        for j in range(w):
            if s[i, j]:
                res[i, j] = 1
                stack_i[top] = i
                stack_j[top] = j
                top += 1
    while top > 0:
        top -= 1
        ci = stack_i[top]
        cj = stack_j[top]
        for di in range(-1, 2):
            for dj in range(-1, 2):
                if di == 0 and dj == 0:
                    continue
                ni = ci + di
                nj = cj + dj
                if ni < 0 or nj < 0 or ni >= h or nj >= w:
                    continue
                if res[ni, nj]:
                    continue
                if wk[ni, nj] or s[ni, nj]:
                    res[ni, nj] = 1
                    stack_i[top] = ni
                    stack_j[top] = nj
                    top += 1
    return out


def nearest_index(xs, ys, double qx, double qy):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    if n == 0:
        return -1, np.inf
    cdef Py_ssize_t i, best = 0
    cdef double dx, dy, d2
    dx = x[0] - qx
    dy = y[0] - qy
    cdef double best_d2 = dx * dx + dy * dy
    for i in range(1, n):
        dx = x[i] - qx
        dy = y[i] - qy
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            best_d2 = d2
            best = i
    return best, best_d2


def corridor_select(
    xs,
    ys,
    double ox,
    double oy,
    double ux,
    double uy,
    double tan_cone,
    double hw_min,
    double hw_max,
):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, best = -1
    cdef double dx, dy, along, perp, hw
    cdef double best_along = 0.0
    cdef double best_perp = 0.0
    for i in range(n):
        dx = x[i] - ox
        dy = y[i] - oy
        along = ux * dx + uy * dy
        if along <= 1e-9:
            continue
        perp = ux * dy - uy * dx
        if perp < 0.0:
            perp = -perp
        hw = along * tan_cone
        if hw < hw_min:
            hw = hw_min
        if hw > hw_max:
            hw = hw_max
        if perp > hw:
            continue
        if best < 0 or along > best_along or (along == best_along and perp < best_perp):
            best = i
            best_along = along
            best_perp = perp
    if best < 0:
        return -1, 0.0, 0.0
    return best, best_along, best_perp
