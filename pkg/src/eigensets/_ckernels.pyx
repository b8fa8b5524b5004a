# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled star-set geometry kernels (same contracts as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, ceil, floor, cos, sin, sqrt, fabs, fmod, rint, isfinite, M_PI

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI
cdef double SNAP_RATIO = 0.5
cdef double ANG_EPS = 1e-9


cdef inline double _wrap(double a) nogil:
    a = fmod(a, TWO_PI)
    if a < 0:
        a += TWO_PI
    return a


def rasterize(qx_in, qy_in, Py_ssize_t n):
    cdef const double[::1] qx = np.ascontiguousarray(qx_in, dtype=np.float64)
    cdef const double[::1] qy = np.ascontiguousarray(qy_in, dtype=np.float64)
    cdef Py_ssize_t N = qx.shape[0]
    out_arr = np.zeros(n)
    snap_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    cdef double[::1] snap = snap_arr
    cdef double h = TWO_PI / n
    cdef Py_ssize_t k, kk, jj
    cdef long j, j0, j1
    cdef double ax, ay, bx, by, na, nb, cr, dt, start, width, th, ex, ey, den, t, cap, ang
    with nogil:
        for k in range(N):
            kk = k + 1
            if kk == N:
                kk = 0
            ax = qx[k]
            ay = qy[k]
            bx = qx[kk]
            by = qy[kk]
            na = sqrt(ax * ax + ay * ay)
            nb = sqrt(bx * bx + by * by)
            if na > 0:
                ang = _wrap(atan2(ay, ax))
                jj = <Py_ssize_t>rint(ang / h) % n
                if na > snap[jj]:
                    snap[jj] = na
            if na == 0 or nb == 0:
                continue
            cr = ax * by - ay * bx
            if cr == 0:
                continue
            dt = ax * bx + ay * by
            if cr > 0:
                start = _wrap(atan2(ay, ax))
            else:
                start = _wrap(atan2(by, bx))
            width = fabs(atan2(cr, dt))
            j0 = <long>ceil(start / h - ANG_EPS)
            j1 = <long>floor((start + width) / h + ANG_EPS)
            cap = na if na > nb else nb
            for j in range(j0, j1 + 1):
                th = j * h
                ex = cos(th)
                ey = sin(th)
                den = ex * (by - ay) - ey * (bx - ax)
                if den != 0:
                    t = cr / den
                    if not isfinite(t):
                        t = cap
                    elif t < 0:
                        t = 0
                    elif t > cap:
                        t = cap
                else:
                    t = cap
                jj = <Py_ssize_t>(((j % n) + n) % n)
                if t > out[jj]:
                    out[jj] = t
        for jj in range(n):
            if out[jj] < SNAP_RATIO * snap[jj]:
                out[jj] = snap[jj]
    return out_arr


cdef inline double _radial_one(const double[::1] radii, Py_ssize_t n, double h, double phi) nogil:
    cdef double s, frac, ra, rb, tha, thb, ax, ay, bx, by, ex, ey, cr, den, t
    cdef Py_ssize_t j, k
    phi = _wrap(phi)
    s = phi / h
    j = <Py_ssize_t>floor(s)
    frac = s - j
    j = j % n
    k = (j + 1) % n
    ra = radii[j]
    rb = radii[k]
    t = 0
    if ra > 0 and rb > 0:
        tha = j * h
        thb = (j + 1) * h
        ax = ra * cos(tha)
        ay = ra * sin(tha)
        bx = rb * cos(thb)
        by = rb * sin(thb)
        ex = cos(phi)
        ey = sin(phi)
        cr = ax * by - ay * bx
        den = ex * (by - ay) - ey * (bx - ax)
        if den != 0:
            t = cr / den
        if not isfinite(t) or den == 0:
            t = ra if ra > rb else rb
    if frac < 1e-12 and ra > t:
        t = ra
    if frac > 1 - 1e-12 and rb > t:
        t = rb
    return t


def radial_at(radii_in, phi_in):
    cdef const double[::1] radii = np.ascontiguousarray(radii_in, dtype=np.float64)
    phi_arr = np.ascontiguousarray(np.atleast_1d(phi_in), dtype=np.float64)
    cdef const double[::1] phi = phi_arr
    cdef Py_ssize_t n = radii.shape[0]
    cdef Py_ssize_t P = phi.shape[0]
    out_arr = np.empty(P)
    cdef double[::1] out = out_arr
    cdef double h = TWO_PI / n
    cdef Py_ssize_t i
    with nogil:
        for i in range(P):
            out[i] = _radial_one(radii, n, h, phi[i])
    if np.ndim(phi_in) == 0:
        return float(out_arr[0])
    return out_arr.reshape(np.shape(phi_in))


def directed_hausdorff(px_in, py_in, radii_in):
    cdef const double[::1] px = np.ascontiguousarray(px_in, dtype=np.float64).ravel()
    cdef const double[::1] py = np.ascontiguousarray(py_in, dtype=np.float64).ravel()
    cdef const double[::1] radii = np.ascontiguousarray(radii_in, dtype=np.float64)
    cdef Py_ssize_t n = radii.shape[0]
    cdef Py_ssize_t P = px.shape[0]
    cdef double h = TWO_PI / n
    vx_arr = np.empty(n)
    vy_arr = np.empty(n)
    cdef double[::1] vx = vx_arr
    cdef double[::1] vy = vy_arr
    cdef Py_ssize_t i, e, step, k, k2, j
    cdef double x, y, r, phi, lim, dmin, best = 0.0
    cdef double ax, ay, bx, by, dx, dy, ll, s, cx, cy, d
    for k in range(n):
        vx[k] = radii[k] * cos(k * h)
        vy[k] = radii[k] * sin(k * h)
    with nogil:
        for i in range(P):
            x = px[i]
            y = py[i]
            r = sqrt(x * x + y * y)
            phi = atan2(y, x)
            lim = _radial_one(radii, n, h, phi)
            if r <= lim * (1 + 1e-12) + 1e-15:
                continue
            # scan edges outward from the point's own angle so small
            # distances are found early and the early break triggers
            j = <Py_ssize_t>floor(_wrap(phi) / h) % n
            dmin = 1e300
            for step in range(n):
                if step % 2 == 0:
                    k = (j + step // 2) % n
                else:
                    k = (j - step // 2 - 1 + n) % n
                k2 = k + 1
                if k2 == n:
                    k2 = 0
                ax = vx[k]
                ay = vy[k]
                bx = vx[k2]
                by = vy[k2]
                dx = bx - ax
                dy = by - ay
                ll = dx * dx + dy * dy
                if ll > 0:
                    s = ((x - ax) * dx + (y - ay) * dy) / ll
                    if s < 0:
                        s = 0
                    elif s > 1:
                        s = 1
                else:
                    s = 0
                cx = ax + s * dx - x
                cy = ay + s * dy - y
                d = cx * cx + cy * cy
                if d < dmin:
                    dmin = d
                    if dmin <= best * best:
                        break
            d = sqrt(dmin)
            if d > best:
                best = d
    return best
