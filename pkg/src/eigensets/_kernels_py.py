"""Pure numpy implementations of the star-set geometry kernels.

Reference backend; ``_ckernels.pyx`` implements the same functions.

A star set on an ``n``-point angular grid is the union of triangles
``(0, p_k, p_{k+1})`` where ``p_k = radii[k] * (cos th_k, sin th_k)`` and
``th_k = 2 pi k / n``.
"""

import numpy as np

TWO_PI = 2.0 * np.pi
# A mapped vertex is snapped onto its nearest grid ray when the exact
# radial value there is below this fraction of the vertex norm.
SNAP_RATIO = 0.5
_ANG_EPS = 1e-9
_CHUNK = 256


def rasterize(qx, qy, n):
    """Radial function, on the ``n``-grid, of the star polygon with vertices ``q``.

    ``q`` is the closed boundary polyline of a star set (vertices in angular
    order, zeros allowed). Grid rays crossing a triangle ``(0, q_k, q_{k+1})``
    get the exact distance to its outer edge. Thin features that slip
    between grid rays are kept by snapping their vertices to the nearest ray.
    """
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    h = TWO_PI / n
    bx = np.roll(qx, -1)
    by = np.roll(qy, -1)
    na = np.hypot(qx, qy)
    nb = np.roll(na, -1)
    cr = qx * by - qy * bx
    dt = qx * bx + qy * by
    valid = (na > 0) & (nb > 0) & (cr != 0)
    ang_a = np.mod(np.arctan2(qy, qx), TWO_PI)
    ang_b = np.roll(ang_a, -1)
    start = np.where(cr > 0, ang_a, ang_b)
    width = np.abs(np.arctan2(cr, dt))
    j0 = np.ceil(start / h - _ANG_EPS).astype(np.int64)
    j1 = np.floor((start + width) / h + _ANG_EPS).astype(np.int64)
    cnt = np.where(valid, np.maximum(j1 - j0 + 1, 0), 0)

    out = np.zeros(n)
    total = int(cnt.sum())
    if total:
        edge = np.repeat(np.arange(qx.size), cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        j = j0[edge] + offs
        theta = j * h
        ex, ey = np.cos(theta), np.sin(theta)
        ax_, ay_ = qx[edge], qy[edge]
        den = ex * (by[edge] - ay_) - ey * (bx[edge] - ax_)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = cr[edge] / den
        cap = np.maximum(na[edge], nb[edge])
        t = np.where(np.isfinite(t), np.clip(t, 0.0, cap), cap)
        np.maximum.at(out, np.mod(j, n), t)

    nz = na > 0
    if np.any(nz):
        snap = np.zeros(n)
        jn = np.mod(np.rint(ang_a[nz] / h).astype(np.int64), n)
        np.maximum.at(snap, jn, na[nz])
        out = np.where(out < SNAP_RATIO * snap, snap, out)
    return out


def radial_at(radii, phi):
    """Evaluate the star polygon's radial function at arbitrary angles."""
    radii = np.asarray(radii, dtype=float)
    n = radii.size
    h = TWO_PI / n
    phi = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    s = phi / h
    j = np.floor(s).astype(np.int64)
    frac = s - j
    j %= n
    k = (j + 1) % n
    ra, rb = radii[j], radii[k]
    tha, thb = j * h, (j + 1) * h
    ax, ay = ra * np.cos(tha), ra * np.sin(tha)
    bx, by = rb * np.cos(thb), rb * np.sin(thb)
    ex, ey = np.cos(phi), np.sin(phi)
    cr = ax * by - ay * bx
    den = ex * (by - ay) - ey * (bx - ax)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where((ra > 0) & (rb > 0), cr / den, 0.0)
    t = np.where(np.isfinite(t), t, np.maximum(ra, rb))
    on_ray = frac < 1e-12
    t = np.where(on_ray, np.maximum(t, ra), t)
    t = np.where(frac > 1 - 1e-12, np.maximum(t, rb), t)
    return t


def _seg_dist(px, py, ax, ay, bx, by):
    # px, py: (P, 1); a, b: (E,)
    dx, dy = bx - ax, by - ay
    ll = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        s = ((px - ax) * dx + (py - ay) * dy) / ll
    s = np.where(ll > 0, np.clip(s, 0.0, 1.0), 0.0)
    cx = ax + s * dx - px
    cy = ay + s * dy - py
    return np.sqrt(cx * cx + cy * cy)


def directed_hausdorff(px, py, radii):
    """``max_p dist(p, S)`` over points ``p`` and the star polygon ``S``."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n = radii.size
    r = np.hypot(px, py)
    lim = radial_at(radii, np.arctan2(py, px))
    outside = r > lim * (1 + 1e-12) + 1e-15
    if not np.any(outside):
        return 0.0
    th = np.arange(n) * (TWO_PI / n)
    ax, ay = radii * np.cos(th), radii * np.sin(th)
    bx, by = np.roll(ax, -1), np.roll(ay, -1)
    qx, qy = px[outside], py[outside]
    best = 0.0
    for s in range(0, qx.size, _CHUNK):
        d = _seg_dist(qx[s:s + _CHUNK, None], qy[s:s + _CHUNK, None], ax, ay, bx, by)
        best = max(best, float(d.min(axis=1).max()))
    return best
