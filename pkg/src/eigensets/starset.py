"""Compact star sets in the plane, stored as radial functions on an angular grid.

A :class:`StarSet2` with radii ``rho_k`` on the grid ``th_k = 2 pi k / n``
represents the union of the triangles ``(0, p_k, p_{k+1})`` with
``p_k = rho_k (cos th_k, sin th_k)``. A zero radius means the set meets
that ray only at the origin, so a segment ``[0, x]`` is a single nonzero
radius with zero neighbours. The represented set is closed under scaling
by ``[0, 1]`` by construction.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .matops import as_square, expm

__all__ = [
    "StarSet2",
    "ReachOptions",
    "make_ball",
    "make_segment",
    "make_sector",
    "make_polygon",
    "make_polar",
    "linear_image",
    "union",
    "scale",
    "hausdorff",
    "directed_distance",
    "is_subset_tol",
    "reach_step",
    "write_radial_csv",
    "read_radial_csv",
]

MIN_GRID = 16


@dataclass(frozen=True, eq=False)
class StarSet2:
    radii: np.ndarray

    def __post_init__(self):
        r = np.array(self.radii, dtype=float)
        if r.ndim != 1 or r.size < MIN_GRID:
            raise ValueError(f"radii must be a 1-d array with at least {MIN_GRID} entries")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValueError("radii must be finite and nonnegative")
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)

    @property
    def n(self):
        return self.radii.size

    @property
    def angles(self):
        return np.arange(self.n) * (2 * np.pi / self.n)

    def vertices(self):
        """Boundary polyline vertices ``p_k`` as an ``(n, 2)`` array."""
        th = self.angles
        return np.column_stack([self.radii * np.cos(th), self.radii * np.sin(th)])

    def max_radius(self):
        return float(self.radii.max())

    def radial(self, phi):
        """Radial function at arbitrary angles."""
        return kernels.radial_at(self.radii, phi)

    def contains(self, points, tol=0.0):
        """Boolean mask: which of the ``(k, 2)`` points lie in the set (up to ``tol``)."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.hypot(P[:, 0], P[:, 1])
        return r <= self.radial(np.arctan2(P[:, 1], P[:, 0])) + tol

    def boundary_samples(self, spacing=None):
        """Points along the boundary polyline, at most ``spacing`` apart.

        The default spacing is half the grid chord at the largest radius.
        """
        V = self.vertices()
        W = np.roll(V, -1, axis=0)
        if spacing is None:
            spacing = 0.5 * (2 * np.pi / self.n) * max(self.max_radius(), 1e-12)
        lengths = np.hypot(*(W - V).T)
        counts = np.maximum(np.ceil(lengths / spacing).astype(np.int64), 1)
        idx = np.repeat(np.arange(self.n), counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        s = (offs / counts[idx])[:, None]
        return V[idx] * (1 - s) + W[idx] * s

    def same_grid(self, other):
        if self.n != other.n:
            raise ValueError(f"grid mismatch: {self.n} vs {other.n}")


@dataclass(frozen=True)
class ReachOptions:
    """Step length, sampled constant control values and boundary refinement."""

    step: float
    control_samples: tuple
    refine: int = 2

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        samples = tuple(np.atleast_1d(np.asarray(u, dtype=float)) for u in self.control_samples)
        if not samples:
            raise ValueError("control_samples must be nonempty")
        if self.refine < 1:
            raise ValueError("refine must be >= 1")
        object.__setattr__(self, "control_samples", samples)

    @classmethod
    def for_system(cls, sys, step=0.05, n_samples=32, refine=2):
        """Evenly spaced control samples over the box (vertices included).

        For ``m`` controls the grid has ``ceil(n_samples ** (1/m))`` values
        per coordinate.
        """
        per_axis = max(int(np.ceil(n_samples ** (1.0 / sys.m) - 1e-9)), 2)
        return cls(step, tuple(sys.control_grid(per_axis)), refine)

    def with_step(self, step):
        return ReachOptions(step, self.control_samples, self.refine)

    def check_in(self, sys):
        for u in self.control_samples:
            sys.check_control_value(u)


def make_ball(n, radius=1.0):
    if n < MIN_GRID:
        raise ValueError(f"n must be >= {MIN_GRID}")
    return StarSet2(np.full(n, float(radius)))


def make_segment(x, n):
    """The segment ``[0, x]``, placed on the grid ray nearest to ``arg x``."""
    x = np.asarray(x, dtype=float)
    if n < MIN_GRID:
        raise ValueError(f"n must be >= {MIN_GRID}")
    norm = float(np.hypot(*x))
    if norm == 0:
        raise ValueError("segment endpoint must be nonzero")
    r = np.zeros(n)
    k = int(np.rint(np.mod(np.arctan2(x[1], x[0]), 2 * np.pi) / (2 * np.pi / n))) % n
    r[k] = norm
    return StarSet2(r)


def make_sector(theta1, theta2, radius, n):
    """Filled sector from ``theta1`` counter-clockwise to ``theta2``."""
    if n < MIN_GRID:
        raise ValueError(f"n must be >= {MIN_GRID}")
    th = np.arange(n) * (2 * np.pi / n)
    width = np.mod(theta2 - theta1, 2 * np.pi)
    inside = np.mod(th - theta1, 2 * np.pi) <= width + 1e-12
    return StarSet2(np.where(inside, float(radius), 0.0))


def make_polygon(vertices, n):
    """Radial function of a polygon that is star-shaped about the origin.

    The origin may sit on the boundary (for instance at a vertex); rays
    that leave the polygon immediately get radius 0.
    """
    V = np.asarray(vertices, dtype=float)
    W = np.roll(V, -1, axis=0)
    th = np.arange(n) * (2 * np.pi / n)
    ex, ey = np.cos(th)[:, None], np.sin(th)[:, None]
    ax, ay, bx, by = V[:, 0], V[:, 1], W[:, 0], W[:, 1]
    den = ex * (by - ay) - ey * (bx - ax)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ax * by - ay * bx) / den
        # parameter of the hit along the edge a -> b
        s = np.where(
            np.abs(bx - ax) >= np.abs(by - ay),
            (t * ex - ax) / (bx - ax),
            (t * ey - ay) / (by - ay),
        )
    hit = np.isfinite(t) & (t >= 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
    r = np.where(hit, t, 0.0).max(axis=1)
    # rays along an edge through the origin
    norms = np.hypot(ax, ay)
    ang = np.mod(np.arctan2(ay, ax), 2 * np.pi)
    for a, nv in zip(ang, norms):
        if nv > 0:
            k = int(np.rint(a / (2 * np.pi / n))) % n
            if abs(k * 2 * np.pi / n - a) < 1e-9:
                r[k] = max(r[k], nv)
    return StarSet2(r + 0.0)  # no negative zeros


def make_polar(func, n):
    """Star set whose radius at ``th_k`` is ``func(th_k)`` for ``th_k`` in ``[0, 2 pi)``."""
    th = np.arange(n) * (2 * np.pi / n)
    return StarSet2(np.asarray(func(th), dtype=float))


def linear_image(S, T, refine=2):
    """Image ``T S`` of a star set under an invertible linear map."""
    T = as_square(T, "T")
    if T.shape != (2, 2):
        raise ValueError("linear_image expects a 2x2 matrix")
    if abs(np.linalg.det(T)) <= 1e-12:
        raise ValueError("linear_image needs an invertible map")
    V = S.vertices()
    if refine > 1:
        W = np.roll(V, -1, axis=0)
        s = (np.arange(refine) / refine)[None, :, None]
        V = (V[:, None, :] * (1 - s) + W[:, None, :] * s).reshape(-1, 2)
    Q = V @ T.T
    return StarSet2(kernels.rasterize(Q[:, 0], Q[:, 1], S.n))


def union(S1, S2):
    S1.same_grid(S2)
    return StarSet2(np.maximum(S1.radii, S2.radii))


def scale(S, alpha):
    alpha = float(alpha)
    if not (np.isfinite(alpha) and alpha >= 0):
        raise ValueError("scale factor must be finite and nonnegative")
    return StarSet2(S.radii * alpha)


def directed_distance(S1, S2):
    """``sup_{p in S1} dist(p, S2)``.

    Distance to a set that is star-shaped about the origin is nondecreasing
    along outward rays, so the supremum is attained on the outer boundary
    of ``S1``, which is sampled finely.
    """
    S1.same_grid(S2)
    spacing = 0.5 * (2 * np.pi / S1.n) * max(S1.max_radius(), S2.max_radius(), 1e-12)
    P = S1.boundary_samples(spacing)
    return float(kernels.directed_hausdorff(P[:, 0], P[:, 1], S2.radii))


def hausdorff(S1, S2):
    """Symmetric Hausdorff distance between the represented sets."""
    return max(directed_distance(S1, S2), directed_distance(S2, S1))


def is_subset_tol(S1, S2, tol):
    return directed_distance(S1, S2) <= tol


def reach_step(sys, S, opts):
    """Union over sampled constant controls of the time-``step`` images of ``S``.

    ``sys`` may be a :class:`~eigensets.bilinear.BilinearSystem` or a
    shifted system. The result is an inner approximation of the exact-time
    reachable set.
    """
    if sys.dim != 2:
        raise ValueError("star set geometry is implemented for d = 2 only")
    radii = np.zeros(S.n)
    for u in opts.control_samples:
        img = linear_image(S, expm(sys.drift(u), opts.step), opts.refine)
        np.maximum(radii, img.radii, out=radii)
    return StarSet2(radii)


def write_radial_csv(S, path):
    """Write ``theta,rho`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "rho"])
        for th, r in zip(S.angles, S.radii):
            w.writerow([repr(float(th)), repr(float(r))])


def read_radial_csv(path):
    """Read a ``theta,rho`` file written by :func:`write_radial_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["theta", "rho"]:
        raise ValueError(f"{path}: expected a 'theta,rho' header")
    data = rows[1:]
    if not data:
        raise ValueError(f"{path}: no data rows")
    theta = np.array([float(a) for a, _ in data])
    rho = np.array([float(b) for _, b in data])
    expected = np.arange(theta.size) * (2 * np.pi / theta.size)
    if not np.allclose(theta, expected, atol=1e-9):
        raise ValueError(f"{path}: angles are not a uniform grid starting at 0")
    return StarSet2(rho)
