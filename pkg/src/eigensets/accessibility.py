"""Lie algebra rank condition for the projected system on the sphere."""

from dataclasses import dataclass

import numpy as np

from .bilinear import sphere_field
from .matops import lie_bracket, span_rank

__all__ = [
    "AccessibilityReport",
    "lie_algebra_basis",
    "larc_at_point",
    "check_accessibility",
    "sphere_points",
]


@dataclass
class AccessibilityReport:
    checked_points: np.ndarray
    rank_ok: np.ndarray
    generated_basis_size: int
    saturated: bool

    @property
    def verdict(self):
        return bool(np.all(self.rank_ok))

    def summary(self):
        if self.verdict:
            return f"accessible (LARC holds at {len(self.rank_ok)} points, dim L = {self.generated_basis_size})"
        bad = int(np.sum(~self.rank_ok))
        return f"hypothesis not certified: LARC fails at {bad} of {len(self.rank_ok)} points"


class _Span:
    """Orthonormal basis (in flattened matrix space) grown by Gram-Schmidt."""

    def __init__(self, tol):
        self.tol = tol
        self.Q = []
        self.members = []

    def residual(self, M):
        v = M.ravel().astype(float)
        for q in self.Q:
            v = v - (q @ v) * q
        for q in self.Q:  # second pass for stability
            v = v - (q @ v) * q
        return v

    def add(self, M, scale):
        v = self.residual(M)
        nv = np.linalg.norm(v)
        if nv > self.tol * max(scale, 1e-300):
            self.Q.append(v / nv)
            self.members.append(M)
            return True
        return False


def lie_algebra_basis(sys, max_depth=8, tol=1e-9, return_saturated=False):
    """Basis of the matrix Lie algebra generated by the vertex drifts ``F(v)``.

    Brackets are added breadth first: level ``k`` holds brackets of a level
    ``k-1`` element with a generator-or-basis element. Growth stops at
    saturation (a level adds nothing) or at ``max_depth``.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    gens = [sys.drift(v) for v in sys.vertices()]
    scale = max(np.linalg.norm(G) for G in gens)
    span = _Span(tol)
    frontier = [G for G in gens if span.add(G, scale)]
    saturated = False
    for _ in range(1, max_depth):
        new = []
        for N in frontier:
            for M in list(span.members):
                C = lie_bracket(M, N)
                if span.add(C, max(scale, np.linalg.norm(M) * np.linalg.norm(N))):
                    new.append(C)
        if not new:
            saturated = True
            break
        if len(span.members) >= sys.dim**2:
            saturated = True
            break
        frontier = new
    basis = list(span.members)
    return (basis, saturated) if return_saturated else basis


def larc_at_point(basis, xhat, tol=1e-9):
    """Whether the projected basis fields span the tangent space at ``xhat``."""
    xhat = np.asarray(xhat, dtype=float)
    if not basis:
        return xhat.size == 1
    scale = max(np.linalg.norm(M, 2) for M in basis)
    # fields at roundoff level count as zero
    fields = [f if np.linalg.norm(f) > tol * scale else np.zeros_like(f)
              for f in (sphere_field(M, xhat) for M in basis)]
    return span_rank(fields, tol) == xhat.size - 1


def sphere_points(d, n, iters=50):
    """``n`` well-spread unit vectors: uniform angles for d = 2, a relaxed
    Fibonacci lattice with a few repulsion sweeps for d = 3."""
    if d == 2:
        th = np.arange(n) * (2 * np.pi / n)
        return np.column_stack([np.cos(th), np.sin(th)])
    if d != 3:
        raise NotImplementedError("sphere grids are implemented for d = 2 and d = 3")
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = np.pi * (1 + 5**0.5) * k
    P = np.column_stack([np.sqrt(1 - z * z) * np.cos(phi), np.sqrt(1 - z * z) * np.sin(phi), z])
    step = 0.1 / np.sqrt(n)
    for _ in range(iters):
        D = P[:, None, :] - P[None, :, :]
        r2 = np.sum(D * D, axis=-1) + np.eye(n)
        force = np.sum(D / r2[..., None] ** 1.5, axis=1)
        force -= np.sum(force * P, axis=1, keepdims=True) * P
        P = P + step * force / max(np.linalg.norm(force, axis=1).max(), 1e-300)
        P /= np.linalg.norm(P, axis=1, keepdims=True)
    return P


def check_accessibility(sys, grid_size=360, max_depth=8, tol=1e-9):
    if sys.dim > 3:
        raise NotImplementedError("accessibility sweep supports d <= 3")
    if grid_size < 8:
        raise ValueError("grid_size must be >= 8")
    basis, saturated = lie_algebra_basis(sys, max_depth, tol, return_saturated=True)
    pts = sphere_points(sys.dim, grid_size)
    ok = np.array([larc_at_point(basis, p, tol) for p in pts])
    return AccessibilityReport(pts, ok, len(basis), saturated)
