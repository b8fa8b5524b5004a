"""Bilinear control systems ``x' = (A + sum_i u_i B_i) x`` with box controls.

Flows are evaluated exactly for piecewise-constant controls as ordered
products of matrix exponentials. The shifted system replaces the drift
``F(u)`` by ``F(u) - r*Id``; its flow is ``exp(-t r)`` times the flow of
the base system.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .matops import ExpmRangeError, as_square, expm

__all__ = [
    "BilinearSystem",
    "ShiftedSystem",
    "PwcControl",
    "drift_matrix",
    "flow",
    "flow_matrix",
    "inverse_flow_matrix",
    "shifted_flow",
    "log_flow",
    "project",
    "sphere_field",
]

_BOX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BilinearSystem:
    """System datum: drift ``A``, control matrices ``Bs`` and box ``U``.

    ``U`` is given as an ``(m, 2)`` array of ``[lo, hi]`` rows.
    """

    A: np.ndarray
    Bs: tuple
    U: np.ndarray

    def __post_init__(self):
        A = as_square(self.A, "A")
        if len(self.Bs) < 1:
            raise ValueError("need at least one control matrix")
        Bs = tuple(as_square(B, f"B{i + 1}") for i, B in enumerate(self.Bs))
        for i, B in enumerate(Bs):
            if B.shape != A.shape:
                raise ValueError(f"B{i + 1} has shape {B.shape}, expected {A.shape}")
        U = np.asarray(self.U, dtype=float).reshape(-1, 2)
        if U.shape[0] != len(Bs):
            raise ValueError(f"U has {U.shape[0]} rows but there are {len(Bs)} control matrices")
        if not np.all(np.isfinite(U)):
            raise ValueError("U must be bounded")
        if np.any(U[:, 0] > U[:, 1]):
            raise ValueError("U has lo > hi in some coordinate")
        for arr in (A, *Bs, U):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Bs", Bs)
        object.__setattr__(self, "U", U)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def m(self):
        return len(self.Bs)

    @property
    def shift(self):
        return 0.0

    @property
    def base(self):
        return self

    def contains(self, u0, tol=_BOX_TOL):
        u0 = np.atleast_1d(np.asarray(u0, dtype=float))
        return u0.shape == (self.m,) and bool(
            np.all(u0 >= self.U[:, 0] - tol) and np.all(u0 <= self.U[:, 1] + tol)
        )

    def check_control_value(self, u0):
        u0 = np.atleast_1d(np.asarray(u0, dtype=float))
        if not self.contains(u0):
            raise ValueError(f"control value {u0} lies outside U = {self.U.tolist()}")
        return u0

    def drift(self, u0):
        """``F(u0) = A + sum_i u0_i B_i`` (validated against ``U``)."""
        u0 = self.check_control_value(u0)
        F = self.A.copy()
        for ui, B in zip(u0, self.Bs):
            F += ui * B
        return F

    def vertices(self):
        """Vertices of the control box, in lexicographic order lo < hi."""
        verts = {tuple(v) for v in product(*self.U)}
        return [np.array(v) for v in sorted(verts)]

    def control_grid(self, per_axis):
        """Uniform grid of ``per_axis`` values per box coordinate (vertices included)."""
        axes = [np.unique(np.linspace(lo, hi, max(per_axis, 1) if hi > lo else 1)) for lo, hi in self.U]
        return [np.array(v) for v in product(*axes)]

    def shifted(self, r):
        return ShiftedSystem(self, float(r))


@dataclass(frozen=True, eq=False)
class ShiftedSystem:
    """The system with drift ``F(u) - r*Id``."""

    base: BilinearSystem
    r: float

    @property
    def dim(self):
        return self.base.dim

    @property
    def m(self):
        return self.base.m

    @property
    def U(self):
        return self.base.U

    @property
    def shift(self):
        return self.r

    def contains(self, u0, tol=_BOX_TOL):
        return self.base.contains(u0, tol)

    def drift(self, u0):
        return self.base.drift(u0) - self.r * np.eye(self.dim)

    def vertices(self):
        return self.base.vertices()

    def control_grid(self, per_axis):
        return self.base.control_grid(per_axis)

    def shifted(self, r):
        return ShiftedSystem(self.base, self.r + float(r))


@dataclass(frozen=True, eq=False)
class PwcControl:
    """Piecewise-constant control: ``values[k]`` held for ``durations[k]``.

    A cyclic control repeats its segment list forever; otherwise it is
    defined on ``[0, total]`` only.
    """

    durations: np.ndarray
    values: np.ndarray
    cyclic: bool = False
    _ends: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.durations, dtype=float))
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("durations must be a non-empty 1-d sequence")
        if v.shape[0] != d.size:
            raise ValueError(f"{d.size} durations but {v.shape[0]} values")
        if not (np.all(np.isfinite(d)) and np.all(d > 0)):
            raise ValueError("durations must be positive and finite")
        if not np.all(np.isfinite(v)):
            raise ValueError("control values must be finite")
        d.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "durations", d)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_ends", np.cumsum(d))

    @classmethod
    def constant(cls, value, duration=1.0, cyclic=True):
        return cls([duration], [np.atleast_1d(value)], cyclic=cyclic)

    @property
    def total(self):
        return float(self._ends[-1])

    def check_in(self, sys):
        for v in self.values:
            sys.check_control_value(v)
        return self

    def segments(self, t, start=0.0):
        """Yield ``(value, dt)`` pieces covering ``[start, start + t]``."""
        if t < 0:
            raise ValueError("negative time")
        end = start + t
        total = self.total
        if not self.cyclic and end > total * (1 + 1e-12) + 1e-15:
            raise ValueError(f"time {end} exceeds control duration {total}")
        cycle, pos = (divmod(start, total) if self.cyclic else (0.0, start))
        k = int(np.searchsorted(self._ends, pos, side="right"))
        cur = start
        while end - cur > 0:
            if k >= len(self.durations):
                if not self.cyclic:
                    break
                k = 0
                cycle += 1
            seg_end = cycle * total + self._ends[k]
            dt = min(seg_end, end) - cur
            if dt > 0:
                yield self.values[k], dt
            cur = min(seg_end, end)
            k += 1

    def value_at(self, t):
        pos = t % self.total if self.cyclic else t
        k = min(int(np.searchsorted(self._ends, pos, side="right")), len(self.durations) - 1)
        return self.values[k]

    def integral(self, t):
        """``int_0^t u(s) ds`` (vector of length m)."""
        acc = np.zeros(self.values.shape[1])
        for value, dt in self.segments(t):
            acc += dt * value
        return acc

    def shifted_by(self, s):
        """The control ``tau -> u(tau + s)`` (cyclic controls stay cyclic)."""
        if self.cyclic:
            pieces = list(self.segments(self.total, start=s))
        else:
            pieces = list(self.segments(self.total - s, start=s))
        return PwcControl([dt for _, dt in pieces], [v for v, _ in pieces], cyclic=self.cyclic)

    def repeated(self, k):
        """Concatenate ``k`` copies of the segment list."""
        return PwcControl(np.tile(self.durations, k), np.tile(self.values, (k, 1)), cyclic=self.cyclic)


def drift_matrix(sys, u0):
    return sys.drift(u0)


def flow_matrix(sys, t, u):
    """Transition matrix of the system over ``[0, t]`` under control ``u``."""
    if t < 0:
        raise ValueError("flow_matrix expects t >= 0; use inverse_flow_matrix for backward time")
    Phi = np.eye(sys.dim)
    cache = {}
    for value, dt in u.segments(t):
        key = tuple(value)
        if key not in cache:
            cache[key] = sys.drift(value)
        with np.errstate(over="ignore", invalid="ignore"):
            Phi = expm(cache[key], dt) @ Phi
    _check_range(Phi)
    return Phi


def _check_range(y):
    if not np.all(np.isfinite(y)):
        raise ExpmRangeError("flow overflowed; use log_flow for long horizons")


def inverse_flow_matrix(sys, t, u):
    """Inverse of :func:`flow_matrix`, built from backward exponentials
    ``exp(-dt F)`` in reverse segment order (no matrix inversion)."""
    if t < 0:
        raise ValueError("inverse_flow_matrix expects t >= 0")
    Psi = np.eye(sys.dim)
    for value, dt in u.segments(t):
        Psi = Psi @ expm(sys.drift(value), -dt)
    return Psi


def flow(sys, t, x, u):
    """State at time ``t`` starting from ``x`` under control ``u``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.dim,) or not np.all(np.isfinite(x)):
        raise ValueError(f"x must be a finite vector of length {sys.dim}")
    with np.errstate(over="ignore", invalid="ignore"):
        for value, dt in u.segments(t):
            x = expm(sys.drift(value), dt) @ x
    _check_range(x)
    return x


def shifted_flow(sh, t, x, u):
    """Flow of the shifted system, computed directly from ``F(u) - r*Id``."""
    if not isinstance(sh, ShiftedSystem):
        raise TypeError("shifted_flow expects a ShiftedSystem")
    return flow(sh, t, x, u)


def log_flow(sys, t, x, u, max_chunk=None):
    """Direction and log-norm gain of the flow, safe for long horizons.

    Returns ``(y, g)`` with ``|y| = 1`` and ``flow(t, x, u) = exp(g) |x| y``.
    Segments are split into chunks short enough that each exponential stays
    in range, and the state is renormalised after every chunk.
    """
    x = np.asarray(x, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("zero initial state")
    y = x / nx
    g = 0.0
    cache = {}
    for value, dt in u.segments(t):
        key = tuple(value)
        if key not in cache:
            F = sys.drift(value)
            cache[key] = (F, max(np.linalg.norm(F, 2), 1e-300))
        F, nF = cache[key]
        chunk = max_chunk or 20.0 / nF
        n_chunks = max(int(np.ceil(dt / chunk)), 1)
        E = expm(F, dt / n_chunks)
        for _ in range(n_chunks):
            y = E @ y
            ny = np.linalg.norm(y)
            g += np.log(ny)
            y /= ny
    return y, g


def project(x):
    """Radial projection onto the unit sphere."""
    x = np.asarray(x, dtype=float)
    n = np.linalg.norm(x)
    if not n > 1e-300:
        raise ValueError("cannot project the zero vector")
    return x / n


def sphere_field(M, xhat):
    """Tangential part ``Mx - <x, Mx> x`` of the linear field at a unit vector."""
    xhat = np.asarray(xhat, dtype=float)
    if abs(np.linalg.norm(xhat) - 1.0) > 1e-9:
        raise ValueError("sphere_field expects a unit vector")
    Mx = np.asarray(M, dtype=float) @ xhat
    return Mx - (xhat @ Mx) * xhat
