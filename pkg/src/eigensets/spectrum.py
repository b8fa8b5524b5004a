"""Growth-rate brackets for bilinear systems.

The rate of a direction ``x`` is the supremum of ``alpha`` such that some
trajectory from ``x`` comes back to the ray of ``x`` at time ``t > 0`` with
gain ``exp(t alpha)``. Lower bounds come from explicit periodic witnesses
(:class:`RayReturnCertificate`); the upper bound is the largest
logarithmic norm over the vertex drifts.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .bilinear import PwcControl, log_flow, project
from .matops import expm, lognorm2

__all__ = [
    "RayReturnCertificate",
    "RateBracket",
    "xi_upper_bound",
    "evaluate_certificate",
    "ray_return_search",
    "xi_estimate",
    "compute_R",
    "fixed_rays",
]


@dataclass(frozen=True)
class RayReturnCertificate:
    """Periodic control returning ``x`` to its own ray after ``period``."""

    x: np.ndarray
    control: PwcControl
    period: float
    rate: float
    angular_residual: float
    rate_error: float = 0.0


@dataclass
class RateBracket:
    lower: float
    upper: float
    witness: RayReturnCertificate = None
    consistent: bool = True
    per_ray: list = field(default_factory=list)

    def __post_init__(self):
        if math.isfinite(self.lower) and self.lower > self.upper + 1e-9:
            raise ValueError(f"inconsistent bracket [{self.lower}, {self.upper}]")
        if self.lower > self.upper:
            # the upper bound is a proof; an excess below 1e-9 is rounding
            object.__setattr__(self, "lower", self.upper)

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value, tol=0.0):
        return self.lower - tol <= value <= self.upper + tol


def _angle(a, b):
    # robust angle between unit vectors
    return 2.0 * math.atan2(np.linalg.norm(a - b), np.linalg.norm(a + b))


def xi_upper_bound(sys):
    """Largest logarithmic norm of ``F(v)`` over the vertices ``v`` of ``U``.

    ``lognorm2`` is convex, so the vertex maximum bounds it on the whole box
    and therefore bounds ``d/dt ln|x(t)|`` for every admissible control.
    """
    return max(lognorm2(sys.drift(v)) for v in sys.vertices())


def _lipschitz(sys):
    return max(np.linalg.norm(sys.drift(v), 2) for v in sys.vertices())


def evaluate_certificate(sys, x, control, period=None):
    """Measure return residual and rate of ``control`` from ``x`` over one period."""
    period = control.total if period is None else float(period)
    xhat = project(x)
    y, g = log_flow(sys, period, xhat, control)
    res = _angle(y, xhat)
    return RayReturnCertificate(
        x=xhat,
        control=control,
        period=period,
        rate=g / period,
        angular_residual=res,
        rate_error=_lipschitz(sys) * res,
    )


def fixed_rays(sys, values=None):
    """Real eigen-directions of the drifts ``F(v)`` (both signs), with the eigenvalue.

    Returns a list of ``(unit_vector, eigenvalue, value)``.
    """
    out = []
    for v in values if values is not None else sys.vertices():
        w, V = np.linalg.eig(sys.drift(v))
        for lam, vec in zip(w, V.T):
            if abs(lam.imag) > 1e-12 or np.max(np.abs(vec.imag)) > 1e-12:
                continue
            vec = project(vec.real)
            out.append((vec, float(lam.real), v))
            out.append((-vec, float(lam.real), v))
    return out


class _Counter:
    def __init__(self, budget):
        self.budget = budget
        self.used = 0

    def spend(self, k=1):
        self.used += k

    @property
    def exhausted(self):
        return self.budget is not None and self.used >= self.budget


def _constant_candidates(sys, xhat, angular_tol, counter):
    certs = []
    for v in sys.vertices():
        F = sys.drift(v)
        counter.spend()
        c = evaluate_certificate(sys, xhat, PwcControl.constant(v, 1.0))
        if c.angular_residual <= angular_tol:
            certs.append(c)
            continue
        # rotation-type return after one full projected turn
        w = np.linalg.eigvals(F)
        omega = np.max(np.abs(w.imag))
        if sys.dim == 2 and omega > 1e-12:
            counter.spend()
            c = evaluate_certificate(sys, xhat, PwcControl.constant(v, 2 * np.pi / omega))
            if c.angular_residual <= angular_tol:
                certs.append(c)
    return certs


def _signed_angle(xhat, y):
    return math.atan2(xhat[0] * y[1] - xhat[1] * y[0], float(xhat @ y))


def _last_segment_returns(sys, xhat, y0, F, s_max, angular_tol, counter, ds=0.01):
    """Durations ``s`` in ``(0, s_max]`` with ``exp(sF) y0`` on the ray of ``xhat``."""
    n_grid = max(int(math.ceil(s_max / ds)), 2)
    h = s_max / n_grid
    E = expm(F, h)
    ys = np.empty((n_grid + 1, sys.dim))
    y = y0.copy()
    ys[0] = y
    for i in range(1, n_grid + 1):
        y = E @ y
        y /= np.linalg.norm(y)
        ys[i] = y
    counter.spend(n_grid)
    s_grid = np.arange(n_grid + 1) * h

    def direction(s):
        z = expm(F, s) @ y0
        return z / np.linalg.norm(z)

    roots = []
    if sys.dim == 2:
        sig = np.array([_signed_angle(xhat, q) for q in ys])
        for i in range(n_grid):
            a, b = sig[i], sig[i + 1]
            if abs(a) > np.pi / 2 or abs(b) > np.pi / 2:
                continue
            if a == 0.0 and i > 0:
                # a stationary direction gives runs of exact zeros; keep run ends only
                if sig[i - 1] != 0.0 or b != 0.0:
                    roots.append(s_grid[i])
            elif a * b < 0:
                s = brentq(lambda s: _signed_angle(xhat, direction(s)), s_grid[i], s_grid[i + 1],
                           xtol=1e-14, rtol=1e-14, maxiter=200)
                counter.spend(20)
                roots.append(s)
        if sig[-1] == 0.0:
            roots.append(s_grid[-1])
    else:
        ang = np.array([_angle(xhat, q) for q in ys])
        for i in range(1, n_grid):
            if ang[i] <= ang[i - 1] and ang[i] <= ang[i + 1] and ang[i] < 0.1:
                r = minimize_scalar(lambda s: _angle(xhat, direction(s)),
                                    bounds=(s_grid[i - 1], s_grid[i + 1]), method="bounded",
                                    options={"xatol": 1e-13})
                counter.spend(r.nfev)
                if r.fun <= angular_tol:
                    roots.append(float(r.x))
    return [s for s in roots if s > 1e-9]


def _best_return(sys, xhat, values, durations, horizon, angular_tol, counter, min_duration):
    """Fix all but the last duration and solve for returns; return the best certificate."""
    head = PwcControl(durations, values[:-1]) if len(durations) else None
    t_head = float(np.sum(durations)) if len(durations) else 0.0
    if t_head >= horizon:
        return None
    if head is not None:
        y0, g0 = log_flow(sys, t_head, xhat, head)
        counter.spend(len(durations))
    else:
        y0, g0 = xhat.copy(), 0.0
    F = sys.drift(values[-1])
    best = None
    for s in _last_segment_returns(sys, xhat, y0, F, horizon - t_head, angular_tol, counter):
        if s < min_duration:
            continue
        ctrl = PwcControl(np.append(durations, s), values, cyclic=True)
        cert = evaluate_certificate(sys, xhat, ctrl)
        counter.spend()
        if cert.angular_residual <= angular_tol and (best is None or cert.rate > best.rate):
            best = cert
    return best


def ray_return_search(sys, x, horizon=50.0, angular_tol=1e-6, n_segments=8, n_restarts=8,
                      seed=0, budget=200_000, min_duration=1e-3):
    """Search cyclic bang-bang controls that bring ``x`` back to its own ray.

    Constant vertex controls are tried first (fixed rays and full projected
    rotations). Then, for each restart, a random sequence of distinct
    consecutive vertex values is drawn; all durations except the last are
    tuned by multiplicative coordinate descent on the achieved rate, the last
    one is solved from the return condition. Returns certificates sorted by
    rate, highest first. Deterministic for a given ``seed``.
    """
    xhat = project(x)
    counter = _Counter(budget)
    rng = np.random.default_rng(seed)
    certs = _constant_candidates(sys, xhat, angular_tol, counter)
    verts = sys.vertices()
    upper = xi_upper_bound(sys)
    if len(verts) < 2 or any(c.rate >= upper - 1e-12 for c in certs):
        # nothing can beat the upper bound
        return sorted(certs, key=lambda c: -c.rate)

    factors = (4.0, 2.0, 1.25, 0.8, 0.5, 0.25)
    for restart in range(n_restarts):
        if counter.exhausted:
            break
        k = int(rng.integers(2, max(n_segments, 2) + 1)) if restart >= 2 else restart + 2
        k = min(k, max(n_segments, 2))
        idx = [int(rng.integers(len(verts)))]
        while len(idx) < k:
            j = int(rng.integers(len(verts) - 1))
            idx.append(j if j < idx[-1] else j + 1)
        values = np.array([verts[i] for i in idx])
        durations = rng.uniform(0.05, 1.0, size=k - 1) * horizon / (4 * k)
        durations = np.maximum(durations, min_duration)
        best = _best_return(sys, xhat, values, durations, horizon, angular_tol, counter, min_duration)
        improved = True
        while improved and not counter.exhausted:
            improved = False
            for i in range(k - 1):
                for f in factors:
                    trial = durations.copy()
                    trial[i] = min(max(trial[i] * f, min_duration), horizon)
                    if trial[i] == durations[i]:
                        continue
                    cand = _best_return(sys, xhat, values, trial, horizon, angular_tol, counter,
                                        min_duration)
                    if cand is not None and (best is None or cand.rate > best.rate + 1e-12):
                        best, durations, improved = cand, trial, True
                        break
                if counter.exhausted:
                    break
        if best is not None:
            certs.append(best)
    return sorted(certs, key=lambda c: -c.rate)


def xi_estimate(sys, x, budget=200_000, seed=0, **search):
    """Bracket for the growth rate of direction ``x``.

    ``lower`` is the best certificate rate (``-inf`` if none is found) and
    ``upper`` is :func:`xi_upper_bound`.
    """
    counter_budget = budget
    certs = ray_return_search(sys, project(x), seed=seed, budget=counter_budget, **search)
    upper = xi_upper_bound(sys)
    if certs:
        best = certs[0]
        return RateBracket(best.rate, upper, witness=best)
    return RateBracket(-math.inf, upper)


def _arc_bounds(arc):
    a, b = (arc.start, arc.end) if hasattr(arc, "start") else arc
    width = np.mod(b - a, 2 * np.pi)
    if width == 0 and b != a:
        width = 2 * np.pi
    return float(a), float(width)


def compute_R(sys, arc, budget=200_000, n_rays=5, consistency_tol=0.05, seed=0,
              dilation=None, **search):
    """Bracket for the system rate from rays of an invariant control arc (d = 2).

    Rates are estimated at ``n_rays`` interior rays of the arc and at the
    fixed rays of the vertex drifts that lie in the arc (dilated by
    ``dilation`` radians). Every certificate rate is a lower bound for the
    system rate, so ``lower`` is the best over all probed rays. The bracket is
    flagged inconsistent when interior rays disagree by more than
    ``consistency_tol``.
    """
    if sys.dim != 2:
        raise ValueError("compute_R works with arcs on the circle (d = 2)")
    a, width = _arc_bounds(arc)
    if width <= 0:
        raise ValueError("arc must have nonempty interior")
    if dilation is None:
        dilation = 2 * np.pi / 720
    interior = [a + width * (i + 1) / (n_rays + 1) for i in range(n_rays)]
    per_ray = []
    best = None
    share = budget // max(n_rays, 1)
    for i, th in enumerate(interior):
        br = xi_estimate(sys, [math.cos(th), math.sin(th)], budget=share, seed=seed + i, **search)
        per_ray.append((th, br.lower))
        if br.witness is not None and (best is None or br.witness.rate > best.rate):
            best = br.witness
    for vec, _, value in fixed_rays(sys):
        th = math.atan2(vec[1], vec[0])
        off = np.mod(th - (a - dilation), 2 * np.pi)
        if off <= width + 2 * dilation:
            c = evaluate_certificate(sys, vec, PwcControl.constant(value, 1.0))
            if c.angular_residual <= search.get("angular_tol", 1e-6) and (best is None or c.rate > best.rate):
                best = c
    upper = xi_upper_bound(sys)
    lows = [lo for _, lo in per_ray if math.isfinite(lo)]
    consistent = len(lows) == len(per_ray) and (max(lows) - min(lows) <= consistency_tol if lows else False)
    lower = -math.inf if best is None else best.rate
    return RateBracket(lower, upper, witness=best, consistent=consistent, per_ray=per_ray)
