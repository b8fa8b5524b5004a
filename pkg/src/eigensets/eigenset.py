"""Construction and verification of eigensets.

An eigenset of rate ``R`` is a nontrivial compact set ``D`` whose exact-time
reachable set is ``exp(tR) D`` for every ``t > 0``. Equivalently, ``D`` is
mapped onto itself by the reachable-set operator of the system shifted by
``R``. Two constructions are provided:

* from a periodic witness ``x`` (a direction that returns to its own ray at
  rate ``R``): the closure of the shifted forward orbit of ``[0, 1] x``;
* in general: grow the forward-invariant hull ``D0`` of the unit ball, then
  intersect its exact-time images, which form a descending family.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .starset import (
    make_ball,
    make_segment,
    hausdorff,
    directed_distance,
    reach_step,
    scale,
    union,
)

__all__ = [
    "EigensetResult",
    "VerificationReport",
    "EigensetError",
    "construct_from_witness",
    "construct_general",
    "verify_eigenset",
    "union_family",
    "boundary_contact",
]

NONTRIVIAL_FLOOR = 1e-6
BLOWUP_RADIUS = 1e6


class EigensetError(RuntimeError):
    """Construction aborted (collapse to the origin or unbounded growth)."""


@dataclass
class EigensetResult:
    D: object
    R: float
    construction: str
    iterations: int
    converged: bool
    final_increment: float
    D0: object = None
    history: list = field(default_factory=list, repr=False)


@dataclass
class VerificationReport:
    """Per-time Hausdorff distances between ``exp(-tR) O_t(D)`` and ``D``.

    ``outer`` holds the one-sided excess of the reachable set over ``D``
    (the hard check: reach sets are inner approximations, so any excess is
    a genuine violation up to grid error); ``inner`` holds the shortfall.
    """

    times: list
    distances: list
    outer: list
    inner: list
    tolerance: float
    note: str = (
        "reach sets use sampled constant controls per step (inner approximation); "
        "distances are measured after rescaling by exp(-tR)"
    )

    @property
    def max_distance(self):
        return max(self.distances) if self.distances else 0.0

    @property
    def passed(self):
        return self.max_distance <= self.tolerance


def _check_nontrivial(S):
    if S.max_radius() < NONTRIVIAL_FLOOR:
        raise EigensetError(f"construction collapsed to the origin (max radius {S.max_radius():.3g})")


def _grow(sh, W, opts, tol, max_iter, history):
    inc = math.inf
    for it in range(1, max_iter + 1):
        W_next = union(W, reach_step(sh, W, opts))
        if W_next.max_radius() > BLOWUP_RADIUS:
            raise EigensetError(
                f"forward orbit exceeded radius {BLOWUP_RADIUS:g}; the rate is probably underestimated"
            )
        inc = hausdorff(W_next, W)
        history.append(inc)
        W = W_next
        if _settled(inc, W, tol):
            return W, it, True, inc
    return W, max_iter, False, inc


def _settled(inc, S, tol):
    # increments are relative to the current size (absolute at unit scale), so a
    # set shrinking geometrically to the origin never counts as converged
    _check_nontrivial(S)
    return inc < tol * S.max_radius()


def construct_from_witness(sys, R, witness, opts, tol=1e-3, max_iter=500, n=None, rate_tol=1e-3):
    """Closure of the forward orbit of ``[0, 1] x`` under the system shifted by ``R``.

    ``witness`` is a :class:`~eigensets.spectrum.RayReturnCertificate` (or
    just a nonzero vector, taken as a rate-``R`` witness). The seed segment
    is grown by ``W <- W u reach_step(W)`` until the Hausdorff increment
    drops below ``tol`` times the current maximal radius.
    """
    x = getattr(witness, "x", witness)
    rate = getattr(witness, "rate", R)
    if abs(rate - R) > rate_tol:
        raise ValueError(f"witness rate {rate} is not within {rate_tol} of R = {R}")
    n = n or 1024
    sh = sys.shifted(R)
    seed = make_segment(np.asarray(x, dtype=float), n)
    history = []
    D, it, conv, inc = _grow(sh, seed, opts, tol, max_iter, history)
    _check_nontrivial(D)
    return EigensetResult(D, float(R), "witness", it, conv, inc, history=history)


def construct_general(sys, R, opts, tol=1e-3, max_iter=500, n=1024):
    """Eigenset as the limit of the exact-time images of the invariant hull ``D0``.

    Phase 1 grows ``D0`` from the unit ball; phase 2 iterates
    ``E <- reach_step(E)`` from ``E = D0``. Since ``D0`` is forward
    invariant these iterates are non-increasing and approximate the
    descending intersection.
    """
    sh = sys.shifted(R)
    history = []
    D0, it0, conv0, inc0 = _grow(sh, make_ball(n), opts, tol, max_iter, history)
    if not conv0:
        return EigensetResult(D0, float(R), "general", it0, False, inc0, D0=D0, history=history)
    E = D0
    inc = math.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        E_next = reach_step(sh, E, opts)
        inc = hausdorff(E_next, E)
        history.append(inc)
        E = E_next
        if _settled(inc, E, tol):
            converged = True
            break
    _check_nontrivial(E)
    return EigensetResult(E, float(R), "general", it0 + it, converged, inc, D0=D0, history=history)


def boundary_contact(D, D0, tol=1e-3):
    """Whether ``D`` reaches the boundary of ``D0`` along some ray, i.e.
    ``rho_D >= (1 - tol) rho_D0`` at a grid angle where ``rho_D0 > 0``."""
    r0 = D0.radii
    return bool(np.any((r0 > 0) & (D.radii >= (1.0 - tol) * r0)))


def verify_eigenset(sys, D, R, times, opts, tol=0.03):
    """Check ``O_t(D) = exp(tR) D`` at the given times.

    Each ``t`` must be a multiple of ``opts.step``. The reachable set is
    built by iterating :func:`~eigensets.starset.reach_step` of the
    original system ``k = t / step`` times and compared with ``D`` after
    rescaling by ``exp(-tR)``.
    """
    times = sorted(float(t) for t in times)
    ks = []
    for t in times:
        if t <= 0:
            raise ValueError("verification times must be positive")
        k = t / opts.step
        if abs(k - round(k)) > 1e-9 * max(k, 1):
            raise ValueError(f"time {t} is not a multiple of the step {opts.step}")
        ks.append(int(round(k)))
    dists, outer, inner = [], [], []
    E = D
    done = 0
    for t, k in zip(times, ks):
        while done < k:
            E = reach_step(sys, E, opts)
            done += 1
        normalised = scale(E, math.exp(-t * R))
        o = directed_distance(normalised, D)
        i = directed_distance(D, normalised)
        outer.append(o)
        inner.append(i)
        dists.append(max(o, i))
    return VerificationReport(times, dists, outer, inner, tol)


def union_family(members):
    """Union of scaled sets ``alpha_i D_i`` (all on a common grid)."""
    members = list(members)
    if not members:
        raise ValueError("union_family needs at least one member")
    out = None
    for alpha, S in members:
        if alpha < 0:
            raise ValueError("scale factors must be nonnegative")
        scaled = scale(S, alpha)
        out = scaled if out is None else union(out, scaled)
    return out
