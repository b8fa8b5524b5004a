"""Invariant control sets of the projected system on the circle.

The circle is cut into ``n_bins`` equal arcs. Bin ``i`` has an edge to bin
``j`` when some sampled constant control maps part of arc ``i`` into arc
``j`` in time ``tau``. Invariant control sets correspond to closed
communicating classes of this graph.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .matops import expm

__all__ = [
    "ReachGraph",
    "ControlSetArc",
    "build_reach_graph",
    "invariant_control_sets",
    "interior_ray",
    "write_arcs_csv",
]

TWO_PI = 2.0 * math.pi
# image arcs are widened by this much so that rays fixed exactly on a
# bin boundary connect both neighbouring bins deterministically
_EDGE_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class ReachGraph:
    n_bins: int
    adjacency: csr_matrix

    def successors(self, i):
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    @property
    def bin_width(self):
        return TWO_PI / self.n_bins


@dataclass(frozen=True)
class ControlSetArc:
    """Union of angular intervals ``[start, end]`` (counter-clockwise, mod 2 pi).

    ``bins`` lists the graph bins of the class. ``equilibrium`` marks
    single-bin classes, which are candidate fixed rays rather than control
    sets with interior.
    """

    arcs: tuple
    invariant: bool
    bins: tuple = ()
    equilibrium: bool = False

    @property
    def start(self):
        return self.arcs[0][0]

    @property
    def end(self):
        return self.arcs[0][1]

    @property
    def width(self):
        return sum(np.mod(b - a, TWO_PI) or (TWO_PI if b != a else 0.0) for a, b in self.arcs)

    @property
    def full_circle(self):
        return len(self.arcs) == 1 and abs(self.arcs[0][1] - self.arcs[0][0] - TWO_PI) < 1e-12

    def contains_angle(self, theta, tol=0.0):
        for a, b in self.arcs:
            w = b - a
            if np.mod(theta - a + tol, TWO_PI) <= w + 2 * tol:
                return True
        return False


def build_reach_graph(sys, n_bins=720, tau=0.05, control_samples=None):
    """One-step reachability graph of the projected system (d = 2).

    Each bin's end points and midpoint are pushed through
    ``exp(tau F(u))`` for every sampled ``u``. The image of an arc under an
    orientation-preserving linear map is the arc between the images of its
    end points, and every bin meeting that arc receives an edge.
    """
    if sys.dim != 2:
        raise NotImplementedError("control sets on the sphere are implemented for d = 2 only")
    if n_bins < 90:
        raise ValueError("n_bins must be >= 90")
    if not tau > 0:
        raise ValueError("tau must be positive")
    if control_samples is None:
        control_samples = sys.control_grid(5)
    h = TWO_PI / n_bins
    edges_a = np.arange(n_bins) * h
    ends = np.stack([edges_a, edges_a + 0.5 * h, edges_a + h])
    rows, cols = [], []
    for u in control_samples:
        T = expm(sys.drift(u), tau)
        angs = []
        for th in ends:
            p = T @ np.vstack([np.cos(th), np.sin(th)])
            angs.append(np.arctan2(p[1], p[0]))
        a0, am, a1 = angs
        w1 = np.mod(am - a0, TWO_PI)
        w2 = np.mod(a1 - am, TWO_PI)
        lo = a0 - _EDGE_EPS
        width = w1 + w2 + 2 * _EDGE_EPS
        j0 = np.floor(np.mod(lo, TWO_PI) / h).astype(np.int64)
        j1 = np.floor((np.mod(lo, TWO_PI) + width) / h).astype(np.int64)
        cnt = j1 - j0 + 1
        src = np.repeat(np.arange(n_bins), cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        rows.append(src)
        cols.append(np.mod(j0[src] + offs, n_bins))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    adj = csr_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(n_bins, n_bins))
    adj.data[:] = 1
    adj.sort_indices()
    return ReachGraph(n_bins, adj)


def _bins_to_arcs(bins, n_bins):
    h = TWO_PI / n_bins
    b = np.sort(np.asarray(bins))
    if b.size == n_bins:
        return ((0.0, TWO_PI),)
    # split into runs of consecutive bins, merging a run that wraps past 0
    breaks = np.flatnonzero(np.diff(b) > 1)
    runs = np.split(b, breaks + 1)
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n_bins - 1:
        runs = [np.concatenate([runs[-1], runs[0]])] + runs[1:-1]
    arcs = []
    for run in runs:
        start = run[0] * h
        end = start + run.size * h
        if start >= TWO_PI:
            start -= TWO_PI
            end -= TWO_PI
        arcs.append((float(start), float(end)))
    return tuple(sorted(arcs, key=lambda ab: np.mod(ab[0], TWO_PI)))


def invariant_control_sets(g, include_equilibria=False):
    """Closed communicating classes of the graph, as angular arcs.

    Classes with at least two bins are returned, in angular order. A finite
    graph always has a closed class; when every closed class is a single
    bin those are returned (flagged ``equilibrium``) so the list is never
    empty. ``include_equilibria`` returns single-bin classes as well.
    """
    n_comp, labels = connected_components(g.adjacency, directed=True, connection="strong")
    A = g.adjacency.tocoo()
    leaving = np.zeros(n_comp, dtype=bool)
    cross = labels[A.row] != labels[A.col]
    leaving[labels[A.row[cross]]] = True
    closed = [c for c in range(n_comp) if not leaving[c]]
    out, singles = [], []
    for c in closed:
        bins = np.flatnonzero(labels == c)
        arc = ControlSetArc(_bins_to_arcs(bins, g.n_bins), True, tuple(int(b) for b in bins),
                            equilibrium=bins.size < 2)
        (singles if bins.size < 2 else out).append(arc)
    if include_equilibria or not out:
        out.extend(singles)
    return sorted(out, key=lambda a: np.mod(a.start, TWO_PI))


def interior_ray(arc, bin_width=None):
    """Unit vector at the angular midpoint of the arc's first interval.

    The full circle gives ``(1, 0)``.
    """
    if arc.full_circle:
        return np.array([1.0, 0.0])
    a, b = arc.arcs[0]
    width = b - a
    if bin_width is not None and width <= 2 * bin_width:
        raise ValueError("arc is too narrow to have an interior ray")
    if width <= 0:
        raise ValueError("degenerate arc")
    mid = a + 0.5 * width
    return np.array([math.cos(mid), math.sin(mid)])


def write_arcs_csv(arcs, path):
    with open(path, "w") as fh:
        fh.write("start,end,invariant\n")
        for arc in arcs:
            for a, b in arc.arcs:
                fh.write(f"{a!r},{b!r},{int(arc.invariant)}\n")
