import math

import numpy as np
import pytest
from scipy.sparse.csgraph import connected_components

from eigensets.bilinear import BilinearSystem, sphere_field
from eigensets.sphere_cs import (
    ControlSetArc,
    build_reach_graph,
    interior_ray,
    invariant_control_sets,
    write_arcs_csv,
)
from eigensets.starset import ReachOptions, make_sector, reach_step

EX1 = BilinearSystem([[-1, 1], [1, 1]], [[[1, 1], [1, -1]]], [[-1, 1]])
EX2 = BilinearSystem([[1, -2], [2, 1]], [[[-1, -2], [2, -1]]], [[-1, 1]])
SADDLE = BilinearSystem(np.diag([1.0, -1.0]), [np.zeros((2, 2))], [[-1, 1]])
ROTATION = BilinearSystem([[0, -1], [1, 0]], [np.zeros((2, 2))], [[-1, 1]])
BIN = 2 * math.pi / 720


def angular_field(sys, u, th):
    x = np.array([math.cos(th), math.sin(th)])
    f = sphere_field(sys.drift([u]), x)
    return -x[1] * f[0] + x[0] * f[1]


def circ_dist(a, b):
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


@pytest.fixture(scope="module")
def ex1_graph():
    return build_reach_graph(EX1, 720, 0.05)


class TestGraph:
    def test_every_bin_has_successor(self, ex1_graph):
        assert np.all(np.diff(ex1_graph.adjacency.indptr) > 0)

    def test_rotation_strongly_connected(self):
        g = build_reach_graph(ROTATION, 360, 0.05)
        n, _ = connected_components(g.adjacency, directed=True, connection="strong")
        assert n == 1
        arcs = invariant_control_sets(g)
        assert len(arcs) == 1 and arcs[0].full_circle

    def test_saddle_flows_to_axis(self):
        g = build_reach_graph(SADDLE, 360, 0.05)
        b = 2 * math.pi / 360
        for i in range(360):
            mid = (i + 0.5) * b
            # successors move toward the nearest of 0 and pi (or stay)
            target = 0.0 if math.cos(mid) > 0 else math.pi
            succ = g.successors(i)
            best = min(circ_dist((j + 0.5) * b, target) for j in succ)
            assert best <= circ_dist(mid, target) + 1e-12

    def test_saddle_classes(self):
        arcs = invariant_control_sets(build_reach_graph(SADDLE, 720, 0.05), include_equilibria=True)
        centres = sorted(math.degrees((a.start + a.end) / 2) % 360 for a in arcs)
        assert len(centres) == 2
        assert min(centres[0], 360 - centres[0]) <= 1.0
        assert abs(centres[1] - 180) <= 1.0
        for a in arcs:
            assert a.width <= 3 * BIN

    def test_validation(self):
        with pytest.raises(ValueError):
            build_reach_graph(EX1, 45)
        with pytest.raises(ValueError):
            build_reach_graph(EX1, 720, 0.0)
        sys3 = BilinearSystem(np.eye(3), [np.eye(3)], [[-1, 1]])
        with pytest.raises(NotImplementedError):
            build_reach_graph(sys3)


class TestControlSets:
    def test_example1_oracle(self, ex1_graph):
        # sign analysis: the angular field points into [pi/4, pi/2] at both ends for some u
        # and no admissible u pushes the end points outward
        for u in np.linspace(-1, 1, 41):
            assert angular_field(EX1, u, math.pi / 4) >= -1e-12
            assert angular_field(EX1, u, math.pi / 2) <= 1e-12
        arcs = invariant_control_sets(ex1_graph)
        assert len(arcs) == 2
        expected = [(math.pi / 4, math.pi / 2), (5 * math.pi / 4, 3 * math.pi / 2)]
        for arc, (a, b) in zip(arcs, expected):
            assert arc.invariant and not arc.equilibrium
            assert circ_dist(arc.start, a) <= 2 * BIN and circ_dist(arc.end, b) <= 2 * BIN

    def test_example2_full_circle(self):
        arcs = invariant_control_sets(build_reach_graph(EX2, 720, 0.05))
        assert len(arcs) == 1 and arcs[0].full_circle

    def test_closed_and_strongly_connected(self, ex1_graph):
        adj = ex1_graph.adjacency
        for arc in invariant_control_sets(ex1_graph):
            bins = np.array(arc.bins)
            inside = np.zeros(720, dtype=bool)
            inside[bins] = True
            sub = adj[bins][:, bins]
            assert all(inside[ex1_graph.successors(i)].all() for i in bins)
            n, _ = connected_components(sub, directed=True, connection="strong")
            assert n == 1

    def test_refinement_stability(self, ex1_graph):
        coarse = invariant_control_sets(ex1_graph)
        fine = invariant_control_sets(build_reach_graph(EX1, 1440, 0.05))
        assert len(coarse) == len(fine)
        for a, b in zip(coarse, fine):
            assert circ_dist(a.start, b.start) <= 2 * BIN
            assert circ_dist(a.end, b.end) <= 2 * BIN

    def test_cone_invariance(self, ex1_graph):
        # the cone over an invariant arc stays within the cone over the one-bin dilation
        opts = ReachOptions.for_system(EX1, 0.05, 32)
        n = 1024
        for arc in invariant_control_sets(ex1_graph):
            cone = make_sector(arc.start, arc.end, 1.0, n)
            img = reach_step(EX1, cone, opts)
            th = img.angles[img.radii > 0]
            assert all(arc.contains_angle(t, tol=BIN + 2 * math.pi / n) for t in th)

    def test_reachability_consistency(self, ex1_graph):
        # every invariant class reachable from a bin lies in that bin's forward closure
        from scipy.sparse.csgraph import breadth_first_order

        arcs = invariant_control_sets(ex1_graph)
        for start in range(0, 720, 37):
            seen = set(breadth_first_order(ex1_graph.adjacency, start, return_predecessors=False).tolist())
            hit = [a for a in arcs if seen & set(a.bins)]
            assert hit
            for a in hit:
                assert set(a.bins) <= seen


class TestInteriorRay:
    def test_midpoint(self):
        arc = ControlSetArc(((math.pi / 4, math.pi / 2),), True)
        np.testing.assert_allclose(interior_ray(arc), [math.cos(3 * math.pi / 8), math.sin(3 * math.pi / 8)])

    def test_full_circle(self):
        assert interior_ray(ControlSetArc(((0.0, 2 * math.pi),), True)).tolist() == [1.0, 0.0]

    def test_wraps_zero(self):
        arc = ControlSetArc(((2 * math.pi - 0.2, 2 * math.pi + 0.4),), True)
        np.testing.assert_allclose(interior_ray(arc), [math.cos(0.1), math.sin(0.1)], atol=1e-15)
        assert arc.contains_angle(0.05) and not arc.contains_angle(math.pi)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            interior_ray(ControlSetArc(((1.0, 1.0 + BIN),), True), bin_width=BIN)
        with pytest.raises(ValueError):
            interior_ray(ControlSetArc(((1.0, 1.0),), True))


def test_arcs_csv(tmp_path, ex1_graph):
    p = tmp_path / "arcs.csv"
    write_arcs_csv(invariant_control_sets(ex1_graph), p)
    lines = p.read_text().splitlines()
    assert lines[0] == "start,end,invariant" and len(lines) == 3
