import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from eigensets import kernels
from eigensets.bilinear import BilinearSystem
from eigensets.matops import expm
from eigensets.starset import (
    ReachOptions,
    StarSet2,
    directed_distance,
    hausdorff,
    is_subset_tol,
    linear_image,
    make_ball,
    make_polar,
    make_polygon,
    make_sector,
    make_segment,
    reach_step,
    read_radial_csv,
    scale,
    union,
    write_radial_csv,
)

EX1 = BilinearSystem([[-1, 1], [1, 1]], [[[1, 1], [1, -1]]], [[-1, 1]])
N = 1024
TRI_D = [[0, 0], [1, 1], [0, 1]]
TRI_D2 = [[0, 0], [0.5, 0.5], [0, 1]]


def random_star(rng, n=256, smooth=True):
    k = np.arange(1, 6)
    th = np.arange(n) * 2 * np.pi / n
    r = 1 + sum(0.3 / kk * np.cos(kk * th + rng.uniform(0, 6.3)) for kk in k)
    if not smooth:
        r = r * (rng.uniform(size=n) > 0.3)
    return StarSet2(np.maximum(r, 0))


def grid_tol(S, n=None):
    return 2 * np.pi * 2 * S.max_radius() / (n or S.n)


def sample_triangle(tri, n, rng):
    a, b, c = map(np.asarray, tri)
    u, v = rng.uniform(size=(2, n))
    flip = u + v > 1
    u[flip], v[flip] = 1 - u[flip], 1 - v[flip]
    inner = a + u[:, None] * (b - a) + v[:, None] * (c - a)
    s = np.linspace(0, 1, n // 3, endpoint=False)[:, None]
    edges = np.vstack([a + s * (b - a), b + s * (c - b), c + s * (a - c)])
    return np.vstack([inner, edges])


def brute_hausdorff(P, Q):
    return max(cKDTree(Q).query(P)[0].max(), cKDTree(P).query(Q)[0].max())


class TestConstructors:
    def test_ball(self):
        assert np.array_equal(make_ball(512).radii, np.ones(512))

    def test_segment(self):
        S = make_segment([1, 1], 512)
        k = np.flatnonzero(S.radii)
        assert k.tolist() == [64]
        assert S.radii[64] == pytest.approx(math.sqrt(2))
        S2 = make_segment([0, 1], 512)
        assert np.flatnonzero(S2.radii).tolist() == [128] and S2.radii[128] == 1.0

    def test_sector(self):
        S = make_sector(0.0, np.pi / 2, 2.0, 64)
        assert np.all(S.radii[:17] == 2.0) and np.all(S.radii[17:] == 0.0)

    def test_polygon_triangle(self):
        S = make_polygon(TRI_D, N)
        th = S.angles
        inside = (th >= np.pi / 4 - 1e-12) & (th <= np.pi / 2 + 1e-12)
        expected = 1 / np.maximum(np.sin(th), 1e-300)
        np.testing.assert_allclose(S.radii[inside], expected[inside], rtol=1e-12)
        assert np.all(S.radii[~inside] == 0)

    def test_errors(self):
        with pytest.raises(ValueError):
            make_ball(8)
        with pytest.raises(ValueError):
            make_segment([0, 0], 64)
        with pytest.raises(ValueError):
            StarSet2(-np.ones(32))
        with pytest.raises(ValueError):
            StarSet2(np.full(32, np.nan))

    def test_star_closure(self):
        S = make_polygon(TRI_D, N)
        rng = np.random.default_rng(0)
        P = sample_triangle(TRI_D, 2000, rng)
        assert S.contains(P, tol=1e-9).all()
        alphas = rng.uniform(0, 1, (len(P), 1))
        assert S.contains(alphas * P, tol=1e-9).all()


class TestLinearImage:
    def test_identity_and_scaling(self):
        S = random_star(np.random.default_rng(1), N)
        np.testing.assert_allclose(linear_image(S, np.eye(2)).radii, S.radii, rtol=1e-12)
        np.testing.assert_allclose(linear_image(make_ball(N), 2 * np.eye(2)).radii, 2.0, rtol=1e-12)

    def test_ellipse_against_dense_oracle(self):
        T = np.diag([-2.0, 2.0]) @ np.array([[1.0, 0.0], [0.0, 0.5]])
        img = linear_image(make_ball(N), T)
        # dense oracle: map 10^6 boundary samples and interpolate radius against angle
        phi = np.linspace(0, 2 * np.pi, 10**6, endpoint=False)
        Q = np.column_stack([np.cos(phi), np.sin(phi)]) @ T.T
        ang = np.mod(np.arctan2(Q[:, 1], Q[:, 0]), 2 * np.pi)
        order = np.argsort(ang)
        ref = np.interp(img.angles, ang[order], np.hypot(Q[:, 0], Q[:, 1])[order], period=2 * np.pi)
        # exact ellipse radial function at grid angles
        th = img.angles
        Tinv = np.linalg.inv(T)
        exact = 1 / np.linalg.norm(np.column_stack([np.cos(th), np.sin(th)]) @ Tinv.T, axis=1)
        np.testing.assert_allclose(img.radii, exact, rtol=1e-3)
        np.testing.assert_allclose(ref, exact, rtol=1e-9)
        np.testing.assert_allclose(img.radii, ref, rtol=1e-3)
        assert np.all(img.radii <= exact * (1 + 4 * np.pi / (2 * N)) + 1e-12)

    def test_composition(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            S = random_star(rng, 512, smooth=bool(rng.integers(2)))
            T1, T2 = np.eye(2) + 0.4 * rng.standard_normal((2, 2, 2))
            a = linear_image(S, T1 @ T2)
            b = linear_image(linear_image(S, T2), T1)
            diam = 2 * max(a.max_radius(), b.max_radius())
            assert hausdorff(a, b) <= 2 * np.pi * diam / S.n

    def test_segment_stays_segment(self):
        S = linear_image(make_segment([1, 0], N), np.array([[1.0, 0.3], [0.5, 1.0]]))
        assert np.count_nonzero(S.radii) <= 2
        assert S.max_radius() == pytest.approx(math.hypot(1.0, 0.5), rel=1e-3)

    def test_singular(self):
        with pytest.raises(ValueError):
            linear_image(make_ball(64), [[1, 1], [1, 1]])


class TestSetOps:
    def test_union(self):
        S = random_star(np.random.default_rng(3))
        assert np.array_equal(union(S, S).radii, S.radii)
        assert np.array_equal(union(make_ball(64, 1), make_ball(64, 2)).radii, np.full(64, 2.0))
        A, B = make_polygon(TRI_D, N), make_polygon(TRI_D2, N)
        np.testing.assert_array_equal(union(A, B).radii, np.maximum(A.radii, B.radii))
        with pytest.raises(ValueError):
            union(make_ball(64), make_ball(128))

    def test_scale(self):
        S = random_star(np.random.default_rng(4))
        assert np.array_equal(scale(S, 1).radii, S.radii)
        np.testing.assert_allclose(scale(make_ball(64), math.exp(2 * 0.5)).radii, math.e, rtol=1e-15)
        np.testing.assert_allclose(scale(scale(S, 0.3), 2.5).radii, S.radii * 0.75, rtol=1e-15)
        with pytest.raises(ValueError):
            scale(S, -1)

    def test_hausdorff_trivial(self):
        S = random_star(np.random.default_rng(5))
        assert hausdorff(S, S) == 0.0
        assert hausdorff(make_ball(N, 1), make_ball(N, 2)) == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(ValueError):
            hausdorff(make_ball(64), make_ball(128))

    def test_hausdorff_triangle_brute_force(self):
        rng = np.random.default_rng(6)
        tri = np.array(TRI_D, dtype=float)
        P = sample_triangle(tri, 10**5, rng)
        Q = sample_triangle(1.1 * tri, 10**5, rng)
        ref = brute_hausdorff(P, Q)
        assert ref == pytest.approx(0.1 * math.sqrt(2), abs=2e-3)
        S = make_polygon(tri, N)
        got = hausdorff(S, scale(S, 1.1))
        chord = 2 * np.pi / N * 1.1 * math.sqrt(2)
        assert abs(got - ref) <= chord

    def test_hausdorff_random_brute_force(self):
        rng = np.random.default_rng(7)
        A, B = random_star(rng, 256), random_star(rng, 256, smooth=False)

        def dense(S):
            V = S.boundary_samples(1e-3)
            s = rng.uniform(0, 1, (len(V), 1))
            return np.vstack([V, s * V])

        ref = brute_hausdorff(dense(A), dense(B))
        chord = 2 * np.pi / 256 * max(A.max_radius(), B.max_radius())
        assert abs(hausdorff(A, B) - ref) <= chord

    def test_subset(self):
        S = random_star(np.random.default_rng(8))
        assert is_subset_tol(S, S, 0.0)
        assert is_subset_tol(make_ball(N, 1), make_ball(N, 2), 0.0)
        assert not is_subset_tol(make_ball(N, 2), make_ball(N, 1), 0.5)
        assert directed_distance(make_ball(N, 2), make_ball(N, 1)) == pytest.approx(1.0)


class TestReachStep:
    def opts(self, samples=((-1.0,), (1.0,)), step=0.05):
        return ReachOptions(step, samples)

    def test_tiny_step(self):
        S = random_star(np.random.default_rng(9), N)
        R = reach_step(EX1, S, ReachOptions.for_system(EX1, 1e-12, 8))
        assert hausdorff(R, S) <= 1e-9

    def test_fixed_ray_segment(self):
        seg = make_segment([1, 1], N)
        R = reach_step(EX1.shifted(2.0), seg, self.opts(((1.0,),)))
        np.testing.assert_allclose(R.radii, seg.radii, atol=1e-12)

    def test_single_sample_equals_linear_image(self):
        S = random_star(np.random.default_rng(10), N)
        u = (0.3,)
        R = reach_step(EX1, S, ReachOptions(0.1, (u,), refine=3))
        ref = linear_image(S, expm(EX1.drift(u), 0.1), refine=3)
        assert np.array_equal(R.radii, ref.radii)

    def test_semigroup(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            sys = BilinearSystem(rng.standard_normal((2, 2)), [rng.standard_normal((2, 2))], [[-1, 1]])
            S = random_star(rng, 512)
            one = ReachOptions(0.05, ((0.4,),))
            a = reach_step(sys, reach_step(sys, S, one), one)
            b = reach_step(sys, S, one.with_step(0.1))
            assert hausdorff(a, b) <= grid_tol(a)
            # with several samples two steps also contain switched controls
            many = ReachOptions.for_system(sys, 0.05, 5)
            a = reach_step(sys, reach_step(sys, S, many), many)
            b = reach_step(sys, S, many.with_step(0.1))
            assert directed_distance(b, a) <= grid_tol(a)

    def test_monotone(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            S2 = random_star(rng, 512)
            S1 = StarSet2(S2.radii * rng.uniform(0.3, 1.0, 512))
            o = ReachOptions.for_system(EX1, 0.05, 8)
            r1, r2 = reach_step(EX1, S1, o), reach_step(EX1, S2, o)
            assert np.all(r1.radii <= r2.radii + 1e-9 * r2.max_radius())

    def test_invariant_hull(self):
        # the ball is forward invariant for the shifted example (symmetric drifts <= 0)
        o = ReachOptions.for_system(EX1, 0.05, 32)
        B = make_ball(N)
        assert is_subset_tol(reach_step(EX1.shifted(2.0), B, o), B, 2 * np.pi / N)

    def test_options_validation(self):
        with pytest.raises(ValueError):
            ReachOptions(0.0, ((1.0,),))
        with pytest.raises(ValueError):
            ReachOptions(0.1, ())
        with pytest.raises(ValueError):
            ReachOptions(0.1, ((2.0,),)).check_in(EX1)
        assert len(ReachOptions.for_system(EX1, 0.05, 32).control_samples) == 32


class TestBackends:
    @pytest.fixture
    def backends(self):
        py = kernels.get_backend("python")
        try:
            cy = kernels.get_backend("cython")
        except ImportError:
            pytest.skip("compiled kernels not built")
        return py, cy

    def test_rasterize(self, backends):
        py, cy = backends
        rng = np.random.default_rng(13)
        for _ in range(20):
            n = int(rng.choice([16, 64, 1024]))
            S = random_star(rng, n, smooth=bool(rng.integers(2)))
            V = S.vertices() @ (np.eye(2) + 0.5 * rng.standard_normal((2, 2))).T
            a = py.rasterize(V[:, 0].copy(), V[:, 1].copy(), n)
            b = cy.rasterize(V[:, 0].copy(), V[:, 1].copy(), n)
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)

    def test_radial_and_distance(self, backends):
        py, cy = backends
        rng = np.random.default_rng(14)
        for _ in range(20):
            S = random_star(rng, 128, smooth=bool(rng.integers(2)))
            phi = rng.uniform(-10, 10, 500)
            np.testing.assert_allclose(py.radial_at(S.radii, phi), cy.radial_at(S.radii, phi), rtol=1e-12)
            P = rng.uniform(-2, 2, (500, 2))
            a = py.directed_hausdorff(P[:, 0].copy(), P[:, 1].copy(), S.radii)
            b = cy.directed_hausdorff(P[:, 0].copy(), P[:, 1].copy(), S.radii)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-15)

    def test_read_only_inputs(self, backends):
        _, cy = backends
        S = make_ball(64)
        assert not S.radii.flags.writeable
        cy.radial_at(S.radii, np.array([0.1]))


class TestCsv:
    def test_round_trip(self, tmp_path):
        S = random_star(np.random.default_rng(15), 256, smooth=False)
        p = tmp_path / "s.csv"
        write_radial_csv(S, p)
        assert p.read_text().splitlines()[0] == "theta,rho"
        assert np.array_equal(read_radial_csv(p).radii, S.radii)

    def test_errors(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("")
        with pytest.raises(ValueError):
            read_radial_csv(p)
        p.write_text("theta,rho\n")
        with pytest.raises(ValueError):
            read_radial_csv(p)
        p.write_text("theta,rho\n" + "".join(f"{0.1 * k ** 2},{1}\n" for k in range(20)))
        with pytest.raises(ValueError):
            read_radial_csv(p)


def test_make_polar():
    S = make_polar(lambda th: np.exp(-th / 2), 64)
    assert S.radii[0] == 1.0
    assert S.radii[-1] == pytest.approx(math.exp(-np.pi * 63 / 64))
