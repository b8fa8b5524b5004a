import numpy as np
import pytest

from eigensets.accessibility import check_accessibility, larc_at_point, lie_algebra_basis, sphere_points
from eigensets.bilinear import BilinearSystem
from eigensets.matops import lie_bracket

EX1 = BilinearSystem([[-1, 1], [1, 1]], [[[1, 1], [1, -1]]], [[-1, 1]])
EX2 = BilinearSystem([[1, -2], [2, 1]], [[[-1, -2], [2, -1]]], [[-1, 1]])
PURE_ID = BilinearSystem(np.eye(2), [np.zeros((2, 2))], [[-1, 1]])


def in_span(basis, M, tol=1e-9):
    B = np.array([b.ravel() for b in basis]).T
    coef, *_ = np.linalg.lstsq(B, M.ravel(), rcond=None)
    return np.linalg.norm(B @ coef - M.ravel()) <= tol * max(1.0, np.linalg.norm(M))


class TestBasis:
    def test_identity_only(self):
        basis = lie_algebra_basis(PURE_ID, 8)
        assert len(basis) == 1
        np.testing.assert_array_equal(basis[0], np.eye(2))

    def test_example1(self):
        basis, saturated = lie_algebra_basis(EX1, 8, return_saturated=True)
        assert len(basis) == 3 and saturated
        for M in (np.diag([-2.0, 2.0]), np.array([[0.0, 2.0], [2.0, 0.0]]), np.array([[0.0, -8.0], [8.0, 0.0]])):
            assert in_span(basis, M)
        assert not in_span(basis, np.eye(2))

    def test_example2_abelian(self):
        basis, saturated = lie_algebra_basis(EX2, 8, return_saturated=True)
        assert len(basis) == 2 and saturated
        for M in basis:
            for N in basis:
                np.testing.assert_allclose(lie_bracket(M, N), 0, atol=1e-12)

    @pytest.mark.parametrize("sys", [EX1, EX2, PURE_ID], ids=["ex1", "ex2", "id"])
    def test_closure_when_saturated(self, sys):
        basis, saturated = lie_algebra_basis(sys, 8, return_saturated=True)
        assert saturated
        for M in basis:
            for N in basis:
                assert in_span(basis, lie_bracket(M, N))

    def test_depth_validation(self):
        with pytest.raises(ValueError):
            lie_algebra_basis(EX1, 0)

    def test_unsaturated_at_depth_one(self):
        basis, saturated = lie_algebra_basis(EX1, 1, return_saturated=True)
        assert len(basis) == 2 and not saturated


class TestLarc:
    def test_examples(self):
        assert larc_at_point(lie_algebra_basis(EX1), [1.0, 0.0])
        assert not larc_at_point(lie_algebra_basis(PURE_ID), [0.6, 0.8])
        b2 = lie_algebra_basis(EX2)
        assert all(larc_at_point(b2, p) for p in sphere_points(2, 64))

    def test_check_examples(self):
        assert check_accessibility(EX1, 360).verdict
        assert check_accessibility(EX2, 360).verdict
        rep = check_accessibility(PURE_ID, 360)
        assert not rep.verdict and not rep.rank_ok.any()
        assert "not certified" in rep.summary()

    def test_verdict_monotone_in_grid(self):
        for n in (8, 16, 90, 360, 720):
            assert not check_accessibility(PURE_ID, n).verdict
        # a field vanishing only at the eigen-directions of diag(1, -1)
        diag = BilinearSystem(np.diag([1.0, -1.0]), [np.zeros((2, 2))], [[0, 1]])
        verdicts = [check_accessibility(diag, n).verdict for n in (8, 16, 32, 360)]
        assert not any(verdicts)

    def test_three_dimensional(self):
        E = [np.zeros((3, 3)) for _ in range(3)]
        E[0][1, 2], E[0][2, 1] = -1, 1
        E[1][0, 2], E[1][2, 0] = 1, -1
        so3 = BilinearSystem(E[0], [E[1]], [[-1, 1]])
        rep = check_accessibility(so3, 100)
        assert rep.verdict and rep.generated_basis_size == 3
        assert rep.checked_points.shape == (100, 3)
        np.testing.assert_allclose(np.linalg.norm(rep.checked_points, axis=1), 1.0)

    def test_errors(self):
        four = BilinearSystem(np.eye(4), [np.eye(4)], [[-1, 1]])
        with pytest.raises(NotImplementedError):
            check_accessibility(four)
        with pytest.raises(ValueError):
            check_accessibility(EX1, 4)
