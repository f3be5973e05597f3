"""affine_mars.core.linalg 단위 테스트."""
import numpy as np
import pytest
from sympy import ImmutableMatrix, Rational

from affine_mars.core.linalg import (
    SubspaceBasis,
    as_ints,
    column_hermite_form,
    dot,
    dual_vectors,
    kernel_basis,
    primitive,
    project_onto,
    rank,
    supplementary_basis,
    to_matrix,
    to_vector,
)


class TestHelpers:
    def test_primitive_divides_gcd(self):
        assert primitive([2, 4, -6]) == (1, 2, -3)

    def test_primitive_clears_denominators(self):
        assert primitive(["1/2", "1/3"]) == (3, 2)

    def test_primitive_zero_vector(self):
        assert primitive([0, 0]) == (0, 0)

    def test_as_ints_rejects_fraction(self):
        with pytest.raises(ValueError):
            as_ints(to_vector(["1/2", 1]))

    def test_dot_is_exact(self):
        assert dot(to_vector(["1/3", 1]), to_vector([3, "1/2"])) == Rational(3, 2)


class TestRank:
    def test_dependent_rows(self):
        assert rank(to_matrix([[1, 2], [2, 4]])) == 1

    def test_identity(self):
        assert rank(to_matrix([[1, 0], [0, 1]])) == 2

    def test_rational_entries(self):
        assert rank(to_matrix([["1/2", 1], [1, 2]])) == 1

    def test_wide_matrix(self):
        assert rank(to_matrix([[1, 0, 0], [0, 0, 1]])) == 2


class TestKernelAndSupplementary:
    def test_projection_kernel(self):
        K = kernel_basis(to_matrix([[1, 0]]))
        assert K.dim == 1
        assert K.to_lists() == [[0, 1]]

    def test_full_rank_has_empty_kernel(self):
        assert kernel_basis(to_matrix([[1, 0], [0, 1]])).dim == 0

    def test_supplementary_is_orthogonal_complement(self):
        K = SubspaceBasis.of(2, [[0, 1]])
        S = supplementary_basis(K)
        assert S.same_span(SubspaceBasis.of(2, [[1, 0]]))
        for v in S.vectors:
            assert all(dot(v, k) == 0 for k in K.vectors)

    def test_supplementary_of_zero_space_is_identity(self):
        S = supplementary_basis(SubspaceBasis(3))
        assert S.dim == 3
        assert S.same_span(SubspaceBasis.of(3, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]))

    def test_matmul_kernel_is_j_axis(self):
        K = kernel_basis(to_matrix([[1, 0, 0], [0, 0, 1]]))
        assert K.to_lists() == [[0, 1, 0]]
        assert supplementary_basis(K).dim == 2

    def test_dependent_basis_rejected(self):
        with pytest.raises(ValueError):
            SubspaceBasis.of(2, [[1, 1], [2, 2]])

    def test_same_span_ignores_scaling(self):
        assert SubspaceBasis.of(2, [[1, -1]]).same_span(SubspaceBasis.of(2, [[-3, 3]]))


class TestProjection:
    def test_axis_projection(self):
        S = SubspaceBasis.of(2, [[1, 0]])
        assert project_onto(S, to_vector([2, 2])) == to_vector([2, 0])

    def test_diagonal_projection_is_rational(self):
        S = SubspaceBasis.of(2, [[1, 1]])
        assert project_onto(S, to_vector([1, 0])) == to_vector(["1/2", "1/2"])

    def test_projection_onto_zero_space(self):
        assert project_onto(SubspaceBasis(2), to_vector([5, 7])) == to_vector([0, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project_onto(SubspaceBasis.of(2, [[1, 0]]), to_vector([1, 2, 3]))


class TestDualVectors:
    def test_non_orthogonal_normals(self):
        v1, v2 = dual_vectors([to_vector([1, 0]), to_vector([1, 1])], [2, 2])
        assert v1 == to_vector([2, -2])
        assert v2 == to_vector([0, 2])

    def test_crossing_property(self):
        normals = [to_vector([1, 1]), to_vector([-1, 1])]
        scaled = dual_vectors(normals, [4, 4])
        for j, v in enumerate(scaled):
            for k, n in enumerate(normals):
                assert dot(v, n) == (4 if j == k else 0)

    def test_empty(self):
        assert dual_vectors([], []) == []


class TestColumnHermiteForm:
    def _check(self, M):
        H, U = column_hermite_form(M)
        r = H.cols
        assert abs(U.det()) == 1
        product = M * U
        assert product[:, :r] == H
        assert all(v == 0 for v in product[:, r:])
        return H, U

    def test_single_row_gcd(self):
        H, _ = self._check(to_matrix([[4, 6]]))
        assert H == ImmutableMatrix([[2]])

    def test_rank_deficient(self):
        H, U = self._check(to_matrix([[2, -2], [0, 0]]))
        assert H.cols == 1
        assert H[0, 0] == 2

    def test_identity(self):
        H, _ = self._check(to_matrix([[1, 0], [0, 1]]))
        assert H == ImmutableMatrix.eye(2)

    def test_projection_matrix(self):
        H, U = self._check(to_matrix([[1, 0, 0], [0, 0, 1]]))
        assert H.cols == 2
        assert to_matrix([[1, 0, 0], [0, 0, 1]]) * U[:, 2:] == ImmutableMatrix.zeros(2, 1)

    def test_pivots_positive(self):
        H, _ = self._check(to_matrix([[-3, 0], [1, -2]]))
        assert H[0, 0] > 0
        assert H[1, 1] > 0

    def test_rejects_fractions(self):
        with pytest.raises(ValueError):
            column_hermite_form(to_matrix([["1/2", 1]]))


class TestRandomizedProperties:
    """무작위 정수 행렬에서 커널, 랭크, 정사영의 기본 성질을 확인한다."""

    @pytest.fixture
    def matrices(self):
        rng = np.random.default_rng(20240617)
        out = []
        for _ in range(40):
            rows, cols = rng.integers(1, 4), rng.integers(1, 5)
            M = rng.integers(-3, 4, size=(rows, cols))
            if rng.random() < 0.3 and rows > 1:
                M[-1] = M[0] * rng.integers(-2, 3)
            out.append(to_matrix(M.tolist()))
        return out

    def test_kernel_vectors_are_annihilated(self, matrices):
        for M in matrices:
            for v in kernel_basis(M).vectors:
                assert M * v == ImmutableMatrix.zeros(M.rows, 1)

    def test_rank_nullity(self, matrices):
        """커널 차원 + 랭크 = 열 수"""
        for M in matrices:
            assert kernel_basis(M).dim + rank(M) == M.cols

    def test_projection_is_idempotent_with_orthogonal_residual(self, matrices):
        rng = np.random.default_rng(5)
        for M in matrices:
            S = supplementary_basis(kernel_basis(M))
            v = to_vector(rng.integers(-5, 6, size=M.cols).tolist())
            p = project_onto(S, v)
            assert project_onto(S, p) == p
            assert all(dot(v - p, s) == 0 for s in S.vectors)
