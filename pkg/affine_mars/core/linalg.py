"""정확한 유리수 선형대수: 커널, 랭크, 보충 부분공간, 직교 사영, 열 HNF.

모든 값은 sympy의 Rational / ImmutableMatrix로 표현하며 부동소수점을 쓰지 않는다.
벡터는 열 행렬(n x 1)이다.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

import sympy
from sympy import ImmutableMatrix, Matrix

logger = logging.getLogger(__name__)

Rational = sympy.Rational
RatMatrix = ImmutableMatrix
RatVector = ImmutableMatrix


# ─── 생성 헬퍼 ────────────────────────────────────────────────────────────────

def to_matrix(rows: Sequence[Sequence[object]], cols: int | None = None) -> RatMatrix:
    """정수/유리수/'p/q' 문자열의 행 리스트를 RatMatrix로 변환한다."""
    data = [[Rational(v) for v in row] for row in rows]
    if not data:
        return ImmutableMatrix.zeros(0, cols or 0)
    return ImmutableMatrix(data)


def to_vector(entries: Iterable[object]) -> RatVector:
    """항목 리스트를 열 벡터로 변환한다."""
    values = [Rational(v) for v in entries]
    return ImmutableMatrix(len(values), 1, values)


def is_integral(v: RatMatrix) -> bool:
    return all(Rational(x).q == 1 for x in v)


def as_ints(v: RatMatrix) -> tuple[int, ...]:
    """정수 값 벡터를 int 튜플로 변환한다. 정수가 아니면 ValueError."""
    if not is_integral(v):
        raise ValueError(f"정수 벡터가 아님: {list(v)}")
    return tuple(int(x) for x in v)


def dot(u: RatVector, v: RatVector) -> Rational:
    return Rational(sum((a * b for a, b in zip(u, v)), Rational(0)))


def primitive(v: Iterable[object]) -> tuple[int, ...]:
    """v와 같은 방향의 서로소 정수 벡터. 영벡터는 그대로 반환한다."""
    values = [Rational(x) for x in v]
    denom = 1
    for x in values:
        denom = denom * x.q // gcd(denom, x.q)
    ints = [int(x * denom) for x in values]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


# ─── 부분공간 ─────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SubspaceBasis:
    """ambient_dim 차원 공간의 부분공간 기저. 벡터는 일차독립이다."""

    ambient_dim: int
    vectors: tuple[RatVector, ...] = ()

    def __post_init__(self) -> None:
        for v in self.vectors:
            if v.shape != (self.ambient_dim, 1):
                raise ValueError(f"기저 벡터 차원 불일치: {v.shape} != ({self.ambient_dim}, 1)")
        if self.vectors and rank(self.matrix) != len(self.vectors):
            raise ValueError("기저 벡터가 일차독립이 아님")

    @classmethod
    def of(cls, ambient_dim: int, vectors: Iterable[Iterable[object]]) -> "SubspaceBasis":
        return cls(ambient_dim, tuple(to_vector(v) for v in vectors))

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @property
    def matrix(self) -> RatMatrix:
        """기저 벡터를 열로 갖는 ambient_dim x dim 행렬."""
        if not self.vectors:
            return ImmutableMatrix.zeros(self.ambient_dim, 0)
        return ImmutableMatrix.hstack(*self.vectors)

    def contains(self, v: RatVector) -> bool:
        if not self.vectors:
            return all(x == 0 for x in v)
        return rank(ImmutableMatrix.hstack(self.matrix, v)) == self.dim

    def same_span(self, other: "SubspaceBasis") -> bool:
        """서로의 기저를 포함하는지 랭크로 확인한다."""
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        return all(self.contains(v) for v in other.vectors)

    def to_lists(self) -> list[list[int]]:
        return [list(primitive(v)) for v in self.vectors]


# ─── 기본 연산 ────────────────────────────────────────────────────────────────

def rank(A: RatMatrix) -> int:
    """정확한 랭크. 정수 행렬로 스케일한 뒤 분수 없는 소거로 계산한다."""
    rows = [list(primitive(A.row(i))) for i in range(A.rows)]
    return _bareiss_rank(rows, A.cols)


def _bareiss_rank(rows: list[list[int]], cols: int) -> int:
    m = [row[:] for row in rows]
    r = 0
    prev = 1
    for c in range(cols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, len(m)):
            m[i] = [(m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev for j in range(cols)]
        prev = m[r][c]
        r += 1
        if r == len(m):
            break
    return r


def kernel_basis(A: RatMatrix) -> SubspaceBasis:
    """{x : Ax = 0}의 기저. 각 벡터는 서로소 정수 벡터로 스케일된다."""
    vectors = tuple(to_vector(primitive(v)) for v in Matrix(A).nullspace())
    return SubspaceBasis(A.cols, vectors)


def supplementary_basis(K: SubspaceBasis) -> SubspaceBasis:
    """span(K)의 직교여공간 기저."""
    d = K.ambient_dim
    if not K.vectors:
        return SubspaceBasis(d, tuple(to_vector(row) for row in ImmutableMatrix.eye(d).tolist()))
    return kernel_basis(K.matrix.T)


def _gram_combination(B: RatMatrix, rhs: RatVector) -> RatVector:
    """B (BᵀB)⁻¹ rhs. B의 열은 일차독립이어야 한다."""
    G = B.T * B
    coeffs = G.LUsolve(rhs)
    return ImmutableMatrix(B * coeffs)


def project_onto(S: SubspaceBasis, v: RatVector) -> RatVector:
    """span(S)로의 정확한 직교 사영. Gram 행렬 풀이로 계산한다."""
    if v.shape != (S.ambient_dim, 1):
        raise ValueError(f"벡터 차원 불일치: {v.shape[0]} != {S.ambient_dim}")
    if not S.vectors:
        return ImmutableMatrix.zeros(S.ambient_dim, 1)
    B = S.matrix
    return _gram_combination(B, B.T * v)


def dual_vectors(normals: Sequence[RatVector], targets: Sequence[object]) -> list[RatVector]:
    """span(normals) 안에서 ⟨v_j, n_k⟩ = targets[j]·[j = k]를 만족하는 v_j를 구한다.

    타일링 스케일 법선(scaled normal) 계산에 쓰인다. 법선은 일차독립이어야 한다.
    """
    if not normals:
        return []
    B = ImmutableMatrix.hstack(*normals)
    t = len(normals)
    result = []
    for j, target in enumerate(targets):
        rhs = ImmutableMatrix(t, 1, [Rational(target) if k == j else 0 for k in range(t)])
        result.append(_gram_combination(B, rhs))
    return result


# ─── 열 Hermite 정규형 ────────────────────────────────────────────────────────

def _extgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def column_hermite_form(M: RatMatrix) -> tuple[RatMatrix, RatMatrix]:
    """정수 행렬 M에 대해 M·U = [H | 0]인 (H, U)를 반환한다.

    U는 유니모듈러이고 H는 열 사다리꼴(피벗 양수, 피벗 왼쪽 항목은 피벗으로 축약)이며
    열 개수가 rank(M)이다. U[:, r:]는 M의 정수 커널 격자를 생성한다.
    """
    if not is_integral(M):
        raise ValueError("column_hermite_form은 정수 행렬만 받는다")
    m, n = M.shape
    A = [[int(M[i, j]) for j in range(n)] for i in range(m)]
    U = [[int(i == j) for j in range(n)] for i in range(n)]

    def combine(cols: list[list[int]], c: int, j: int, x: int, y: int, p: int, q: int) -> None:
        # (col_c, col_j) <- (x col_c + y col_j, p col_c + q col_j)
        for row in cols:
            a, b = row[c], row[j]
            row[c], row[j] = x * a + y * b, p * a + q * b

    piv = 0
    pivots: list[tuple[int, int]] = []
    for i in range(m):
        if piv == n:
            break
        for j in range(piv + 1, n):
            b = A[i][j]
            if b == 0:
                continue
            a = A[i][piv]
            g, x, y = _extgcd(a, b)
            combine(A, piv, j, x, y, -b // g, a // g)
            combine(U, piv, j, x, y, -b // g, a // g)
        if A[i][piv] == 0:
            continue
        if A[i][piv] < 0:
            for rows in (A, U):
                for row in rows:
                    row[piv] = -row[piv]
        p = A[i][piv]
        for c in range(piv):
            q = A[i][c] // p
            if q:
                for rows in (A, U):
                    for row in rows:
                        row[c] -= q * row[piv]
        pivots.append((i, piv))
        piv += 1

    H = ImmutableMatrix(m, piv, [A[i][j] for i in range(m) for j in range(piv)]) if piv else ImmutableMatrix.zeros(m, 0)
    logger.debug("column_hermite_form: rank=%d pivots=%s", piv, pivots)
    return H, ImmutableMatrix(U)
