"""Affine-MARS 파이프라인.

의존성 분류 → 결합 풋프린트 → 오프셋 패밀리(P) → 평행이동 불변성 확인 → MARS 분할.
모든 집합은 기준 타일 T(0)에서 계산하고, 불변성 검사로 다른 타일에 옮길 수 있는지 확인한다.
null space가 서로 다른 경우는 분할을 만들지 않고 fd_partition으로 소비 타일 구조만 보고한다.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace
from enum import Enum
from math import lcm
from typing import Optional, Sequence

from sympy import ImmutableMatrix

from affine_mars import config
from affine_mars.core import iset
from affine_mars.core.iset import ISet
from affine_mars.core.linalg import (
    Rational,
    RatVector,
    SubspaceBasis,
    as_ints,
    column_hermite_form,
    dot,
    is_integral,
    kernel_basis,
    project_onto,
    supplementary_basis,
    to_matrix,
)
from affine_mars.errors import (
    DimensionMismatchError,
    FamilyBlowupError,
    MultipleNullSpacesError,
    ProgramError,
    UnboundedSetError,
    UndecidedError,
)
from affine_mars.model import AffineFn, Space, TilingSpec, tile_set

logger = logging.getLogger(__name__)

Delta = tuple[int, ...]


class Verdict(str, Enum):
    UNIFORM = "Uniform"
    UNIFORMLY_INTERSECTING = "UniformlyIntersecting"
    SHARED_NULL_SPACE = "SharedNullSpace"
    MULTIPLE_NULL_SPACES = "MultipleNullSpaces"


@dataclass(frozen=True)
class DepClass:
    verdict: Verdict
    kernels: tuple[SubspaceBasis, ...]

    @property
    def admits_mars(self) -> bool:
        return self.verdict != Verdict.MULTIPLE_NULL_SPACES


@dataclass(frozen=True)
class OffsetFamily:
    """W(δ)가 같은 소비 타일들의 동치류. example_delta는 (L1, 사전식) 최소 대표."""

    index: int
    w: RatVector
    example_delta: Delta
    image_shift: tuple[Rational, ...]


@dataclass(frozen=True)
class MarsSet:
    signature: tuple[int, ...]
    deltas: tuple[Delta, ...]
    set: ISet


@dataclass(frozen=True)
class InvarianceVerdict:
    passed: bool
    witness: Optional[tuple[Delta, Delta]] = None
    checked: int = 0


@dataclass(frozen=True)
class MarsPartition:
    source: Space
    destination: Space
    tiling: TilingSpec
    classification: DepClass
    supplementary: SubspaceBasis
    tile: Delta
    footprint: ISet
    offsets: tuple[OffsetFamily, ...]
    mars: tuple[MarsSet, ...]
    invariance: InvarianceVerdict


@dataclass(frozen=True)
class FDFamily:
    deps: tuple[int, ...]
    tiles: tuple[Delta, ...]
    projections: tuple[tuple[int, tuple[tuple[Rational, ...], ...]], ...]


@dataclass(frozen=True)
class FDPartitionReport:
    box: int
    families: tuple[FDFamily, ...]

    @property
    def consumers(self) -> list[Delta]:
        return sorted(t for fam in self.families for t in fam.tiles)

    def family(self, deps: Sequence[int]) -> Optional[FDFamily]:
        return next((f for f in self.families if f.deps == tuple(deps)), None)


@dataclass(frozen=True)
class ConditionTriple:
    dep: int
    source_hyperplane: int
    dest_hyperplane: int
    dot: Rational
    multiplier: Optional[Rational]
    status: str  # "pass" | "fail" | "orthogonal-skipped"


@dataclass(frozen=True)
class ConditionReport:
    triples: tuple[ConditionTriple, ...]

    @property
    def passed(self) -> bool:
        return all(t.status != "fail" for t in self.triples)


# ─── 공통 헬퍼 ────────────────────────────────────────────────────────────────

def delta_key(delta: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    return sum(abs(v) for v in delta), tuple(delta)


def _add(a: Sequence[int], b: Sequence[int]) -> Delta:
    return tuple(x + y for x, y in zip(a, b))


def _tile_box(count: int, radius: int) -> list[Delta]:
    return sorted(itertools.product(range(-radius, radius + 1), repeat=count), key=delta_key)


def _common_spaces(deps: Sequence[AffineFn]) -> tuple[Space, Space]:
    if not deps:
        raise ProgramError("deps", "분석할 의존성이 없다")
    source, target = deps[0].source, deps[0].target
    for i, d in enumerate(deps):
        if d.target != target:
            raise ProgramError(f"deps[{i}].target", f"대상 공간이 섞여 있다: {d.target.name} != {target.name}")
        if d.source != source:
            raise ProgramError(f"deps[{i}].source", f"원천 공간이 섞여 있다: {d.source.name} != {source.name}")
    return source, target


def _check_tiling(deps: Sequence[AffineFn], tiling: TilingSpec) -> None:
    if tiling.space != deps[0].source:
        raise DimensionMismatchError(f"타일링 공간 {tiling.space.name} != 원천 공간 {deps[0].source.name}")


def _scaled_matrix(tiling: TilingSpec) -> ImmutableMatrix:
    return ImmutableMatrix.hstack(*tiling.scaled)


def _w_columns(tiling: TilingSpec, supplementary: SubspaceBasis) -> list[RatVector]:
    return [project_onto(supplementary, v) for v in tiling.scaled]


def _w_of(columns: Sequence[RatVector], delta: Sequence[int]) -> RatVector:
    total = ImmutableMatrix.zeros(columns[0].rows, 1) if columns else ImmutableMatrix.zeros(0, 1)
    for c, v in zip(delta, columns):
        total = total + c * v
    return ImmutableMatrix(total)


def _shift(dep: AffineFn, tiling: TilingSpec, delta: Sequence[int]) -> ImmutableMatrix:
    """A·(Σ δ_j n**_j)."""
    return ImmutableMatrix(dep.A * tiling.tile_shift(delta))


# ─── 분류 ─────────────────────────────────────────────────────────────────────

def classify(deps: Sequence[AffineFn]) -> DepClass:
    """가장 강한 판정을 반환한다: Uniform ⊂ UniformlyIntersecting ⊂ SharedNullSpace."""
    _common_spaces(deps)
    linear: dict[tuple, AffineFn] = {}
    for d in deps:
        linear.setdefault(d.linear_key, d)
    kernels = tuple(kernel_basis(d.A) for d in linear.values())

    if all(d.is_identity for d in deps):
        verdict = Verdict.UNIFORM
    elif len(linear) == 1:
        verdict = Verdict.UNIFORMLY_INTERSECTING
    elif all(k.same_span(kernels[0]) for k in kernels[1:]):
        verdict = Verdict.SHARED_NULL_SPACE
    else:
        verdict = Verdict.MULTIPLE_NULL_SPACES
    logger.info("의존성 분류: %s (선형 부분 %d개)", verdict.value, len(linear))
    return DepClass(verdict, kernels)


# ─── 풋프린트 ─────────────────────────────────────────────────────────────────

def footprint(dep: AffineFn, tiling: TilingSpec, t: Sequence[int]) -> ISet:
    return iset.image(dep, tile_set(tiling, t))


class FootprintCache:
    """타일 위치별 의존성 풋프린트를 한 번만 계산한다.

    N·t가 정수 벡터면 T(t) = T(0) + N·t 이므로 B_i<T(t)>는 B_i<T(0)>을 A_i·N·t만큼 옮겨 얻는다.
    그 밖의 타일은 상(image)을 직접 계산한다.
    """

    def __init__(self, deps: Sequence[AffineFn], tiling: TilingSpec) -> None:
        _, self.target = _common_spaces(deps)
        _check_tiling(deps, tiling)
        self.deps = tuple(deps)
        self.tiling = tiling
        self._single: dict[tuple[int, Delta], ISet] = {}
        self._combined: dict[Delta, ISet] = {}

    def single(self, i: int, t: Sequence[int]) -> ISet:
        key = (i, tuple(t))
        if key not in self._single:
            shift = self.tiling.tile_shift(t)
            if any(t) and is_integral(shift):
                base = self.single(i, (0,) * self.tiling.count)
                self._single[key] = iset.translate(base, as_ints(self.deps[i].A * shift))
            else:
                self._single[key] = footprint(self.deps[i], self.tiling, t)
        return self._single[key]

    def combined(self, t: Sequence[int]) -> ISet:
        """B<T(t)> = ∪_i B_i<T(t)>. 유계가 아니면 UnboundedSetError."""
        key = tuple(t)
        if key not in self._combined:
            result = iset.union_all(self.target.dim, (self.single(i, key) for i in range(len(self.deps))))
            try:
                iset.bounding_box(result)
            except UnboundedSetError:
                raise UnboundedSetError(
                    f"타일 {key}의 풋프린트가 유계가 아니다 "
                    f"(타일링 법선 {self.tiling.count}개 < 차원 {self.tiling.space.dim})"
                ) from None
            self._combined[key] = result
        return self._combined[key]


def combined_footprint(deps: Sequence[AffineFn], tiling: TilingSpec, t: Sequence[int]) -> ISet:
    """B<T(t)> = ∪_i B_i<T(t)>. 유계가 아니면 UnboundedSetError."""
    return FootprintCache(deps, tiling).combined(t)


def _consumer_test(tiling: TilingSpec, pulled: Sequence[ISet], delta: Sequence[int]) -> bool:
    tile = tile_set(tiling, delta)
    return any(not iset.is_empty(iset.intersect(tile, p)) for p in pulled)


# ─── 오프셋 패밀리 ────────────────────────────────────────────────────────────

def _candidate_set(
    deps: Sequence[AffineFn], tiling: TilingSpec, ref_box: Sequence[tuple[int, int]], Ur: ImmutableMatrix
) -> ISet:
    """시프트된 풋프린트 박스가 기준 풋프린트 박스에 닿을 수 있는 z의 정수 점 집합."""
    r = Ur.cols
    N = _scaled_matrix(tiling)
    cells: list[ISet] = []
    for dep in deps:
        M = dep.A * N * Ur
        steps = dep.A * N
        ineqs = []
        for i in range(dep.A.rows):
            lo = Rational(dep.b[i]) + sum((min(0, steps[i, j]) for j in range(steps.cols)), Rational(0))
            hi = Rational(dep.b[i]) + sum((max(0, steps[i, j]) for j in range(steps.cols)), Rational(0))
            row = [Rational(M[i, j]) for j in range(r)]
            low_bound = Rational(ref_box[i][0]) - hi
            high_bound = Rational(ref_box[i][1]) - lo
            D = lcm(*(v.q for v in row), low_bound.q, high_bound.q)
            coeffs = [int(v * D) for v in row]
            ineqs.append((coeffs, int(-low_bound * D), ">=0"))
            ineqs.append(([-c for c in coeffs], int(high_bound * D), ">=0"))
        cells.append(ISet.from_constraints(r, ineqs))
    return iset.union_all(r, cells)


def _require_mars(cls: DepClass) -> None:
    if not cls.admits_mars:
        raise MultipleNullSpacesError(
            "의존성들의 null space가 서로 다르다 (MultipleNullSpaces): "
            "소비 타일의 W가 타일 위치에 의존할 수 있으므로 fd_partition으로 진단하라"
        )


def offset_families(
    deps: Sequence[AffineFn],
    tiling: TilingSpec,
    classification: Optional[DepClass] = None,
    *,
    footprints: Optional[FootprintCache] = None,
) -> list[OffsetFamily]:
    """기준 풋프린트와 겹치는 모든 소비 타일을 W(δ)로 묶은 패밀리 목록 (0 패밀리 먼저).

    타일 오프셋을 유니모듈러 기저 δ = U_r z + U_k c로 바꾸면 c는 커널 격자 방향(같은 패밀리),
    z는 패밀리를 가른다. 후보 z는 유계 다면체의 정수 점으로 정확히 열거하고, 각 후보는
    T(δ) ∩ B_i^{-1}(B<T(0)>) 공집합 판정으로 확인한다.

    Args:
        deps: 같은 원천/대상 공간을 잇는 의존성 목록
        tiling: 원천 공간 타일링
        classification: classify 결과 (없으면 새로 계산)
        footprints: 같은 deps/tiling의 풋프린트 캐시 (build_mars가 공유한다)
    """
    cls = classification or classify(deps)
    _require_mars(cls)
    fp = footprints or FootprintCache(deps, tiling)
    t = tiling.count
    zero = (0,) * t
    F = fp.combined(zero)
    ref_box = iset.bounding_box(F)
    supplementary = supplementary_basis(cls.kernels[0])
    columns = _w_columns(tiling, supplementary)

    Wm = ImmutableMatrix.hstack(*columns)
    D = lcm(*(Rational(v).q for v in Wm)) if len(Wm) else 1
    H, U = column_hermite_form(Wm * D)
    H_rank = H.cols
    Ur, Uk = U[:, :H_rank], U[:, H_rank:]

    if H_rank == 0 or ref_box is None:
        candidates: list[tuple[int, ...]] = [()]
    else:
        candidates = iset.points(_candidate_set(deps, tiling, ref_box, Ur))
    logger.debug("오프셋 후보 %d개 (패밀리 격자 차원 %d, 커널 격자 차원 %d)", len(candidates), H_rank, t - H_rank)

    pulled = [iset.preimage(d, F) for d in deps]
    radius = config.COSET_RADIUS
    coset = sorted(itertools.product(range(-radius, radius + 1), repeat=t - H_rank))

    found: list[tuple[Delta, RatVector]] = []
    for z in candidates:
        base = Ur * ImmutableMatrix(len(z), 1, list(z)) if z else ImmutableMatrix.zeros(t, 1)
        members = []
        for c in coset:
            vec = base + (Uk * ImmutableMatrix(len(c), 1, list(c)) if c else ImmutableMatrix.zeros(t, 1))
            members.append(tuple(int(v) for v in vec))
        for delta in sorted(set(members), key=delta_key):
            if _consumer_test(tiling, pulled, delta):
                found.append((delta, _w_of(columns, delta)))
                break

    found.sort(key=lambda item: (item[0] != zero, delta_key(item[0])))
    if not found or found[0][0] != zero:
        found.insert(0, (zero, _w_of(columns, zero)))
    families = [
        OffsetFamily(i, w, delta, tuple(Rational(v) for v in _shift(deps[0], tiling, delta)))
        for i, (delta, w) in enumerate(found)
    ]
    logger.info("오프셋 패밀리 %d개", len(families))
    return families


# ─── 불변성 ───────────────────────────────────────────────────────────────────

def default_samples(count: int) -> list[Delta]:
    return [
        (0,) * count,
        tuple(3 if j % 2 == 0 else -2 for j in range(count)),
        (5,) * count,
    ]


def _footprint_shift(fp: FootprintCache, delta: Sequence[int]) -> Delta:
    """δ만큼 타일을 옮길 때 풋프린트가 이동해야 하는 양."""
    shifts = {tuple(_shift(d, fp.tiling, delta)) for d in fp.deps}
    if len(shifts) == 1:
        only = next(iter(shifts))
        if all(Rational(v).q == 1 for v in only):
            return tuple(int(v) for v in only)
        logger.warning("δ=%s의 이동량 A·N·δ = %s가 정수가 아니다: 풋프린트 최소점 차이로 대신한다", tuple(delta), only)
    zero = (0,) * fp.tiling.count
    a = iset.lexmin(fp.combined(zero))
    b = iset.lexmin(fp.combined(delta))
    if a is None or b is None:
        return (0,) * fp.target.dim
    return tuple(y - x for x, y in zip(a, b))


def verify_invariance(
    deps: Sequence[AffineFn],
    tiling: TilingSpec,
    samples: Optional[Sequence[Sequence[int]]] = None,
    deltas: Optional[Sequence[Sequence[int]]] = None,
    classification: Optional[DepClass] = None,
    *,
    footprints: Optional[FootprintCache] = None,
) -> InvarianceVerdict:
    """각 샘플 타일 t와 오프셋 δ에 대해 B<T(t+δ)> = B<T(t)> + u인지 확인한다.

    실패는 예외가 아니라 판정이며 반례 (t, δ)를 담는다.

    Args:
        deps: 검사할 의존성 목록
        tiling: 원천 공간 타일링
        samples: 샘플 타일 위치 (기본: default_samples)
        deltas: 검사할 오프셋 (기본: 패밀리 대표, MARS가 없으면 [-1, 1]^t)
        classification: classify 결과 (없으면 새로 계산)
        footprints: 풋프린트 캐시
    """
    cls = classification or classify(deps)
    fp = footprints or FootprintCache(deps, tiling)
    count = tiling.count
    sample_list = [tuple(s) for s in (samples if samples is not None else default_samples(count))]
    if deltas is None:
        if cls.admits_mars:
            delta_list = [f.example_delta for f in offset_families(deps, tiling, cls, footprints=fp)]
        else:
            delta_list = _tile_box(count, 1)
    else:
        delta_list = [tuple(d) for d in deltas]

    checked = 0
    for delta in delta_list:
        if not any(delta):
            continue
        u = _footprint_shift(fp, delta)
        for t in sample_list:
            checked += 1
            moved = fp.combined(_add(t, delta))
            expected = iset.translate(fp.combined(t), u)
            if not iset.equal(moved, expected):
                logger.info("불변성 실패: t=%s, δ=%s", t, delta)
                return InvarianceVerdict(False, (t, delta), checked)
    logger.debug("불변성 확인: %d 쌍 통과", checked)
    return InvarianceVerdict(True, None, checked)


# ─── MARS ─────────────────────────────────────────────────────────────────────

def build_mars(
    deps: Sequence[AffineFn],
    tiling: TilingSpec,
    *,
    tile: Optional[Sequence[int]] = None,
    max_families: Optional[int] = None,
    classification: Optional[DepClass] = None,
    families: Optional[Sequence[OffsetFamily]] = None,
    invariance: Optional[InvarianceVerdict] = None,
    footprints: Optional[FootprintCache] = None,
) -> MarsPartition:
    """타일의 결합 풋프린트를 소비 시그니처별 MARS로 분할한다.

    부분 집합 공식 M_C를 시그니처 세분으로 계산한다: (풋프린트, {0})에서 시작해 패밀리 w마다
    각 부분을 Φ(w) 안과 밖으로 나누고 빈 부분은 버린다.

    Args:
        deps: 한 대상 공간으로 들어오는 의존성 목록
        tiling: 원천 공간 타일링
        tile: 분할할 타일 위치 (기본: T(0))
        max_families: 패밀리 상한 (기본: config.MAX_FAMILIES)
        classification: classify 결과
        families: 이미 계산한 offset_families 결과 (다른 타일을 분할할 때 재사용)
        invariance: 이미 계산한 verify_invariance 결과
        footprints: 같은 deps/tiling의 풋프린트 캐시
    """
    source, destination = _common_spaces(deps)
    cls = classification or classify(deps)
    _require_mars(cls)
    fp = footprints or FootprintCache(deps, tiling)
    if families is None:
        families = offset_families(deps, tiling, cls, footprints=fp)
    limit = config.MAX_FAMILIES if max_families is None else max_families
    if len(families) > limit:
        raise FamilyBlowupError(
            f"오프셋 패밀리 {len(families)}개가 상한 {limit}개를 넘는다 (MARS_MAX_FAMILIES 또는 --max-families)"
        )
    if invariance is None:
        invariance = verify_invariance(
            deps, tiling, deltas=[f.example_delta for f in families], classification=cls, footprints=fp
        )
    if not invariance.passed:
        logger.warning("풋프린트 평행이동 불변성 실패: 반례 %s", invariance.witness)

    base = tuple(tile) if tile is not None else (0,) * tiling.count
    F = fp.combined(base)
    parts: list[tuple[ISet, tuple[int, ...]]] = [(F, (0,))]
    for fam in families[1:]:
        # part ⊆ F 이므로 Φ(w) = F ∩ B<T(base+δ)> 대신 B<T(base+δ)>로 나눠도 같다
        reach = fp.combined(_add(base, fam.example_delta))
        if iset.is_empty(iset.intersect(reach, F)):
            continue
        nxt: list[tuple[ISet, tuple[int, ...]]] = []
        for part, sig in parts:
            inside = iset.intersect(part, reach)
            if iset.is_empty(inside):
                nxt.append((part, sig))
                continue
            nxt.append((inside, sig + (fam.index,)))
            outside = iset.subtract(part, reach)
            if not iset.is_empty(outside):
                nxt.append((outside, sig))
        parts = nxt
        logger.debug("패밀리 %d 세분 후 부분 %d개", fam.index, len(parts))

    deltas = {f.index: f.example_delta for f in families}
    mars = tuple(
        MarsSet(sig, tuple(deltas[i] for i in sig), part)
        for part, sig in sorted(parts, key=lambda p: (len(p[1]), p[1]))
    )
    logger.info("MARS %d개 (패밀리 %d개)", len(mars), len(families))
    return MarsPartition(
        source=source,
        destination=destination,
        tiling=tiling,
        classification=cls,
        supplementary=supplementary_basis(cls.kernels[0]),
        tile=base,
        footprint=F,
        offsets=tuple(families),
        mars=mars,
        invariance=invariance,
    )


def restrict_outside_tile(partition: MarsPartition, tiling: Optional[TilingSpec] = None) -> MarsPartition:
    """각 MARS를 T(0) 밖의 점으로 제한하고 비게 된 MARS는 버린다 (flow-in 비교용)."""
    tiling = tiling or partition.tiling
    if tiling.space.dim != partition.destination.dim:
        raise DimensionMismatchError(
            f"타일 T(0)의 공간 {tiling.space.name}(차원 {tiling.space.dim})이 "
            f"대상 공간 {partition.destination.name}(차원 {partition.destination.dim})과 맞지 않는다"
        )
    tile = partition.tile if tiling == partition.tiling else (0,) * tiling.count
    own = tile_set(tiling, tile)
    kept = []
    for m in partition.mars:
        rest = iset.subtract(m.set, own)
        if not iset.is_empty(rest):
            kept.append(replace(m, set=rest))
    logger.info("T(0) 밖 MARS %d개 (원래 %d개)", len(kept), len(partition.mars))
    return replace(partition, footprint=iset.subtract(partition.footprint, own), mars=tuple(kept))


def _check_by_points(partition: MarsPartition) -> bool:
    footprint = set(iset.points(partition.footprint))
    seen: set[tuple[int, ...]] = set()
    for m in partition.mars:
        pts = iset.points(m.set)
        if not pts or not seen.isdisjoint(pts):
            return False
        seen.update(pts)
    return seen == footprint


def check_partition(partition: MarsPartition) -> bool:
    """MARS가 비어 있지 않고 서로소이며 합집합이 풋프린트와 같은지 확인한다.

    유계이고 열거 한도 안이면 각 집합의 정수 점으로 정확히 확인하고, 아니면 기호 연산으로 확인한다.
    """
    try:
        return _check_by_points(partition)
    except (UnboundedSetError, UndecidedError):
        logger.debug("점 열거로 분할을 확인할 수 없어 기호 연산으로 확인한다")
    sets = [m.set for m in partition.mars]
    if any(iset.is_empty(s) for s in sets):
        return False
    for a, b in itertools.combinations(sets, 2):
        if not iset.is_empty(iset.intersect(a, b)):
            return False
    covered = iset.union_all(partition.destination.dim, sets)
    return iset.equal(covered, partition.footprint)


def family_of(partition: MarsPartition, delta: Sequence[int]) -> Optional[int]:
    """타일 오프셋 δ가 속한 패밀리 인덱스. W(δ)가 어떤 패밀리와도 다르면 None."""
    w = _w_of(_w_columns(partition.tiling, partition.supplementary), delta)
    return next((f.index for f in partition.offsets if f.w == w), None)


# ─── 다중 null space 진단 ─────────────────────────────────────────────────────

def consumer_tiles(deps: Sequence[AffineFn], tiling: TilingSpec, box: int) -> list[list[Delta]]:
    """의존성별 소비 타일 V_i(0) = {δ : B_i<T(δ)> ∩ B<T(0)> ≠ ∅} (δ ∈ [-box, box]^t)."""
    F = combined_footprint(deps, tiling, (0,) * tiling.count)
    result = []
    for dep in deps:
        pulled = [iset.preimage(dep, F)]
        result.append([d for d in _tile_box(tiling.count, box) if _consumer_test(tiling, pulled, d)])
    return [sorted(v) for v in result]


def fd_partition(deps: Sequence[AffineFn], tiling: TilingSpec, box: Optional[int] = None) -> FDPartitionReport:
    """소비 타일을 도달하는 의존성 부분집합 D별로 나눈다 (의존성 번호는 1부터).

    D마다 각 의존성 i ∈ D의 서로 다른 W_i 값도 모은다 (박스 안 유한성 확인용).

    Args:
        deps: 같은 원천/대상 공간을 잇는 의존성 목록 (null space가 달라도 된다)
        tiling: 원천 공간 타일링
        box: 타일 오프셋 반경 (기본: config.FD_BOX)
    """
    radius = config.FD_BOX if box is None else box
    per_dep = consumer_tiles(deps, tiling, radius)
    membership: dict[Delta, list[int]] = {}
    for i, tiles in enumerate(per_dep, start=1):
        for d in tiles:
            membership.setdefault(d, []).append(i)

    projectors = []
    for dep in deps:
        sup = supplementary_basis(kernel_basis(dep.A))
        projectors.append(_w_columns(tiling, sup))

    grouped: dict[tuple[int, ...], list[Delta]] = {}
    for d, members in membership.items():
        grouped.setdefault(tuple(members), []).append(d)

    families = []
    for key in sorted(grouped, key=lambda k: (len(k), k)):
        tiles = tuple(sorted(grouped[key]))
        projections = []
        for i in key:
            values = {tuple(Rational(v) for v in _w_of(projectors[i - 1], d)) for d in tiles}
            projections.append((i, tuple(sorted(values))))
        families.append(FDFamily(key, tiles, tuple(projections)))
    logger.info("F_D 패밀리 %d개 (박스 반경 %d)", len(families), radius)
    return FDPartitionReport(radius, tuple(families))


# ─── 타일된 대상 공간 ─────────────────────────────────────────────────────────

def tiled_destination_condition(
    deps: Sequence[AffineFn], source_tiling: TilingSpec, dest_tiling: TilingSpec
) -> ConditionReport:
    """(i, j, k)마다 m·((A_i n**_j)·d_k) = z_k인 정수 m이 있는지 확인한다.

    내적이 0인 쌍은 조건이 성립할 수 없으므로 "orthogonal-skipped"로 따로 표시한다.
    """
    if dest_tiling.space != deps[0].target:
        raise DimensionMismatchError(f"대상 타일링 공간 {dest_tiling.space.name} != {deps[0].target.name}")
    triples = []
    for i, dep in enumerate(deps, start=1):
        for j, n in enumerate(source_tiling.scaled, start=1):
            image_step = dep.A * n
            for k, (d, z) in enumerate(zip(dest_tiling.normals, dest_tiling.sizes), start=1):
                value = dot(image_step, to_matrix([[v] for v in d]))
                if value == 0:
                    triples.append(ConditionTriple(i, j, k, value, None, "orthogonal-skipped"))
                    continue
                m = Rational(z) / value
                status = "pass" if m.q == 1 else "fail"
                triples.append(ConditionTriple(i, j, k, value, m, status))
    report = ConditionReport(tuple(triples))
    logger.info("타일된 대상 조건: %s", "통과" if report.passed else "실패")
    return report


def destination_consumers(
    deps: Sequence[AffineFn], source_tiling: TilingSpec, dest_tiling: TilingSpec, u: Sequence[int], box: int
) -> list[Delta]:
    """X(u): 어떤 의존성의 풋프린트가 대상 타일 U(u)와 겹치는 원천 타일 (박스 안)."""
    target_tile = tile_set(dest_tiling, u)
    pulled = [iset.preimage(d, target_tile) for d in deps]
    return sorted(d for d in _tile_box(source_tiling.count, box) if _consumer_test(source_tiling, pulled, d))

