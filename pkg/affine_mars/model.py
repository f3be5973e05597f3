"""프로그램 스키마: 공간, 아핀 의존성, 타일링과 JSON 로딩/검증.

입력 문서 형식:
    {"spaces": [{"name", "dim", "kind", "domainBounds"?}],
     "deps":   [{"name"?, "source", "target", "A": [[...]], "b": [...]}],
     "tilings": [{"space", "normals": [[...]], "sizes": [...]}]}

정수만 허용하며 검증 오류 메시지는 문서 경로로 시작한다 (예: "deps[1].A: ...").
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Sequence

from affine_mars.core.iset import ISet
from affine_mars.core.linalg import RatMatrix, RatVector, dual_vectors, rank, to_matrix, to_vector
from affine_mars.errors import DimensionMismatchError, ProgramError

logger = logging.getLogger(__name__)


class SpaceKind(str, Enum):
    ITERATION = "iteration"
    DATA = "data"


@dataclass(frozen=True)
class Space:
    name: str
    dim: int
    kind: SpaceKind = SpaceKind.ITERATION


@dataclass(frozen=True)
class AffineFn:
    """의존성 B(x) = A x + b (source 공간 -> target 공간)."""

    source: Space
    target: Space
    A: RatMatrix
    b: tuple[int, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if self.A.shape != (self.target.dim, self.source.dim):
            raise DimensionMismatchError(
                f"A 크기 {self.A.shape} != ({self.target.dim}, {self.source.dim})"
            )
        if len(self.b) != self.target.dim:
            raise DimensionMismatchError(f"b 길이 {len(self.b)} != {self.target.dim}")

    @classmethod
    def of(cls, source: Space, target: Space, A: Sequence[Sequence[int]], b: Sequence[int], name: str = "") -> "AffineFn":
        return cls(source, target, to_matrix(A, cols=source.dim), tuple(int(v) for v in b), name)

    @cached_property
    def int_rows(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(v) for v in self.A.row(i)) for i in range(self.A.rows))

    @property
    def linear_key(self) -> tuple[tuple[int, ...], ...]:
        """선형 부분의 식별 키 (같은 키 = 같은 선형 부분)."""
        return self.int_rows

    @property
    def is_identity(self) -> bool:
        n = self.A.rows
        return self.A.is_square and self.int_rows == tuple(tuple(int(i == j) for j in range(n)) for i in range(n))

    def __call__(self, point: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * x for a, x in zip(row, point)) + bi for row, bi in zip(self.int_rows, self.b))

    def label(self, index: int) -> str:
        return self.name or f"B{index + 1}"


@dataclass(frozen=True)
class TilingSpec:
    """일차독립 법선 n_j와 크기 s_j로 정의되는 타일링.

    T(t) = {x : s_j t_j <= x·n_j < s_j (t_j + 1)}.
    """

    space: Space
    normals: tuple[tuple[int, ...], ...]
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.normals:
            raise ProgramError("normals", "법선이 하나 이상 필요하다")
        if len(self.normals) != len(self.sizes):
            raise ProgramError("sizes", f"크기 개수 {len(self.sizes)} != 법선 개수 {len(self.normals)}")
        if len(self.normals) > self.space.dim:
            raise ProgramError("normals", f"법선 개수 {len(self.normals)} > 공간 차원 {self.space.dim}")
        for j, n in enumerate(self.normals):
            if len(n) != self.space.dim:
                raise ProgramError(f"normals[{j}]", f"길이 {len(n)} != 공간 차원 {self.space.dim}")
        for j, s in enumerate(self.sizes):
            if s <= 0:
                raise ProgramError(f"sizes[{j}]", f"타일 크기는 양수여야 한다: {s}")
        if rank(to_matrix(self.normals)) != len(self.normals):
            raise ProgramError("normals", "법선 벡터가 일차독립이 아님 (dependent normals)")

    @property
    def count(self) -> int:
        return len(self.normals)

    @cached_property
    def scaled(self) -> tuple[RatVector, ...]:
        return tuple(scaled_normals(self))

    def tile_shift(self, t: Sequence[int]) -> RatVector:
        """Σ t_j n**_j (유리수 벡터)."""
        total = to_vector([0] * self.space.dim)
        for tj, v in zip(t, self.scaled):
            total = total + tj * v
        return total


@dataclass(frozen=True)
class Program:
    spaces: tuple[Space, ...]
    dependences: tuple[AffineFn, ...]
    tilings: tuple[TilingSpec, ...]
    domain_bounds: dict[str, tuple[tuple[int, int], ...]] = field(default_factory=dict)

    def space(self, name: str) -> Space:
        for sp in self.spaces:
            if sp.name == name:
                return sp
        raise ProgramError("spaces", f"알 수 없는 공간: {name!r}")

    def tiling_for(self, space: Space) -> Optional[TilingSpec]:
        return next((t for t in self.tilings if t.space == space), None)

    def dependences_into(self, space: Space) -> list[AffineFn]:
        return [d for d in self.dependences if d.target == space]

    def destinations(self) -> list[Space]:
        """의존성이 들어오는 공간 (문서 순서)."""
        seen: list[Space] = []
        for d in self.dependences:
            if d.target not in seen:
                seen.append(d.target)
        return seen

    def bounds_for(self, space: Space) -> Optional[tuple[tuple[int, int], ...]]:
        return self.domain_bounds.get(space.name)


# ─── 타일 ─────────────────────────────────────────────────────────────────────

def scaled_normals(tiling: TilingSpec) -> list[RatVector]:
    """n**_j: (x + n**_j)·n_k = x·n_k + s_j [j = k]를 만족하는 span(normals) 안의 벡터.

    법선이 서로 직교하면 s_j n_j / <n_j, n_j>와 같고, 아니면 Gram 시스템의 쌍대 벡터다.
    """
    return dual_vectors([to_vector(n) for n in tiling.normals], tiling.sizes)


def tile_set(tiling: TilingSpec, t: Sequence[int]) -> ISet:
    if len(t) != tiling.count:
        raise DimensionMismatchError(f"타일 좌표 길이 {len(t)} != 법선 개수 {tiling.count}")
    ineqs = []
    for n, s, tj in zip(tiling.normals, tiling.sizes, t):
        ineqs.append((n, -s * tj, ">=0"))
        ineqs.append(([-v for v in n], s * (tj + 1) - 1, ">=0"))
    return ISet.from_constraints(tiling.space.dim, ineqs)


# ─── 로딩 / 검증 ──────────────────────────────────────────────────────────────

def _require(obj: dict[str, Any], key: str, path: str) -> Any:
    if key not in obj:
        raise ProgramError(path, f"필수 필드 {key!r} 없음")
    return obj[key]


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProgramError(path, f"정수가 필요하다: {value!r}")
    return value


def _int_list(value: Any, path: str, length: Optional[int] = None) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise ProgramError(path, f"리스트가 필요하다: {value!r}")
    if length is not None and len(value) != length:
        raise ProgramError(path, f"길이 {len(value)} != {length} (dimension mismatch)")
    return tuple(_int(v, f"{path}[{i}]") for i, v in enumerate(value))


def _int_matrix(value: Any, path: str, rows: int, cols: int) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list) or len(value) != rows:
        raise ProgramError(path, f"{rows}x{cols} 행렬이 필요하다 (dimension mismatch)")
    return tuple(_int_list(row, f"{path}[{i}]", cols) for i, row in enumerate(value))


def _parse_space(raw: Any, path: str) -> tuple[Space, Optional[tuple[tuple[int, int], ...]]]:
    if not isinstance(raw, dict):
        raise ProgramError(path, "객체가 필요하다")
    name = _require(raw, "name", path)
    if not isinstance(name, str) or not name:
        raise ProgramError(f"{path}.name", f"이름이 필요하다: {name!r}")
    dim = _int(_require(raw, "dim", path), f"{path}.dim")
    if dim < 1:
        raise ProgramError(f"{path}.dim", f"차원은 1 이상이어야 한다: {dim}")
    kind_raw = raw.get("kind", SpaceKind.ITERATION.value)
    try:
        kind = SpaceKind(kind_raw)
    except ValueError:
        raise ProgramError(f"{path}.kind", f"iteration 또는 data: {kind_raw!r}") from None
    bounds = None
    if "domainBounds" in raw:
        rows = _int_matrix(raw["domainBounds"], f"{path}.domainBounds", dim, 2)
        for i, (lo, hi) in enumerate(rows):
            if lo > hi:
                raise ProgramError(f"{path}.domainBounds[{i}]", f"lo > hi: {lo} > {hi}")
        bounds = tuple((lo, hi) for lo, hi in rows)
    return Space(name, dim, kind), bounds


def _build(doc: Any) -> Program:
    if not isinstance(doc, dict):
        raise ProgramError("", "최상위 JSON 객체가 필요하다")
    raw_spaces = _require(doc, "spaces", "")
    if not isinstance(raw_spaces, list) or not raw_spaces:
        raise ProgramError("spaces", "공간 목록이 비어 있다")

    spaces: list[Space] = []
    bounds: dict[str, tuple[tuple[int, int], ...]] = {}
    for i, raw in enumerate(raw_spaces):
        sp, bnd = _parse_space(raw, f"spaces[{i}]")
        if any(s.name == sp.name for s in spaces):
            raise ProgramError(f"spaces[{i}].name", f"중복 이름: {sp.name!r}")
        spaces.append(sp)
        if bnd is not None:
            bounds[sp.name] = bnd
    by_name = {s.name: s for s in spaces}

    def lookup(name: Any, path: str) -> Space:
        if name not in by_name:
            raise ProgramError(path, f"알 수 없는 공간: {name!r}")
        return by_name[name]

    deps: list[AffineFn] = []
    for i, raw in enumerate(doc.get("deps", [])):
        path = f"deps[{i}]"
        if not isinstance(raw, dict):
            raise ProgramError(path, "객체가 필요하다")
        src = lookup(_require(raw, "source", path), f"{path}.source")
        dst = lookup(_require(raw, "target", path), f"{path}.target")
        A = _int_matrix(_require(raw, "A", path), f"{path}.A", dst.dim, src.dim)
        b = _int_list(raw.get("b", [0] * dst.dim), f"{path}.b", dst.dim)
        deps.append(AffineFn.of(src, dst, A, b, str(raw.get("name", ""))))

    tilings: list[TilingSpec] = []
    for i, raw in enumerate(doc.get("tilings", [])):
        path = f"tilings[{i}]"
        if not isinstance(raw, dict):
            raise ProgramError(path, "객체가 필요하다")
        sp = lookup(_require(raw, "space", path), f"{path}.space")
        if any(t.space == sp for t in tilings):
            raise ProgramError(f"{path}.space", f"공간 {sp.name!r}에 타일링이 이미 있다")
        raw_normals = _require(raw, "normals", path)
        if not isinstance(raw_normals, list):
            raise ProgramError(f"{path}.normals", "리스트가 필요하다")
        normals = tuple(_int_list(n, f"{path}.normals[{j}]", sp.dim) for j, n in enumerate(raw_normals))
        sizes = _int_list(_require(raw, "sizes", path), f"{path}.sizes", len(normals))
        try:
            tilings.append(TilingSpec(sp, normals, sizes))
        except ProgramError as e:
            raise ProgramError(f"{path}.{e.path}", str(e).split(": ", 1)[-1]) from None

    program = Program(tuple(spaces), tuple(deps), tuple(tilings), bounds)
    logger.info(
        "프로그램 로드: 공간 %d개, 의존성 %d개, 타일링 %d개", len(spaces), len(deps), len(tilings)
    )
    return program


def load_program(text: str) -> Program:
    """JSON 문서를 검증된 Program으로 변환한다."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProgramError("", f"JSON 파싱 실패: {e}") from e
    return _build(doc)


def load_program_file(path: str | Path) -> Program:
    return load_program(Path(path).read_text(encoding="utf-8"))
