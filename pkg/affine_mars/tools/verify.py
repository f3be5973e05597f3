"""기호 분할과 오라클 그룹의 점 단위 대조, 마크다운 일치 표."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from affine_mars import config, oracle
from affine_mars.core import iset
from affine_mars.core.iset import ISet
from affine_mars.errors import BoxTooSmallError, ProgramError
from affine_mars.mars import MarsPartition, family_of
from affine_mars.model import Program
from affine_mars.oracle import SignatureGrouping

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchRow:
    signature: tuple[int, ...]
    symbolic: int
    oracle: int
    match: bool


@dataclass
class Agreement:
    rows: list[MatchRow] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def matched(self) -> int:
        return sum(1 for r in self.rows if r.match)

    @property
    def agree(self) -> bool:
        return self.matched == self.total


def _cube(dim: int, radius: int) -> list[tuple[int, int]]:
    return [(-radius, radius)] * dim


def oracle_grouping(
    program: Program,
    partition: MarsPartition,
    tile_box: Optional[int] = None,
    data_box: Optional[int] = None,
    exclude_self: bool = False,
) -> SignatureGrouping:
    """partition에 대응하는 오라클 그룹. exclude_self면 T(0) 밖의 점만 남긴다."""
    dest = partition.destination
    box = _cube(dest.dim, data_box) if data_box is not None else None
    if exclude_self and dest == partition.source:
        return oracle.oracle_flow_mars(
            program.dependences_into(dest), partition.tiling, tile_box, program.bounds_for(partition.source)
        )
    grouping = oracle.oracle_mars(program, dest, tile_box, box)
    if not exclude_self:
        return grouping
    own = program.tiling_for(dest)
    if own is None:
        raise ProgramError("--exclude-self", f"대상 공간 {dest.name}에 타일링이 없다")
    inside = {tuple(int(v) for v in p) for p in oracle.tile_points(own, (0,) * own.count, program.bounds_for(dest))}
    kept = {}
    for sig, pts in grouping.groups.items():
        rest = [p for p in pts if p not in inside]
        if rest:
            kept[sig] = rest
    return SignatureGrouping(kept)


def compare(
    partition: MarsPartition,
    grouping: SignatureGrouping,
    sets: Optional[Sequence[tuple[tuple[int, ...], ISet]]] = None,
    tile_box: Optional[int] = None,
) -> Agreement:
    """오라클의 δ 시그니처를 W(δ)로 패밀리 시그니처로 바꾼 뒤 MARS별 점 집합을 비교한다.

    Args:
        partition: 기호 분할 결과
        grouping: 같은 대상 공간의 오라클 그룹
        sets: 주면 partition.mars 대신 이 (시그니처, 집합) 목록을 비교한다 (저장된 보고서 검증용)
        tile_box: 오라클 타일 박스 반경. 패밀리 대표 오프셋을 담지 못하면 BoxTooSmallError

    Returns:
        시그니처별 기호/오라클 점 수와 일치 여부를 담은 Agreement
    """
    radius = config.TILE_BOX if tile_box is None else tile_box
    for fam in partition.offsets:
        if any(abs(v) > radius for v in fam.example_delta):
            raise BoxTooSmallError(
                f"타일 박스 반경 {radius}이 패밀리 {fam.index}의 대표 오프셋 {fam.example_delta}를 담지 못한다"
            )

    expected: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
    for deltas, pts in grouping.groups.items():
        indices = {family_of(partition, d) for d in deltas}
        key = tuple(sorted(-1 if i is None else i for i in indices))
        expected.setdefault(key, set()).update(pts)

    pairs = sets if sets is not None else [(m.signature, m.set) for m in partition.mars]
    agreement = Agreement()
    for signature, symbolic_set in pairs:
        got = set(iset.points(symbolic_set))
        want = expected.pop(tuple(signature), set())
        agreement.rows.append(MatchRow(tuple(signature), len(got), len(want), got == want))
    for signature, pts in sorted(expected.items()):
        agreement.rows.append(MatchRow(signature, 0, len(pts), False))
    logger.info("오라클 대조: %d/%d 그룹 일치", agreement.matched, agreement.total)
    return agreement


def match_table(agreement: Agreement) -> str:
    """마크다운 일치 표."""
    lines = [
        "| 시그니처 | 기호 점 수 | 오라클 점 수 | 일치 |",
        "|---|---|---|---|",
    ]
    for row in agreement.rows:
        sig = "{" + ", ".join(str(i) for i in row.signature) + "}"
        lines.append(f"| {sig} | {row.symbolic} | {row.oracle} | {'✓' if row.match else '✗'} |")
    verdict = "agree" if agreement.agree else "mismatch"
    lines.append("")
    lines.append(f"**{verdict}: {agreement.matched}/{agreement.total} groups**")
    return "\n".join(lines)
