"""대상 공간별 분석 오케스트레이터: 분류부터 오라클 대조까지 한 번에 실행한다."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from affine_mars import mars
from affine_mars.errors import ProgramError, RefusalError
from affine_mars.mars import (
    ConditionReport,
    DepClass,
    FDPartitionReport,
    InvarianceVerdict,
    MarsPartition,
)
from affine_mars.model import Program, Space
from affine_mars.tools.verify import Agreement, compare, oracle_grouping

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalyzeOptions:
    exclude_self: bool = False
    max_families: Optional[int] = None
    fd: bool = False
    fd_box: Optional[int] = None
    oracle: bool = False
    tile_box: Optional[int] = None
    data_box: Optional[int] = None


@dataclass(frozen=True)
class DestinationAnalysis:
    destination: Space
    source: Space
    classification: DepClass
    invariance: Optional[InvarianceVerdict] = None
    partition: Optional[MarsPartition] = None
    partition_ok: Optional[bool] = None
    refusal: Optional[tuple[str, str]] = None
    fd: Optional[FDPartitionReport] = None
    conjecture: Optional[ConditionReport] = None
    oracle: Optional[Agreement] = None

    @property
    def refused(self) -> bool:
        return self.refusal is not None


def _single_source(program: Program, dest: Space) -> Space:
    deps = program.dependences_into(dest)
    if not deps:
        raise ProgramError("deps", f"공간 {dest.name}으로 들어오는 의존성이 없다")
    sources = {d.source.name for d in deps}
    if len(sources) > 1:
        raise ProgramError("deps", f"공간 {dest.name}의 의존성 원천 공간이 여러 개다: {sorted(sources)}")
    return deps[0].source


def analyze(program: Program, dest: Space, options: AnalyzeOptions = AnalyzeOptions()) -> DestinationAnalysis:
    """
    한 대상 공간에 대해 전체 파이프라인을 실행한다.
    MultipleNullSpaces, 패밀리 폭증은 예외 대신 결과의 refusal에 기록된다.

    Args:
        program: 로드된 프로그램
        dest: 분석할 대상 공간
        options: 오라클, F_D, flow-in 등 선택 단계

    Returns:
        분류, 불변성, 분할, 진단을 모은 DestinationAnalysis
    """
    source = _single_source(program, dest)
    tiling = program.tiling_for(source)
    if tiling is None:
        raise ProgramError("tilings", f"원천 공간 {source.name}에 타일링이 없다")
    deps = program.dependences_into(dest)

    cls = mars.classify(deps)
    invariance = None
    partition = None
    partition_ok = None
    refusal = None
    try:
        partition = mars.build_mars(deps, tiling, max_families=options.max_families, classification=cls)
        invariance = partition.invariance
        if options.exclude_self:
            own = program.tiling_for(dest)
            if own is None:
                raise ProgramError("--exclude-self", f"대상 공간 {dest.name}에 타일링이 없다")
            partition = mars.restrict_outside_tile(partition, own)
        partition_ok = mars.check_partition(partition)
    except RefusalError as e:
        logger.warning("분석 거부 (%s): %s", e.kind, e)
        refusal = (e.kind, str(e))
        if not cls.admits_mars:
            invariance = mars.verify_invariance(deps, tiling, classification=cls)

    fd = None
    if options.fd:
        fd = mars.fd_partition(deps, tiling, options.fd_box)

    conjecture = None
    dest_tiling = program.tiling_for(dest)
    if dest_tiling is not None and dest != source:
        conjecture = mars.tiled_destination_condition(deps, tiling, dest_tiling)

    agreement = None
    if options.oracle and partition is not None:
        grouping = oracle_grouping(
            program, partition, options.tile_box, options.data_box, exclude_self=options.exclude_self
        )
        agreement = compare(partition, grouping, tile_box=options.tile_box)

    logger.info("분석 완료: %s <- %s (%s)", dest.name, source.name, cls.verdict.value)
    return DestinationAnalysis(
        destination=dest,
        source=source,
        classification=cls,
        invariance=invariance,
        partition=partition,
        partition_ok=partition_ok,
        refusal=refusal,
        fd=fd,
        conjecture=conjecture,
        oracle=agreement,
    )


def analyze_program(
    program: Program, dest_name: Optional[str] = None, options: AnalyzeOptions = AnalyzeOptions()
) -> list[DestinationAnalysis]:
    """dest_name이 없으면 의존성이 들어오는 모든 공간을 분석한다."""
    if dest_name is not None:
        targets = [program.space(dest_name)]
    else:
        targets = program.destinations()
        if not targets:
            raise ProgramError("deps", "의존성이 없다")
    return [analyze(program, dest, options) for dest in targets]
