"""분석 보고서(JSON, schema 1) 조립과 저장된 보고서 읽기.

키 정렬 + 들여쓰기 2로 직렬화하므로 같은 입력이면 바이트 단위로 같은 보고서가 나온다.
유리수는 정수면 int, 아니면 "p/q" 문자열로 쓴다.
"""
from __future__ import annotations

import hashlib
import json
import logging
from typing import Any, Iterable, Optional, Sequence

from affine_mars.core import iset
from affine_mars.core.iset import ISet
from affine_mars.core.linalg import Rational
from affine_mars.errors import ProgramError
from affine_mars.mars import ConditionReport, FDPartitionReport, InvarianceVerdict, MarsPartition
from affine_mars.tools.orchestrator import DestinationAnalysis
from affine_mars.tools.verify import Agreement

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def program_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def rational(value: Any) -> int | str:
    q = Rational(value)
    return int(q) if q.q == 1 else f"{q.p}/{q.q}"


def vector(values: Iterable[Any]) -> list[int | str]:
    return [rational(v) for v in values]


def _invariance(v: Optional[InvarianceVerdict]) -> Optional[dict[str, Any]]:
    if v is None:
        return None
    witness = None
    if v.witness is not None:
        witness = {"tile": list(v.witness[0]), "delta": list(v.witness[1])}
    return {"passed": v.passed, "witness": witness, "checked": v.checked}


def _partition(p: MarsPartition) -> tuple[list[dict], list[dict]]:
    offsets = [
        {
            "index": f.index,
            "w": vector(f.w),
            "delta": list(f.example_delta),
            "image_shift": vector(f.image_shift),
        }
        for f in p.offsets
    ]
    sets = [
        {
            "signature": list(m.signature),
            "deltas": [list(d) for d in m.deltas],
            "points": iset.count(m.set),
            "set": m.set.to_json(),
        }
        for m in p.mars
    ]
    return offsets, sets


def _fd(fd: Optional[FDPartitionReport]) -> Optional[dict[str, Any]]:
    if fd is None:
        return None
    return {
        "box": fd.box,
        "families": [
            {
                "deps": list(fam.deps),
                "tiles": [list(t) for t in fam.tiles],
                "projections": [
                    {"dep": i, "w": [vector(w) for w in values]} for i, values in fam.projections
                ],
            }
            for fam in fd.families
        ],
    }


def _conjecture(c: Optional[ConditionReport]) -> Optional[dict[str, Any]]:
    if c is None:
        return None
    return {
        "passed": c.passed,
        "triples": [
            {
                "dep": t.dep,
                "source_hyperplane": t.source_hyperplane,
                "dest_hyperplane": t.dest_hyperplane,
                "dot": rational(t.dot),
                "m": None if t.multiplier is None else rational(t.multiplier),
                "status": t.status,
            }
            for t in c.triples
        ],
    }


def _oracle(a: Optional[Agreement]) -> Optional[dict[str, Any]]:
    if a is None:
        return None
    return {"agree": a.agree, "matched": a.matched, "total": a.total}


def analysis_to_dict(a: DestinationAnalysis) -> dict[str, Any]:
    offsets: list[dict] = []
    sets: list[dict] = []
    if a.partition is not None:
        offsets, sets = _partition(a.partition)
    refusal = None if a.refusal is None else {"kind": a.refusal[0], "message": a.refusal[1]}
    return {
        "destination": a.destination.name,
        "source": a.source.name,
        "classification": {
            "verdict": a.classification.verdict.value,
            "kernels": [k.to_lists() for k in a.classification.kernels],
        },
        "invariance": _invariance(a.invariance),
        "offsets": offsets,
        "mars": sets,
        "partition_ok": a.partition_ok,
        "refusal": refusal,
        "fd": _fd(a.fd),
        "conjecture": _conjecture(a.conjecture),
        "oracle": _oracle(a.oracle),
    }


def build_report(program_text: str, analyses: Sequence[DestinationAnalysis]) -> dict[str, Any]:
    report = {
        "schema": SCHEMA_VERSION,
        "program_digest": program_digest(program_text),
        "analyses": [analysis_to_dict(a) for a in analyses],
    }
    logger.info("보고서 생성: 분석 %d개", len(analyses))
    return report


def dumps(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_mars_sets(report: dict[str, Any], destination: str) -> list[tuple[tuple[int, ...], ISet]]:
    """저장된 보고서에서 대상 공간의 (시그니처, 집합) 목록을 읽는다."""
    if report.get("schema") != SCHEMA_VERSION:
        raise ProgramError("schema", f"지원하지 않는 보고서 schema: {report.get('schema')!r}")
    for entry in report.get("analyses", []):
        if entry.get("destination") == destination:
            return [(tuple(m["signature"]), ISet.from_json(m["set"])) for m in entry.get("mars", [])]
    raise ProgramError("analyses", f"보고서에 대상 공간 {destination!r}의 분석이 없다")
