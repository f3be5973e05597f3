"""mars 명령행 도구.

사용법:
  mars analyze PROGRAM.json [--dest A] [--fd] [--oracle] [--out report.json]
  mars verify  PROGRAM.json [--dest A] [--tile-box 3] [--data-box 20] [--report report.json]
  mars render  PROGRAM.json --svg out.svg [--dest A] [--tiles "0,0;1,0"]

종료 코드: 0 성공, 1 입력 오류, 2 분석 거부/판정 불가, 3 오라클 불일치.
오류는 stderr에 {"error": kind, "message": ...} JSON 한 줄로 쓴다.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from affine_mars import __version__, config
from affine_mars.errors import MarsError, ProgramError, RefusalError, UndecidedError
from affine_mars.model import load_program
from affine_mars.tools import report as report_mod
from affine_mars.tools.orchestrator import AnalyzeOptions, DestinationAnalysis, analyze_program
from affine_mars.tools.render import render_svg
from affine_mars.tools.verify import compare, match_table, oracle_grouping

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_REFUSED = 2
EXIT_MISMATCH = 3


def _setup_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}, ensure_ascii=False), file=sys.stderr)
    return code


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _parse_tiles(raw: Optional[str]) -> Optional[list[tuple[int, ...]]]:
    if not raw:
        return None
    try:
        return [tuple(int(v) for v in part.split(",")) for part in raw.split(";") if part.strip()]
    except ValueError:
        raise ProgramError("--tiles", f"'0,0;1,0' 형식이 필요하다: {raw!r}") from None


def _refused(analyses: Sequence[DestinationAnalysis]) -> Optional[DestinationAnalysis]:
    return next((a for a in analyses if a.refused), None)


# ─── 서브커맨드 ───────────────────────────────────────────────────────────────

def _cmd_analyze(args: argparse.Namespace) -> int:
    text = _read(args.program)
    program = load_program(text)
    options = AnalyzeOptions(
        exclude_self=args.exclude_self,
        max_families=args.max_families,
        fd=args.fd,
        fd_box=args.fd_box,
        oracle=args.oracle,
        tile_box=args.tile_box,
        data_box=args.data_box,
    )
    analyses = analyze_program(program, args.dest, options)
    out = report_mod.dumps(report_mod.build_report(text, analyses))
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
        logger.info("보고서 저장: %s", args.out)
    else:
        sys.stdout.write(out)

    refused = _refused(analyses)
    if refused is not None and not args.fd:
        kind, message = refused.refusal
        return _error(kind, message, EXIT_REFUSED)
    if any(a.oracle is not None and not a.oracle.agree for a in analyses):
        return EXIT_MISMATCH
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    program = load_program(_read(args.program))
    options = AnalyzeOptions(exclude_self=args.exclude_self, max_families=args.max_families)
    analyses = analyze_program(program, args.dest, options)
    refused = _refused(analyses)
    if refused is not None:
        kind, message = refused.refusal
        return _error(kind, message, EXIT_REFUSED)

    saved = json.loads(_read(args.report)) if args.report else None
    agree = True
    tables = []
    for a in analyses:
        grouping = oracle_grouping(program, a.partition, args.tile_box, args.data_box, args.exclude_self)
        sets = report_mod.load_mars_sets(saved, a.destination.name) if saved is not None else None
        agreement = compare(a.partition, grouping, sets=sets, tile_box=args.tile_box)
        agree = agree and agreement.agree
        tables.append(f"### {a.destination.name}\n\n{match_table(agreement)}")
    print("\n\n".join(tables))
    return EXIT_OK if agree else EXIT_MISMATCH


def _cmd_render(args: argparse.Namespace) -> int:
    program = load_program(_read(args.program))
    tiles = _parse_tiles(args.tiles)
    dest = args.dest or (program.destinations()[0].name if program.destinations() else None)
    analyses = analyze_program(program, dest, AnalyzeOptions(exclude_self=args.exclude_self))
    analysis = analyses[0]
    if analysis.refused:
        kind, message = analysis.refusal
        return _error(kind, message, EXIT_REFUSED)
    svg = render_svg(analysis.partition, tiles)
    Path(args.svg).write_text(svg, encoding="utf-8")
    logger.info("SVG 저장: %s", args.svg)
    return EXIT_OK


# ─── 파서 ─────────────────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mars",
        description="아핀 의존성과 평행사변형 타일링의 MARS 분할 분석기",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
예시:
  mars analyze affine_mars/programs/single_dep.json
  mars analyze affine_mars/programs/multi_null.json --fd
  mars verify  affine_mars/programs/jacobi1d.json --exclude-self
  mars render  affine_mars/programs/single_dep.json --svg single_dep.svg
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("program", help="프로그램 JSON 파일")
        p.add_argument("--dest", help="분석할 대상 공간 이름 (기본: 모든 대상 공간)")
        p.add_argument("--exclude-self", action="store_true", help="대상 공간의 T(0) 점을 제외 (flow-in)")
        p.add_argument("--max-families", type=int, help="오프셋 패밀리 상한 (기본 MARS_MAX_FAMILIES)")
        p.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG")

    p_analyze = sub.add_parser("analyze", help="MARS 분할을 계산해 JSON 보고서 출력")
    common(p_analyze)
    p_analyze.add_argument("--fd", action="store_true", help="다중 null space일 때 F_D 진단 포함")
    p_analyze.add_argument("--fd-box", type=int, help="F_D 타일 박스 반경 (기본 MARS_FD_BOX)")
    p_analyze.add_argument("--oracle", action="store_true", help="브루트포스 오라클과 대조")
    p_analyze.add_argument("--tile-box", type=int, help="오라클 타일 박스 반경")
    p_analyze.add_argument("--data-box", type=int, help="오라클 데이터 박스 반경")
    p_analyze.add_argument("--out", help="보고서 파일 (기본: stdout)")
    p_analyze.set_defaults(handler=_cmd_analyze)

    p_verify = sub.add_parser("verify", help="오라클과 대조해 마크다운 일치 표 출력")
    common(p_verify)
    p_verify.add_argument("--tile-box", type=int, help="오라클 타일 박스 반경")
    p_verify.add_argument("--data-box", type=int, help="오라클 데이터 박스 반경")
    p_verify.add_argument("--report", help="저장된 analyze 보고서를 대조 대상으로 사용")
    p_verify.set_defaults(handler=_cmd_verify)

    p_render = sub.add_parser("render", help="2차원 MARS 분할 SVG")
    common(p_render)
    p_render.add_argument("--svg", required=True, help="출력 SVG 파일")
    p_render.add_argument("--tiles", help="테두리를 그릴 타일 좌표 (예: '0,0;1,0')")
    p_render.set_defaults(handler=_cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        return args.handler(args)
    except (RefusalError, UndecidedError) as e:
        return _error(e.kind, str(e), EXIT_REFUSED)
    except MarsError as e:
        return _error(e.kind, str(e), EXIT_INPUT)
    except OSError as e:
        return _error("io", str(e), EXIT_INPUT)
    except json.JSONDecodeError as e:
        return _error("program", f"JSON 파싱 실패: {e}", EXIT_INPUT)
