"""mars CLI 단위 테스트: 종료 코드와 stdout/stderr 계약."""
import json

import pytest

from affine_mars import cli
from affine_mars.cli import EXIT_INPUT, EXIT_MISMATCH, EXIT_OK, EXIT_REFUSED, main
from affine_mars.errors import ProgramError
from tests.conftest import PROGRAMS_DIR


def _program(name):
    return str(PROGRAMS_DIR / f"{name}.json")


def _last_error(err):
    return json.loads(err.strip().splitlines()[-1])


class TestAnalyze:
    def test_single_dep_to_stdout(self, capsys):
        assert main(["analyze", _program("single_dep")]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["schema"] == 1
        assert len(doc["analyses"][0]["mars"]) == 3

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["analyze", _program("jacobi1d"), "--out", str(out)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text(encoding="utf-8"))["analyses"][0]["destination"] == "S"

    def test_multiple_null_spaces_refused(self, capsys):
        assert main(["analyze", _program("multi_null")]) == EXIT_REFUSED
        captured = capsys.readouterr()
        assert _last_error(captured.err)["error"] == "multiple-null-spaces"
        # 거부돼도 보고서는 쓴다
        assert json.loads(captured.out)["analyses"][0]["refusal"]["kind"] == "multiple-null-spaces"

    def test_fd_turns_refusal_into_report(self, capsys):
        assert main(["analyze", _program("multi_null"), "--fd"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["analyses"][0]["fd"]["families"]

    def test_family_blowup(self, capsys):
        assert main(["analyze", _program("jacobi1d"), "--max-families", "2"]) == EXIT_REFUSED
        assert _last_error(capsys.readouterr().err)["error"] == "family-blowup"

    def test_oracle_flag(self, capsys):
        assert main(["analyze", _program("single_dep"), "--oracle"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["analyses"][0]["oracle"]["agree"] is True

    def test_missing_file(self, tmp_path, capsys):
        assert main(["analyze", str(tmp_path / "nope.json")]) == EXIT_INPUT
        assert _last_error(capsys.readouterr().err)["error"] == "io"

    def test_bad_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        assert main(["analyze", str(bad)]) == EXIT_INPUT
        assert _last_error(capsys.readouterr().err)["error"] == "program"

    def test_unknown_destination(self, capsys):
        assert main(["analyze", _program("single_dep"), "--dest", "Z"]) == EXIT_INPUT
        assert _last_error(capsys.readouterr().err)["error"] == "program"


class TestVerify:
    def test_single_dep_agrees(self, capsys):
        assert main(["verify", _program("single_dep")]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("### A\n\n| 시그니처")
        assert "**agree: 3/3 groups**" in out

    def test_refused_program(self, capsys):
        assert main(["verify", _program("multi_null")]) == EXIT_REFUSED

    def test_tile_box_too_small(self, capsys):
        assert main(["verify", _program("jacobi1d"), "--tile-box", "0"]) == EXIT_INPUT
        assert _last_error(capsys.readouterr().err)["error"] == "box-too-small"

    def test_saved_report_agrees(self, tmp_path, capsys):
        saved = tmp_path / "report.json"
        assert main(["analyze", _program("single_dep"), "--out", str(saved)]) == EXIT_OK
        assert main(["verify", _program("single_dep"), "--report", str(saved)]) == EXIT_OK

    def test_corrupted_report_mismatch(self, tmp_path, capsys):
        saved = tmp_path / "report.json"
        assert main(["analyze", _program("single_dep"), "--out", str(saved)]) == EXIT_OK
        doc = json.loads(saved.read_text(encoding="utf-8"))
        sets = doc["analyses"][0]["mars"]
        sets[0]["set"], sets[1]["set"] = sets[1]["set"], sets[0]["set"]
        saved.write_text(json.dumps(doc), encoding="utf-8")
        capsys.readouterr()

        assert main(["verify", _program("single_dep"), "--report", str(saved)]) == EXIT_MISMATCH
        assert "**mismatch:" in capsys.readouterr().out


class TestRender:
    def test_writes_svg(self, tmp_path):
        out = tmp_path / "single.svg"
        assert main(["render", _program("single_dep"), "--svg", str(out)]) == EXIT_OK
        assert out.read_text(encoding="utf-8").startswith("<svg")

    def test_tiles_option(self, tmp_path):
        out = tmp_path / "jacobi.svg"
        assert main(["render", _program("jacobi1d"), "--svg", str(out), "--tiles", "0,0;1,0"]) == EXIT_OK
        assert out.read_text(encoding="utf-8").count('class="tile"') == 2

    def test_three_dimensional_rejected(self, tmp_path, capsys):
        assert main(["render", _program("matmul"), "--svg", str(tmp_path / "m.svg")]) == EXIT_INPUT
        assert _last_error(capsys.readouterr().err)["error"] == "render"

    def test_bad_tiles(self, tmp_path, capsys):
        args = ["render", _program("single_dep"), "--svg", str(tmp_path / "s.svg"), "--tiles", "a,b"]
        assert main(args) == EXIT_INPUT
        assert _last_error(capsys.readouterr().err)["error"] == "program"


class TestParser:
    def test_parse_tiles(self):
        assert cli._parse_tiles("0,0; 1,-1") == [(0, 0), (1, -1)]
        assert cli._parse_tiles(None) is None

    def test_parse_tiles_error(self):
        with pytest.raises(ProgramError, match="--tiles"):
            cli._parse_tiles("1;x")

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args([])

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out.startswith("mars ")
