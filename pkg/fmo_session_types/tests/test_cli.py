"""
命令行测试：子命令输出与退出码
"""

import json

import pytest

from conftest import STREAM, TREE_C, corpus_path
from run_fmo import main


def invoke(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEq:

    def test_bisimilar(self, capsys):
        code, out, _ = invoke(capsys, "eq", "Skip;End", "End")
        assert code == 0
        assert out.splitlines()[0] == "Bisimilar"

    def test_not_bisimilar_prints_trace(self, capsys):
        code, out, _ = invoke(capsys, "eq", "End", "Skip")
        assert code == 1
        assert out.splitlines() == ["NotBisimilar", "trace: End"]

    def test_explain(self, capsys):
        code, out, _ = invoke(capsys, "eq", "?Int;End", "?Int;Skip", "--explain")
        assert code == 1
        assert "left: End" in out.splitlines()

    def test_unknown(self, capsys):
        code, out, _ = invoke(capsys, "eq", f"({TREE_C}) Int", f"({TREE_C}) Int ; Skip",
                              "--backend", "oracle", "--oracle-depth", "3")
        assert code == 2
        assert out.splitlines()[1].startswith("reason: oracle:")

    def test_norm_fuel_option(self, capsys):
        code, out, _ = invoke(capsys, "eq", "Skip ; Skip ; Skip ; End", "End", "--norm-fuel", "2")
        assert code == 2
        assert out.splitlines()[1] == "reason: norm:fuel"

    def test_json(self, capsys):
        code, out, _ = invoke(capsys, "eq", "Skip;End", "End", "--format", "json")
        document = json.loads(out)
        assert code == 0
        assert document["schema_version"] == 1
        assert document["verdict"] == "Bisimilar"
        assert document["evidence"].startswith("fsa:")

    def test_file_argument(self, capsys, tmp_path):
        source = tmp_path / "stream.type"
        source.write_text(f"({STREAM}) Int\n", encoding="utf-8")
        code, _, _ = invoke(capsys, "eq", f"@{source}", f"({STREAM}) Int ; Skip")
        assert code == 0

    def test_batch(self, capsys, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("Skip;End\tEnd\n\n?Int;End\t!Int;End\n", encoding="utf-8")
        code, out, _ = invoke(capsys, "eq", "--batch", str(pairs))
        lines = out.splitlines()
        assert code == 1
        assert lines[0] == "Bisimilar"
        assert lines[1].startswith("NotBisimilar\ttrace: ")


class TestTypeCommands:

    def test_kind(self, capsys):
        code, out, _ = invoke(capsys, "kind", TREE_C)
        assert code == 0
        assert out.strip() == "T=>S"

    def test_norm(self, capsys):
        code, out, _ = invoke(capsys, "norm", "Skip ; Dual (?Int)")
        assert code == 0
        assert out.strip() == "!Int"

    def test_grammar(self, capsys):
        code, out, _ = invoke(capsys, "grammar", TREE_C)
        assert code == 0
        assert out.splitlines()[0] == "start: X0"

    def test_lts(self, capsys):
        code, out, _ = invoke(capsys, "lts", "?Int ; End")
        assert code == 0
        assert out.splitlines()[0].startswith("[0] ")
        assert any("--?_1-->" in line for line in out.splitlines())

    def test_fog(self, capsys):
        code, out, _ = invoke(capsys, "fog", corpus_path("l3.fog"), "--depth", "6")
        assert code == 0
        assert out.splitlines()[-1].endswith("(agree)")


class TestPrograms:

    def test_check(self, capsys):
        code, out, _ = invoke(capsys, "check", corpus_path("fold.fmo"))
        assert code == 0
        assert any(line.startswith("flatten : ") and line.endswith("(axiom)") for line in out.splitlines())

    def test_run(self, capsys):
        code, out, _ = invoke(capsys, "run", corpus_path("fold_run.fmo"), "--seed", "1")
        assert code == 0
        assert out.startswith("Value: ")

    def test_run_json(self, capsys):
        code, out, _ = invoke(capsys, "run", corpus_path("fold_run.fmo"), "--format", "json")
        document = json.loads(out)
        assert code == 0
        assert document["outcome"] == "Value"
        assert document["seed"] == 0


class TestErrors:

    def test_parse_error(self, capsys):
        code, _, err = invoke(capsys, "kind", "?Int ;")
        assert code == 3
        assert "ParseError" in err

    def test_kind_error(self, capsys):
        code, _, err = invoke(capsys, "kind", "mu a:S. a")
        assert code == 3
        assert "KindError" in err

    def test_missing_types(self, capsys):
        code, _, _ = invoke(capsys, "eq")
        assert code == 3

    @pytest.mark.parametrize("argv", [["bogus"], ["eq", "End", "End", "--backend", "magic"]])
    def test_usage_error(self, capsys, argv):
        assert main(argv) == 3
