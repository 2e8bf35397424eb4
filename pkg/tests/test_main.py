import argparse
import json

import pytest
from loguru import logger

from main import WorkbenchApp, run_command
from src.config import SEED_ENV, CliConfig
from src.output_formatter import OutputFormatter
from tests.conftest import MODELS, SOURCES

YANKING = str(SOURCES / "yanking.cat")
TELEPORT = str(SOURCES / "teleport.cat")


def model(name):
    return str(MODELS / f"{name}.json")


class TestDeclarationCommands:
    def test_check(self):
        code, output = run_command(["check", YANKING])
        assert code == 0
        assert output.endswith("8 terms, 2 equations typecheck\n")
        assert "term bell : I → A* ⊗ A" in output

    def test_equal(self):
        assert run_command(["equal", YANKING, "yank", "id[A]"]) == (
            0, "true\n"
        )
        assert run_command(["equal", YANKING, "f", "g"]) == (1, "false\n")

    def test_equal_needs_same_type(self):
        code, output = run_command(["equal", YANKING, "bell", "bell_test"])
        assert code == 2
        assert output.startswith("error (TypeMismatch)")

    def test_parse_error_has_position(self, tmp_path):
        broken = tmp_path / "broken.cat"
        broken.write_text("object A")
        code, output = run_command(["check", str(broken)])
        assert code == 2
        assert output.startswith("error (ParseError): 1:9: ")

    def test_missing_file(self, tmp_path):
        code, output = run_command(["check", str(tmp_path / "none.cat")])
        assert code == 2
        assert "was not found" in output

    def test_keys_and_matches(self):
        code, output = run_command(["keys", YANKING, "yank"])
        assert code == 0 and output

        code, output = run_command(["matches", YANKING, "yank", "yanking"])
        assert code == 0
        assert output.rstrip().endswith("matches of 'yanking' in yank")

    def test_render_to_file(self, tmp_path):
        target = tmp_path / "yank.dot"
        code, output = run_command(
            ["render", YANKING, "yank", "-o", str(target)]
        )
        assert code == 0
        assert output == f"wrote {target}\n"
        assert target.read_text().startswith('digraph "yank"')


class TestModelCommands:
    def test_eval_needs_model(self):
        code, output = run_command(["eval", TELEPORT, "corrected"])
        assert code == 2
        assert output == "error (SourceError): This command needs --model\n"

    def test_eval_json(self):
        code, output = run_command(
            ["eval", TELEPORT, "corrected", "--model",
             model("qubit-teleport"), "--format", "json"]
        )
        data = json.loads(output)

        # Assertions
        assert code == 0
        assert data["schema"] == 1
        assert data["command"] == "eval"
        assert data["matrix"]["rows"] == 2
        assert data["loops"] == {}

    def test_eval_loop_scalar(self):
        code, output = run_command(
            ["eval", str(SOURCES / "scalars.cat"), "ts", "--model",
             model("semilattice")]
        )
        assert code == 0
        assert output.startswith("1×1 over semilattice")

    def test_verify(self):
        code, output = run_command(
            ["verify", "cloning", "--model", model("semilattice")]
        )
        assert code == 0
        assert output.endswith("checks passed\n")

        code, output = run_command(
            ["verify", "cloning", "--model", model("qubit-basiscopy"),
             "--budget", "20"]
        )
        assert code == 1
        assert "[FAIL] naturality" in output

    def test_verify_json(self):
        code, output = run_command(
            ["verify", "product", "--model", model("finset"),
             "--format", "json"]
        )
        data = json.loads(output)
        assert code == 0
        assert data["command"] == "verify"
        assert data["report"]["title"] == "product structure"

    def test_demo(self):
        code, output = run_command(["demo", "teleport"])
        assert code == 0
        assert "branch 3: ok (scalar 1)" in output
        assert "derived: " in output

    def test_undeclared_protocol_object(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(
            {"kind": "fdvec", "scalars": "rational", "objects": {"A": 2},
             "protocols": {"object": "Q", "teleport": [
                 {"branch": [1, 0, 0, 1], "correction": [1, 0, 0, 1]}]}}
        ))
        code, output = run_command(
            ["verify", "teleport", "--model", str(path)]
        )
        assert code == 2
        assert output.startswith("error (UnknownName)")


class TestUsage:
    def test_bad_arguments(self):
        assert run_command(["frobnicate"]) == (2, "")
        assert run_command(["verify", "braiding"])[0] == 2

    def test_invalid_option_values(self):
        code, output = run_command(
            ["verify", "cloning", "--model", model("rel"), "--budget", "0"]
        )
        assert code == 2
        assert output.startswith("error (usage)")

    def test_seed_from_environment(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "7")
        assert CliConfig.from_namespace(argparse.Namespace(seed=None)).seed == 7
        assert CliConfig.from_namespace(argparse.Namespace(seed=3)).seed == 3

    def test_base_config_is_overridden_by_flags(self, mocker):
        spy = mocker.spy(WorkbenchApp, "verify")
        base = CliConfig(budget=7, samples=5)
        run_command(["verify", "scalars", "--model", model("rel"),
                     "--samples", "9"], base)
        app = spy.call_args.args[0]
        assert app.config.budget == 7
        assert app.config.samples == 9

    def test_unexpected_errors(self, mocker):
        """Anything that is not a workbench error is reported as internal."""
        logger.info("Mocking dispatch to blow up")
        mocker.patch.object(
            WorkbenchApp, "dispatch", side_effect=RuntimeError("boom")
        )
        code, output = run_command(["check", YANKING])

        # Assertions
        assert code == 2
        assert output == "error (internal): boom\n"


class TestOutputFormatter:
    @pytest.fixture
    def formatter(self):
        return OutputFormatter("json")

    def test_error_document(self, formatter):
        data = json.loads(formatter.format_error("ParseError", "1:9: oops"))
        assert data == {
            "schema": 1,
            "command": "error",
            "passed": False,
            "error": "ParseError",
            "message": "1:9: oops",
        }

    def test_lines_document(self, formatter):
        data = json.loads(formatter.format_lines("check", True, ["a"]))
        assert data["lines"] == ["a"]
        assert OutputFormatter().format_lines("check", True, ["a"]) == "a\n"
