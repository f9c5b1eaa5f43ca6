import json

import pytest

from pattern_kb import __version__, cli
from pattern_kb.cli import EXIT_INPUT_ERROR, EXIT_NO_ALIGNMENT, EXIT_OK, EXIT_USAGE, main
from pattern_kb.emit import add_handler, remove_handler

from conftest import FIGURE1_QUERY, KB_DIR


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    for key in ("CONFIG", "BEAM_WIDTH", "MAX_ROWS", "DEFAULT_FORMAT", "KB_DIR", "WORKERS"):
        monkeypatch.delenv(f"PATTERN_KB_{key}", raising=False)
    monkeypatch.setenv("PATTERN_KB_CONFIG", str(tmp_path / "absent.yaml"))


@pytest.fixture
def events():
    captured = []
    add_handler(captured.append)
    yield captured
    remove_handler(captured.append)


def _kb(name):
    return str(KB_DIR / name)


def run(capsys, *args):
    code = main(["--quiet", *args])
    out, err = capsys.readouterr()
    return code, out, err


class TestExitCodes:
    def test_align_finds_alignments(self, capsys):
        code, out, _ = run(capsys, "align", "--kb", _kb("figure1.sp"), "--new", FIGURE1_QUERY)
        assert code == EXIT_OK
        assert out.startswith(f"query: {FIGURE1_QUERY}")
        assert "alignment 1: cd=" in out

    def test_no_alignment(self, capsys):
        code, out, _ = run(capsys, "align", "--kb", _kb("toy.sp"), "--new", "zzz")
        assert code == EXIT_NO_ALIGNMENT
        assert "no alignment (cd>0) found" in out

    def test_missing_pattern_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "align", "--kb", str(tmp_path / "nope.sp"), "--new", "a")
        assert code == EXIT_INPUT_ERROR
        assert "error:" in err

    def test_malformed_pattern_file(self, capsys, tmp_path):
        path = tmp_path / "broken.sp"
        path.write_text("ok: X a #X ;\nno terminator\n")
        code, out, err = run(capsys, "validate", "--kb", str(path))
        assert code == EXIT_INPUT_ERROR
        assert f"{path}:2:" in err
        assert out == ""

    @pytest.mark.parametrize(
        "args",
        [
            [],
            ["align", "--kb", "toy"],
            ["align", "--kb", "toy", "--new", "a", "--new-file", "q.txt"],
            ["align", "--kb", "toy", "--new", "a", "--beam", "0"],
            ["align", "--kb", "toy", "--new", "a", "--max-rows", "1"],
            ["align", "--kb", "toy", "--new", "   "],
            ["explode"],
        ],
    )
    def test_usage_errors(self, capsys, args):
        code, _, _ = run(capsys, *args)
        assert code == EXIT_USAGE

    def test_oracle_refuses_large_instances(self, capsys):
        code, _, err = run(capsys, "oracle", "--kb", _kb("figure1.sp"), "--new", "Jack")
        assert code == EXIT_INPUT_ERROR
        assert "longer than" in err

    def test_oracle_on_the_toy_kb(self, capsys):
        code, out, _ = run(capsys, "oracle", "--kb", "toy", "--new", "a b")
        assert code == EXIT_OK
        assert "oracle best cd=2.000000" in out


class TestCommands:
    def test_infer_json(self, capsys):
        code, out, _ = run(capsys, "infer", "--kb", "tweety", "--new", "Tweety penguin", "--json")
        assert code == EXIT_OK
        document = json.loads(out)
        assert document["command"] == "infer"
        symbols = [entry["symbol"] for entry in document["groups"][0]["inferences"]]
        assert "cannotfly" in symbols
        assert "canfly" not in symbols

    def test_recognize_reads_new_from_a_file(self, capsys, tmp_path):
        query = tmp_path / "query.txt"
        query.write_text(FIGURE1_QUERY + "\n")
        code, out, _ = run(capsys, "recognize", "--kb", "figure1", "--new-file", str(query), "--json")
        assert code == EXIT_OK
        labels = {entry["label"] for entry in json.loads(out)["recognition"]}
        assert "jack1" in labels

    def test_search_flags_reach_the_report(self, capsys):
        code, out, _ = run(
            capsys, "align", "--kb", "figure1", "--new", FIGURE1_QUERY, "--top", "2", "--beam", "50", "--json"
        )
        document = json.loads(out)
        assert code == EXIT_OK
        assert len(document["alignments"]) == 2
        assert document["parameters"]["beam_width"] == 50

    def test_stats_and_validate(self, capsys):
        code, out, _ = run(capsys, "stats", "--kb", "car")
        assert code == EXIT_OK
        assert out.startswith("F = 430")
        code, out, _ = run(capsys, "validate", "--kb", "car", "--json")
        assert code == EXIT_OK
        assert json.loads(out)["patterns"] == 4

    def test_json_default_format_from_config(self, capsys, tmp_path):
        config = tmp_path / "config.yaml"
        config.write_text("default_format: json\n")
        code, out, _ = run(capsys, "--config", str(config), "stats", "--kb", "toy")
        assert code == EXIT_OK
        assert json.loads(out)["command"] == "stats"


class TestIntrospection:
    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert __version__ in capsys.readouterr().out

    def test_print_defaults(self, capsys):
        assert main(["--print-defaults"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["beam_width"] == 200

    def test_print_config_schema(self, capsys):
        assert main(["--print-config-schema"]) == EXIT_OK
        schema = json.loads(capsys.readouterr().out)
        assert schema["properties"]["max_rows"]["minimum"] == 2

    def test_print_event_catalog(self, capsys):
        assert main(["--print-event-catalog"]) == EXIT_OK
        names = {e["event_type"] for e in json.loads(capsys.readouterr().out)["events"]}
        assert {"kb.loaded", "operation.started", "operation.completed", "error.handled"} <= names

    def test_validate_config(self, capsys, tmp_path):
        good = tmp_path / "good.yaml"
        good.write_text("beam_width: 64\n")
        assert main(["--config", str(good), "--validate-config"]) == EXIT_OK
        bad = tmp_path / "bad.yaml"
        bad.write_text("beam_width: zero\ncolour: blue\n")
        assert main(["--config", str(bad), "--validate-config"]) == EXIT_INPUT_ERROR
        err = capsys.readouterr().err
        assert "beam_width must be an integer" in err
        assert "Unknown config key: colour" in err

    @pytest.mark.parametrize("source", ["env", "file"])
    def test_unknown_default_format_is_an_input_error(self, capsys, monkeypatch, tmp_path, source):
        if source == "env":
            monkeypatch.setenv("PATTERN_KB_DEFAULT_FORMAT", "xml")
        else:
            path = tmp_path / "config.yaml"
            path.write_text("default_format: xml\n")
            monkeypatch.setenv("PATTERN_KB_CONFIG", str(path))
        code, out, err = run(capsys, "align", "--kb", "toy", "--new", "a b")
        assert code == EXIT_INPUT_ERROR
        assert out == ""
        assert "default_format must be one of" in err
        assert main(["--print-resolved"]) == EXIT_INPUT_ERROR

    def test_print_resolved_applies_the_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("PATTERN_KB_BEAM_WIDTH", "33")
        assert main(["--print-resolved"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["beam_width"] == 33


class TestEvents:
    def test_successful_run(self, capsys, events):
        run(capsys, "align", "--kb", "toy", "--new", "a b")
        types = [e["event_type"] for e in events]
        assert types[:4] == ["config.resolved", "kb.loaded", "operation.started", "operation.completed"]
        started, completed = events[2]["data"], events[3]["data"]
        assert started["operation_id"] == completed["operation_id"]
        assert completed["success"] is True
        assert completed["best_cd"] == "2.000000"

    def test_input_error_is_reported(self, capsys, events, tmp_path):
        run(capsys, "stats", "--kb", str(tmp_path / "missing.sp"))
        handled = [e for e in events if e["event_type"] == "error.handled"]
        assert handled and handled[0]["data"]["command"] == "stats"

    def test_shutdown_hook_is_registered_once(self, capsys, monkeypatch):
        registered = []
        monkeypatch.setattr(cli, "_shutdown_registered", False)
        monkeypatch.setattr(cli.atexit, "register", registered.append)
        run(capsys, "stats", "--kb", "toy")
        run(capsys, "stats", "--kb", "toy")
        assert len(registered) == 1
