import io
import json

import pytest

from clinch.cli import main
from clinch.core import dumps


@pytest.fixture()
def showcase_file(tmp_path):
    path = tmp_path / "showcase.json"
    path.write_text(dumps({"values": [9, 10, 11, 5.7], "budgets": [3, 2, 1, 0.5],
                           "supply": 1}))
    return str(path)


@pytest.fixture()
def pair_file(tmp_path):
    path = tmp_path / "pair.json"
    path.write_text(dumps({"values": [1, 2], "budgets": [3, 2], "supply": 1}))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_outputs_outcome_json(self, capsys, showcase_file):
        code, out, _ = run(capsys, "solve", "--input", showcase_file)
        assert code == 0
        doc = json.loads(out)
        assert abs(sum(doc["x"]) - 1.0) < 1e-9
        assert abs(doc["pi"][1] - 2.0) < 1e-9

    def test_byte_identical_reruns(self, capsys, showcase_file):
        _, first, _ = run(capsys, "solve", "--input", showcase_file)
        _, second, _ = run(capsys, "solve", "--input", showcase_file)
        assert first == second

    def test_output_round_trips_through_reader(self, capsys, showcase_file):
        _, out, _ = run(capsys, "solve", "--input", showcase_file)
        doc = json.loads(out)
        assert dumps({"x": doc["x"], "pi": doc["pi"]}) == out.strip()

    def test_missing_file_is_usage_error(self, capsys):
        code, _, err = run(capsys, "solve", "--input", "/no/such/file.json")
        assert code == 2 and "error:" in err

    def test_invalid_instance_is_usage_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"values": [1, -2], "budgets": [1, 1], "supply": 1}')
        code, _, err = run(capsys, "solve", "--input", str(bad))
        assert code == 2 and "negative" in err


class TestTrace:
    def test_json_lines_schema(self, capsys, showcase_file):
        code, out, _ = run(capsys, "trace", "--input", showcase_file)
        assert code == 0
        lines = [json.loads(line) for line in out.splitlines()]
        events, final = lines[:-1], lines[-1]
        assert [e["kind"] for e in events] == ["clinch_entry", "clinch_entry",
                                               "exit", "exit"]
        assert events[0]["price"] == 3.5
        first_state = events[0]["state_after"]
        assert set(first_state) == {"x", "B", "S", "A", "C"}
        assert first_state["C"] == [0]
        assert final["kind"] == "final"

    def test_table_format(self, capsys, showcase_file):
        code, out, _ = run(capsys, "trace", "--input", showcase_file,
                           "--format", "table")
        assert code == 0
        assert "clinch_entry" in out and "outcome" in out


class TestStream:
    def test_increments_from_stdin(self, capsys, pair_file, monkeypatch):
        feed = '{"supply": 0.5}\n{"supply": 0.5}\n'
        monkeypatch.setattr("sys.stdin", io.StringIO(feed))
        code, out, _ = run(capsys, "stream", "--input", pair_file)
        assert code == 0
        lines = [json.loads(line) for line in out.splitlines()]
        assert lines[0]["s_cum"] == 0.5
        assert lines[1]["s_cum"] == 1.0
        assert lines[1]["x"] == [0, 1]
        assert lines[1]["pi"] == [0, 1]
        total_dx = [a + b for a, b in zip(lines[0]["delta_x"], lines[1]["delta_x"])]
        assert total_dx == [0, 1]


class TestN2:
    def test_golden_row(self, capsys):
        code, out, _ = run(capsys, "n2", "--v", "1", "2", "--b", "3", "2",
                           "--s", "1")
        assert code == 0
        doc = json.loads(out)
        assert doc["x"] == [0, 1]
        assert doc["pi"] == [0, 1]
        assert doc["regime"] == "v2_high_vcg"

    def test_rates_flag(self, capsys):
        code, out, _ = run(capsys, "n2", "--v", "1", "2", "--b", "3", "2",
                           "--s", "0.4", "--rates")
        doc = json.loads(out)
        assert doc["dx_ds"] == [0, 1]
        assert doc["dpi_ds"] == [0, 1]


class TestVcg:
    def test_family_multiunit(self, capsys, pair_file):
        code, out, _ = run(capsys, "vcg", "--input", pair_file,
                           "--family", "multiunit")
        assert json.loads(out) == {"x": [0, 1], "pi": [0, 1]}

    def test_family_capped_requires_caps(self, capsys, pair_file):
        code, _, err = run(capsys, "vcg", "--input", pair_file,
                           "--family", "capped")
        assert code == 2

    def test_capped_demo(self, capsys, tmp_path):
        path = tmp_path / "two.json"
        path.write_text(dumps({"values": [1, 2], "budgets": [0, 0], "supply": 2}))
        code, out, _ = run(capsys, "vcg", "--input", str(path),
                           "--family", "capped", "--caps", "1", "1")
        assert json.loads(out) == {"x": [1, 1], "pi": [0, 0]}

    def test_explicit_table(self, capsys, tmp_path):
        inst = tmp_path / "inst.json"
        inst.write_text(dumps({"values": [3, 1], "budgets": [0, 0], "supply": 0}))
        table = tmp_path / "table.json"
        table.write_text(dumps({"0": 2, "1": 2, "0,1": 3}))
        code, out, _ = run(capsys, "vcg", "--input", str(inst),
                           "--table", str(table))
        assert json.loads(out) == {"x": [2, 1], "pi": [1, 0]}


class TestCheck:
    def test_passing_property_exits_zero(self, capsys):
        code, out, _ = run(capsys, "check", "--property", "ir",
                           "--corpus", "count=25")
        assert code == 0
        reports = json.loads(out)
        assert reports[0]["passed"] is True
        assert reports[0]["witness"] is None

    def test_forced_failure_exits_one(self, capsys):
        code, out, _ = run(capsys, "check", "--property", "oracle",
                           "--corpus", "count=4", "--tolerance", "1e-18")
        assert code == 1
        reports = json.loads(out)
        assert reports[0]["passed"] is False

    def test_seed_determinism(self, capsys):
        _, a, _ = run(capsys, "check", "--property", "budget",
                      "--corpus", "count=30", "--seed", "5")
        _, b, _ = run(capsys, "check", "--property", "budget",
                      "--corpus", "count=30", "--seed", "5")
        assert a == b

    def test_monotone_property_small_corpus(self, capsys):
        code, _, _ = run(capsys, "check", "--property", "monotone",
                         "--corpus", "count=8,pairs=2")
        assert code == 0
