import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikedist.cli import main
from spikedist.core import Bounds, NotSorted
from spikedist.io import ParseError, ValidationError, fmt, format_trains, parse_trains


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


@pytest.fixture
def trainfile(tmp_path):
    def make(text):
        p = tmp_path / "trains.txt"
        p.write_text(text)
        return str(p)
    return make


def test_parse_two_trains():
    trains = parse_trains("20 150 350 400 440\n100 270 300 370 480\n", Bounds(0, 500))
    assert [t.tolist() for t in trains] == [[20, 150, 350, 400, 440], [100, 270, 300, 370, 480]]


def test_parse_skips_comments_and_blanks():
    trains = parse_trains("# comment\n\n10 20\n")
    assert len(trains) == 1 and trains[0].tolist() == [10, 20]


def test_parse_reports_line_numbers():
    with pytest.raises(ValidationError) as err:
        parse_trains("# header\n30 20\n")
    assert err.value.line == 2 and err.value.kind == NotSorted.__name__
    with pytest.raises(ParseError) as err:
        parse_trains("1 2\n3 x\n")
    assert err.value.line == 2


def test_parse_unsorted_first_line():
    with pytest.raises(ValidationError) as err:
        parse_trains("30 20\n")
    assert err.value.line == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.floats(0, 1e4, allow_nan=False), min_size=1, max_size=10,
                         unique=True), min_size=1, max_size=4))
def test_serialize_round_trip(raw):
    trains = [np.unique(np.array([float(fmt(v)) for v in t])) for t in raw]
    again = parse_trains(format_trains(trains))
    for a, b in zip(trains, again):
        np.testing.assert_allclose(a, b, rtol=1e-12)


def test_fmt():
    assert fmt(15000.0) == "15000"
    assert fmt(0.4) == "0.4"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(-0.0) == "0"


def test_cli_modulus(trainfile):
    code, out = run(["distance", "--metric", "modulus", "--input", trainfile("50\n150\n"),
                     "--bounds", "0", "200"])
    assert code == 0 and out == "15000\n"


def test_cli_count(trainfile):
    code, out = run(["distance", "--metric", "count", "--input", trainfile("1 2 3 4 5\n1 2 3\n")])
    assert out == "0.4\n"


def test_cli_identical(trainfile):
    code, out = run(["distance", "--metric", "ph", "--input", trainfile("1 5 9\n1 5 9\n")])
    assert out == "0\n"


def test_cli_matrix_symmetric(trainfile):
    path = trainfile("20 150 350 400 440\n100 270 300 370 480\n10 20\n5\n")
    code, out = run(["distance", "--metric", "max", "--input", path, "--bounds", "0", "500",
                     "--pairs", "matrix"])
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["", "T0", "T1", "T2", "T3"]
    m = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert np.array_equal(m, m.T) and not np.any(np.diag(m))
    assert np.all(m[~np.eye(4, dtype=bool)] > 0)


def test_cli_kernel_flags(trainfile):
    path = trainfile("50\n150\n")
    _, out = run(["distance", "--metric", "locmax", "--kernel-l", "const", "--input", path,
                  "--bounds", "0", "200"])
    assert out == "20000\n"
    _, out = run(["distance", "--metric", "vp", "--q", "0.01", "--input", path])
    assert out == "1\n"


def test_cli_exit_codes(trainfile, capsys):
    assert run(["distance", "--input", trainfile("30 20\n")])[0] == 3
    assert "line 1" in capsys.readouterr().err
    assert run(["distance", "--input", trainfile("1 2\n3 4\n"), "--bounds", "0", "3"])[0] == 3
    assert run(["distance", "--input", trainfile("1 2\n")])[0] == 3
    assert run(["distance", "--input", trainfile("1 2\n3\n"), "--tau", "-1",
                "--metric", "vr"])[0] == 2
    assert run(["distance", "--input", "/nonexistent/file"])[0] == 2
    with pytest.raises(SystemExit) as exc:
        run(["distance", "--metric", "bogus", "--input", "x"])
    assert exc.value.code == 2


def test_cli_merge_duplicates(trainfile):
    path = trainfile("10 10 20\n10 20\n")
    assert run(["distance", "--input", path])[0] == 3
    assert run(["distance", "--input", path, "--merge-duplicates"]) == (0, "0\n")


def test_cli_burst_csv(tmp_path):
    code, out = run(["experiment", "burst", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "burst.csv")))
    assert [r["setup"] for r in rows] == list("ABCDEF")
    assert all(float(r["vp"]) == 1.0 for r in rows)


def test_cli_json_and_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 30, "metrics": ["vr", "vp", "modulus"]}))
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        assert run(["experiment", "correlation", "--config", str(cfg), "--out", str(d),
                    "--format", "json", "--seed", "5"])[0] == 0
        outs.append((d / "correlation.json").read_text())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["experiment"] == "correlation" and doc["seed"] == 5
    assert doc["tables"]["correlation"]["vr"]["vr"] == pytest.approx(1.0)


def test_cli_seed_from_environment(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 10, "metrics": ["vr"]}))
    texts = {}
    for label, env, flag in [("env", "9", []), ("flag", "1", ["--seed", "9"]), ("other", "2", [])]:
        monkeypatch.setenv("SPIKEDIST_SEED", env)
        d = tmp_path / label
        run(["experiment", "correlation", "--config", str(cfg), "--out", str(d)] + flag)
        texts[label] = (d / "correlation_samples.csv").read_text()
    assert texts["env"] == texts["flag"] != texts["other"]


def test_cli_experiment_outputs(tmp_path):
    cfg = tmp_path / "pr.json"
    cfg.write_text(json.dumps({"sweep": {"N": 2, "trials": 2}, "metrics": ["modulus", "vp"]}))
    assert run(["experiment", "precision-reliability", "--config", str(cfg),
                "--out", str(tmp_path)])[0] == 0
    grid = list(csv.DictReader(open(tmp_path / "pr_grid.csv")))
    assert len(grid) == 2 * 9 and "delta_rho_sign" in grid[0]
    assert (tmp_path / "pr_sections.csv").exists()

    cfg.write_text(json.dumps({"n": [5, 10], "repeats": 2, "metrics": ["modulus"]}))
    assert run(["experiment", "speed", "--config", str(cfg), "--out", str(tmp_path)])[0] == 0
    fit = list(csv.DictReader(open(tmp_path / "speed_fit.csv")))
    assert fit[0]["metric"] == "modulus" and math.isfinite(float(fit[0]["per_spike_ms"]))

    for name in ("insert", "shift"):
        assert run(["experiment", name, "--out", str(tmp_path), "--format", "json"])[0] == 0
        assert json.loads((tmp_path / f"{name}.json").read_text())["experiment"] == name


def test_cli_bad_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["experiment", "insert", "--config", str(cfg), "--out", str(tmp_path / "o")])[0] == 2
    cfg.write_text("[1, 2]")
    assert run(["experiment", "insert", "--config", str(cfg)])[0] == 2
    cfg.write_text(json.dumps({"sweep": {"N": 1}}))
    assert run(["experiment", "precision-reliability", "--config", str(cfg)])[0] == 2
    assert not (tmp_path / "o").exists()


def test_partial_outputs_removed(tmp_path, monkeypatch, capsys):
    from pathlib import Path
    orig_write = Path.write_text

    def write(self, text, *a, **k):
        if self.name == "burst_raw.csv":
            raise OSError("disk full")
        return orig_write(self, text, *a, **k)

    monkeypatch.setattr(Path, "write_text", write)
    assert run(["experiment", "burst", "--out", str(tmp_path)])[0] == 1
    assert "disk full" in capsys.readouterr().err
    assert not (tmp_path / "burst.csv").exists()


def test_cli_correlation_defaults(tmp_path):
    assert run(["experiment", "correlation", "--out", str(tmp_path)])[0] == 0
    rows = {r["metric"]: r for r in csv.DictReader(open(tmp_path / "correlation.csv"))}
    assert abs(float(rows["vp"]["corr_vr"]) - 0.78) <= 0.1
    assert float(rows["vr"]["corr_vr"]) == pytest.approx(1.0)
