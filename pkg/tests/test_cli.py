import csv
import json
import subprocess
import sys

import pytest

from qwduet.cli import main, read_config
from qwduet.experiment import (
    RECORD_COLUMNS,
    ConfigError,
    CorrelationRecord,
    ExperimentConfig,
    export_records,
    load_records_json,
    run_experiment,
)


def read_csv(path):
    lines = [line for line in path.read_text().splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))


def test_joint_panels_at_final_step(tmp_path):
    out = tmp_path / "fig.json"
    assert main(["simulate", "--steps", "6", "--tau", "0,0.5,0.8,1", "--observables", "joint",
                 "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [(d["t"], d["tau"]) for d in doc["joint"]] == [(6, 0.0), (6, 0.5), (6, 0.8), (6, 1.0)]
    for d in doc["joint"]:
        xy = [tuple(e[:2]) for e in d["entries"]]
        assert xy == sorted(xy) and len(xy) == 49
        assert sum(e[2] for e in d["entries"]) == pytest.approx(1.0, abs=1e-12)


def test_csv_joint_side_file(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["simulate", "--steps", "3", "--tau", "0.5", "--observables", "joint,mi",
                 "--out", str(out)]) == 0
    rows = read_csv(tmp_path / "run.joint.csv")
    assert len(rows) == 16 and set(rows[0]) == {"t", "tau", "x", "y", "probability"}


def test_tau_zero_columns_vanish(tmp_path):
    out = tmp_path / "zero.csv"
    assert main(["simulate", "--steps", "10", "--tau", "0", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 10
    for row in rows:
        for col in ("mi_bits", "qmi_bits", "mid_bits"):
            assert abs(float(row[col])) <= 1e-9


def test_csv_layout_and_consistency(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["simulate", "--steps", "4", "--tau", "0.2,0.5,1", "--out", str(out)]) == 0
    text = out.read_text()
    header = next(line for line in text.splitlines() if not line.startswith("#"))
    assert header == ",".join(RECORD_COLUMNS)
    rows = read_csv(out)
    assert len(rows) == 4 * 3
    assert [(int(r["t"]), float(r["tau"])) for r in rows] == [(t, tau) for t in range(1, 5) for tau in (0.2, 0.5, 1.0)]
    for r in rows:
        mid = float(r["mid_bits"])
        assert mid == pytest.approx(float(r["qmi_bits"]) - float(r["classical_mi_of_dephased_bits"]), abs=1e-9)


def test_degeneracy_warnings_are_reported(tmp_path):
    out_csv, out_json = tmp_path / "w.csv", tmp_path / "w.json"
    assert main(["simulate", "--steps", "2", "--tau", "0.5", "--out", str(out_csv)]) == 0
    assert out_csv.read_text().startswith("# ")
    assert main(["simulate", "--steps", "2", "--tau", "0.5", "--format", "json", "--out", str(out_json)]) == 0
    meta = json.loads(out_json.read_text())["meta"]
    assert meta["warnings"] and meta["config"]["steps"] == 2 and "version" in meta


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_reruns_are_byte_identical(tmp_path, fmt):
    paths = [tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"]
    for p in paths:
        assert main(["simulate", "--steps", "5", "--tau", "0.3,0.7", "--observables", "moments,mi,qmi,mid,joint",
                     "--format", fmt, "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_parallel_matches_serial():
    base = dict(steps=4, tau_grid=(0.0, 0.5, 1.0))
    serial = run_experiment(ExperimentConfig(**base))
    parallel = run_experiment(ExperimentConfig(**base, jobs=2))
    assert serial.records == parallel.records


def test_backend_choice_is_irrelevant():
    a = run_experiment(ExperimentConfig(steps=5, tau_grid=(0.4,), backend="numpy")).records
    b = run_experiment(ExperimentConfig(steps=5, tau_grid=(0.4,))).records
    for ra, rb in zip(a, b):
        assert ra.qmi_bits == pytest.approx(rb.qmi_bits, abs=1e-12)


def test_empty_records_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    export_records([], "csv", out)
    assert out.read_text() == ",".join(RECORD_COLUMNS) + "\n"


def test_json_round_trip_bit_identical(tmp_path):
    rec = CorrelationRecord(3, 0.1, 0.1 + 0.2, 1 / 3, 2.0**-40, 5e-324, -0.0, 1e300, 7.123456789012345, None)
    out = tmp_path / "r.json"
    export_records([rec], "json", out, meta={"note": "x"})
    back = load_records_json(out)
    assert back == [rec]
    assert json.loads(out.read_text())["meta"]["version"]


def test_json_records_match_csv(tmp_path):
    j, c = tmp_path / "r.json", tmp_path / "r.csv"
    argv = ["simulate", "--steps", "3", "--tau", "0.5,1"]
    assert main(argv + ["--format", "json", "--out", str(j)]) == 0
    assert main(argv + ["--out", str(c)]) == 0
    recs = json.loads(j.read_text())["records"]
    rows = read_csv(c)
    for r, row in zip(recs, rows):
        assert float(row["qmi_bits"]) == r["qmi_bits"]


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "cfg.csv"
    cfg.write_text(f"# sweep\nsteps = 5\ntau = 0, 1\nout = {out}\nobservables = mi\n")
    assert read_config(cfg)["tau"] == [0.0, 1.0]
    assert main(["simulate", "--config", str(cfg), "--steps", "2"]) == 0
    rows = read_csv(out)
    assert len(rows) == 4
    assert rows[0]["qmi_bits"] == "" and rows[0]["mi_bits"] != ""


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("stepz = 3\n")
    with pytest.raises(ConfigError):
        read_config(cfg)
    assert main(["simulate", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "stepz" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--steps", "3", "--tau", "1.5"],
        ["simulate", "--steps", "3"],
        ["momentum", "--steps", "3", "--tau", "0.5", "--quadrature", "5"],
        ["classical", "--steps", "3", "--swap-prob", "2"],
    ],
)
def test_invalid_settings_exit_2(argv, capsys):
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("qwduet: error:") and err.count("\n") == 1


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--steps", "x"])
    assert exc.value.code == 2
    assert capsys.readouterr().err.count("\n") == 1


def test_unwritable_output_exits_1(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    assert main(["simulate", "--steps", "2", "--tau", "0", "--out", str(target)]) == 1
    err = capsys.readouterr().err
    assert str(target) in err and err.count("\n") == 1


def test_momentum_command(tmp_path):
    out = tmp_path / "m.json"
    report = tmp_path / "report.json"
    assert main(["momentum", "--steps", "3", "--tau", "0.5", "--quadrature", "20", "--format", "json",
                 "--out", str(out), "--transfer-report", str(report), "--samples", "5"]) == 0
    doc = json.loads(out.read_text())
    assert [r["t"] for r in doc["records"]] == [1, 2, 3]
    assert doc["asymptotics"][0]["grid"] == 20
    rep = json.loads(report.read_text())
    assert rep["samples"] == 5 and "mismatches" in rep


def test_classical_command(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["classical", "--steps", "4", "--swap-prob", "0,1", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 8
    assert all(float(r["var1"]) == pytest.approx(int(r["t"]), abs=1e-12) for r in rows)


def test_console_entry_point_stdout():
    proc = subprocess.run(
        [sys.executable, "-m", "qwduet.cli", "simulate", "--steps", "2", "--tau", "0", "--observables", "mi"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.splitlines()[0] == ",".join(RECORD_COLUMNS)
