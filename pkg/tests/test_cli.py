import json
import math

import pytest

from qbroadcast.cli import main

GRID_ARGS = ["sweep", "--noise-types", "bit_flip,depolarizing", "--stop", "0.2", "--step", "0.1"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_resources_plain_and_json(capsys):
    assert run(capsys, "resources", "--m", "2", "--n", "10")[1] == "10\n"
    code, out, _ = run(capsys, "resources", "--m", "4", "--n", "1", "--json")
    assert json.loads(out) == {"m": 4, "n": 1, "bell_pairs": 2}


def test_resources_errors(capsys):
    code, _, err = run(capsys, "resources", "--m", "1", "--n", "2")
    assert code == 2 and "error" in err
    code, _, err = run(capsys, "resources", "--m", "2")
    assert code == 2 and "--n" in err


def test_sweep_is_byte_identical(capsys, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(GRID_ARGS + ["-o", str(a)]) == 0
    assert main(GRID_ARGS + ["-o", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "noise_type,mode,p,channel,fidelity"
    assert len(lines) == 1 + 2 * 3 * 2
    assert lines[1] == "bit_flip,per_gate,0,bell-pair,1"


def test_sweep_values(capsys):
    _, out, _ = run(capsys, "sweep", "--noise-types", "bit_flip", "--start", "0.25", "--stop", "0.25")
    rows = [line.split(",") for line in out.splitlines()[1:]]
    values = {r[3]: float(r[4]) for r in rows}
    assert values["bell-pair"] == pytest.approx(0.390625, abs=1e-12)
    assert values["cluster"] == pytest.approx(0.2197265625, abs=1e-12)


def test_sweep_rejects_bad_grid(capsys):
    code, _, err = run(capsys, "sweep", "--start", "0.6", "--stop", "0.5")
    assert code == 2


def test_simulate_report(capsys):
    code, out, _ = run(capsys, "simulate", "--protocol", "bell-rsp", "--theta", "0.3333333333333333", "--m", "2")
    report = json.loads(out)
    assert code == 0
    assert len(report["branches"]) == 4
    assert report["fidelity"] == {"receiver1": 1.0, "receiver2": 1.0}
    assert report["resources"]["bell_pairs"] == 2
    assert report["resources"]["classical_bits"] == {"receiver1": 1, "receiver2": 1}
    assert "elapsed_s" not in report


def test_simulate_is_deterministic(capsys):
    argv = ["simulate", "--protocol", "controlled", "--m", "2", "--seed", "11", "--shots", "500"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_timing_is_opt_in(capsys):
    _, out, _ = run(capsys, "simulate", "--timing")
    assert "elapsed_s" in json.loads(out)


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"protocol": "bell-teleport", "target": "general", "m": 3, "phi": 0.5}))
    _, out, _ = run(capsys, "simulate", "--config", str(cfg), "--m", "1")
    report = json.loads(out)
    assert report["protocol"] == "bell-teleport"
    assert report["config"]["m"] == 1
    assert report["resources"]["classical_bits"] == {"receiver1": 2}


def test_config_rejects_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"receivers": 3}))
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and "receivers" in err


def test_unsupported_target_is_reported(capsys):
    code, _, err = run(capsys, "simulate", "--protocol", "cluster", "--target", "equatorial")
    assert code == 2 and "real-polar" in err


@pytest.mark.parametrize("argv", [
    ["--protocol", "probabilistic", "--links", "0.8:0.6", "--theta", "0.25"],
    ["--protocol", "joint", "--theta", "0.25", "--phi", "0.3333333333333333"],
    ["--protocol", "phase-chain", "--phases", "0.3333333333333333,0.16666666666666666", "--theta", "0.25"],
    ["--protocol", "controlled", "--disclose", "--seed", "4"],
    ["--protocol", "multidirectional", "--parties", "3"],
    ["--protocol", "bell-rsp", "--noise", "depolarizing", "--p", "0.1", "--mode", "per_gate"],
])
def test_protocols_run_from_cli(capsys, argv):
    code, out, _ = run(capsys, "simulate", *argv)
    report = json.loads(out)
    assert code == 0
    assert sum(b["probability"] for b in report["branches"]) == pytest.approx(1, abs=1e-9)


SHOT_RUNS = {
    "cluster": ["--protocol", "cluster", "--theta", "0.25"],
    "cluster-fig3a": ["--protocol", "cluster-fig3a", "--target", "equatorial", "--phi", "0"],
    "bell-rsp": ["--protocol", "bell-rsp", "--target", "equatorial", "--phi", "0", "--m", "2"],
}


@pytest.mark.parametrize("protocol", sorted(SHOT_RUNS))
def test_shot_histogram(capsys, protocol):
    _, out, _ = run(capsys, "simulate", *SHOT_RUNS[protocol], "--shots", "--seed", "2024")
    report = json.loads(out)
    hist = report["histogram"]
    assert report["shots"] == sum(hist.values()) == 8192
    sigma = math.sqrt(8192 * 0.25 * 0.75)
    for label in ("00", "01", "10", "11"):
        assert abs(hist[label] - 2048) <= 5 * sigma
    exact = {b["outcome"]: b["probability"] for b in report["branches"]}
    tvd = 0.5 * sum(abs(hist[k] / 8192 - exact[k]) for k in exact)
    assert tvd < 0.02


def test_controlled_without_disclosure_reports_half(capsys):
    report = json.loads(run(capsys, "simulate", "--protocol", "controlled", "--m", "2", "--seed", "5")[1])
    assert report["fidelity"] == {"receiver1": 0.5, "receiver2": 0.5}
    assert report["success_probability"] == 0


def test_sweep_rows_are_complete_and_bounded(capsys):
    _, out, _ = run(capsys, "sweep", "--mode", "transmitted")
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert len(rows) == 4 * 11 * 2
    assert all(0 <= float(r[4]) <= 1 for r in rows)
    p0 = [float(r[4]) for r in rows if r[2] == "0"]
    assert p0 == [1.0] * 8


def test_degenerate_grid(capsys):
    _, out, _ = run(capsys, "sweep", "--noise-types", "phase_damping", "--start", "0.3", "--stop", "0.3")
    assert len(out.splitlines()) == 3


def test_export_qasm_to_file(tmp_path, capsys):
    path = tmp_path / "fig1a.qasm"
    assert main(["export-qasm", "fig1a", "-o", str(path)]) == 0
    assert path.read_text().startswith("OPENQASM 2.0;\n")


def test_links_accept_bare_a(capsys):
    a = json.loads(run(capsys, "simulate", "--protocol", "probabilistic", "--links", "0.8:0.6", "--theta", "0.3")[1])
    b = json.loads(run(capsys, "simulate", "--protocol", "probabilistic", "--links", "0.8", "--theta", "0.3")[1])
    assert a["success_probability"] == b["success_probability"] < 1
    code, _, err = run(capsys, "simulate", "--protocol", "probabilistic", "--links", "0.8:0.6:0.1")
    assert code == 2 and "must be" in err
