import json
import os

import numpy as np
import pytest

from peqml import __version__
from peqml.cli import run
from peqml.config import ConfigError, apply_dd_flag, device_from, kernel_from, load_config, noise_from, qnn_from
from peqml.outputs import OUTPUT_ENV, OutputDir, resolve_output_dir, rows_to_csv, to_jsonable


def write(path, text):
    path.write_text(text)
    return path


# -- config -----------------------------------------------------------------------


def test_load_config_validation(tmp_path):
    assert load_config(None) == {}
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.yaml")
    with pytest.raises(ConfigError, match="unknown top-level"):
        load_config(write(tmp_path / "c.yaml", "qnnn: {}\n"))
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_config(write(tmp_path / "c.yaml", "a: [\n"))


def test_sections_resolve_with_overrides():
    raw = {
        "device": {"t1": 50000, "sigma_idle": 2e-4},
        "qnn": {"qubits": [2, 3], "runs": 1, "spsa": {"iterations": 5}, "device": {"t1": 60000}},
        "noise": {"readout": False},
    }
    cfg = qnn_from(raw, 7, None)
    assert cfg.qubits == (2, 3) and cfg.seed == 7 and cfg.spsa.iterations == 5
    assert cfg.spsa.target_step == 0.2
    assert device_from(raw, raw["qnn"]).t1[0] == 60000.0
    assert device_from(raw).sigma_idle == 2e-4
    noise = noise_from(raw, 7, None)
    assert noise.readout is False and noise.amplitude_damping is True
    assert noise_from(raw, 7, "off").any_gate_noise is False


def test_config_errors_name_the_key():
    with pytest.raises(ConfigError, match="qnn: unknown keys"):
        qnn_from({"qnn": {"qubitz": [2]}}, 0, None)
    with pytest.raises(ConfigError, match="qnn.runs"):
        qnn_from({"qnn": {"runs": "three"}}, 0, None)
    with pytest.raises(ConfigError, match="device"):
        device_from({"device": {"t3": 1}})
    with pytest.raises(ConfigError, match="noise"):
        noise_from({"noise": {"loud": True}}, 0, None)


def test_dd_flag_and_ablation_defaults():
    assert apply_dd_flag(("noiseless", "pe", "cnot"), "on") == ("noiseless", "pe+dd", "cnot+dd")
    assert apply_dd_flag(("pe+dd", "pe", "cnot"), "off") == ("pe", "cnot")
    cfg = kernel_from({}, 0, "off", ablation=True)
    assert cfg.variants == ("pe+dd", "pe", "cnot") and cfg.classes == (0, 7, 9)


# -- outputs ----------------------------------------------------------------------


def test_output_dir_resolution(monkeypatch, tmp_path):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert str(resolve_output_dir(None, None)) == "results"
    assert str(resolve_output_dir(None, "cfg")) == "cfg"
    monkeypatch.setenv(OUTPUT_ENV, "env")
    assert str(resolve_output_dir(None, "cfg")) == "env"
    assert str(resolve_output_dir("cli", "cfg")) == "cli"


def test_output_dir_confines_and_writes_atomically(tmp_path):
    out = OutputDir(tmp_path / "o")
    with pytest.raises(ValueError, match="outside"):
        out.write_text("../escape.txt", "x")
    out.write_text("a/b.txt", "hello")
    assert (tmp_path / "o/a/b.txt").read_text() == "hello"
    assert not [p for p in (tmp_path / "o/a").iterdir() if p.name.endswith(".tmp")]


def test_serialisers():
    assert rows_to_csv([{"a": 1, "b": 0.1}]) == "a,b\n1,0.1\n"
    assert to_jsonable({"x": np.float64("nan"), "y": np.arange(2)}) == {"x": None, "y": [0, 1]}


# -- CLI --------------------------------------------------------------------------


def test_transpile_default_sample(tmp_path, capsys):
    assert run(["transpile", "--mode", "pe", "--output-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "durations.csv").read_text().splitlines()
    assert lines[0] == "circuit_id,mode,n_qubits,total_duration_ns"
    d = {row.split(",")[1]: float(row.split(",")[3]) for row in lines[1:]}
    assert d["pe"] < 0.5 * d["cnot"]
    meta = json.loads((tmp_path / "transpile-metrics.json").read_text())
    assert meta["version"] == __version__ and meta["seed"] == 0 and meta["command"] == "peqml transpile"
    assert "CRPulse" in (tmp_path / "rzz_0.5.pe.txt").read_text()


def test_transpile_circuit_file(tmp_path):
    circ = write(tmp_path / "c.txt", "qubits 3\nH 0\nRZZ 0 1 0.3\nCNOT 1 2\n")
    out = tmp_path / "o"
    assert run(["transpile", str(circ), "--mode", "cnot", "--dd", "on", "--output-dir", str(out)]) == 0
    assert (out / "c.cnot.txt").is_file()


def test_cli_errors_leave_no_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(["kernel-classify", "--data", str(tmp_path / "none.csv"), "--output-dir", str(out)]) == 1
    assert "digits file not found" in capsys.readouterr().err
    assert run(["ingest", "--data", str(write(tmp_path / "bad.csv", "1,2,x\n")), "--output-dir", str(out)]) == 1
    assert "bad.csv:1" in capsys.readouterr().err
    assert run(["transpile", str(tmp_path / "missing.txt"), "--output-dir", str(out)]) == 1
    assert run(["qnn-train", "--config", str(write(tmp_path / "c.yaml", "qnn: {runz: 1}\n")),
                "--output-dir", str(out)]) == 1
    assert "unknown keys" in capsys.readouterr().err
    assert not out.exists()


def test_cli_usage_errors(capsys):
    assert run(["qnn-train", "--bogus"]) == 2
    assert run([]) == 2
    assert run(["transpile", "--mode", "xyz"]) == 2
    assert run(["--version"]) == 0


def test_env_var_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    monkeypatch.chdir(tmp_path)
    assert run(["transpile"]) == 0
    assert (tmp_path / "env" / "durations.csv").is_file()
    assert not (tmp_path / "results").exists()


def test_nibp_noise_off_cli(tmp_path):
    assert run(["nibp-sweep", "--noise", "off", "--qubits-max", "4", "--samples", "3",
                "--output-dir", str(tmp_path)]) == 0
    rows = [line.split(",") for line in (tmp_path / "nibp-sweep.csv").read_text().splitlines()[1:]]
    for n in ("2", "3", "4"):
        vals = [float(r[2]) for r in rows if r[0] == n]
        assert max(vals) - min(vals) < 1e-6


def test_ingest_cli(tmp_path):
    assert run(["ingest", "--per-class-train", "1", "--per-class-test", "1", "--components", "3",
                "--output-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "ingest-train.csv").read_text().splitlines()
    assert lines[0] == "label,f0,f1,f2" and len(lines) == 11


def test_config_file_drives_qnn(tmp_path):
    cfg = write(tmp_path / "c.yaml", (
        "seed: 3\n"
        "qnn:\n  qubits: [2]\n  runs: 1\n  variants: [noiseless, pe]\n  pool: 200\n"
        "  per_class: 10\n  restarts: 1\n  shots: 256\n  spsa: {iterations: 3, calibration_samples: 2}\n"
    ))
    assert run(["qnn-train", "--config", str(cfg), "--output-dir", str(tmp_path / "o")]) == 0
    meta = json.loads((tmp_path / "o/qnn-metrics.json").read_text())
    assert meta["seed"] == 3 and meta["config"]["qnn"]["spsa"]["iterations"] == 3
    trace = (tmp_path / "o/qnn-loss-trace.csv").read_text().splitlines()
    assert trace[0] == "run,n,variant,iteration,loss" and len(trace) == 1 + 2 * 3
    assert os.path.isfile(tmp_path / "o/qnn-results.csv")
