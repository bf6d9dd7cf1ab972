import csv
import json
import os
import pathlib
import subprocess

import pytest

PMSN = os.environ.get("PMSN_BIN", "build/tools/pmsn")

TINY = """\
seed = 3
workers = 1

[model]
n = 3
hidden = [8]
readout_window = 5

[train]
epochs = {epochs}
batch_size = 16
lr_global = 0.01
lr_neuronal = 0.01
schedule = "constant"

[data]
task = "delayed_recall"
n_train = 64
n_test = 32
T = 30
cue_window = 5
n_classes = 2
"""


def run(*args, check=None):
    proc = subprocess.run([PMSN, *map(str, args)], capture_output=True, text=True)
    if check is not None:
        assert proc.returncode == check, proc.stderr
    return proc


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_simulate_compare_agrees(tmp_path):
    run("--out", tmp_path, "--seed", 5, "simulate", "--compare", check=0)
    report = json.loads((tmp_path / "compare.json").read_text())
    assert report["pass"] and report["spike_mismatches"] == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "simulate" and manifest["seed"] == 5
    assert {"git_describe", "start_time", "config", "version", "workers"} <= manifest.keys()


def test_simulate_reads_csv_input(tmp_path):
    src = tmp_path / "in.csv"
    src.write_text("a,b\n0.5,1.5\n2.0,-1.0\n3.0,0.0\n")
    run("--out", tmp_path / "o", "simulate", "--input", src, check=0)
    rows = read_csv(tmp_path / "o" / "traces.csv")
    assert len(rows) == 3 * 2
    assert {"batch", "t", "neuron", "input", "I_h", "v_s", "spike", "v_r"} <= rows[0].keys()


def test_impulse_has_one_column_per_compartment(tmp_path):
    run("--out", tmp_path, "simulate", "--impulse", check=0)
    rows = read_csv(tmp_path / "impulse.csv")
    assert len({r["compartment"] for r in rows}) == 5


def test_impulse_command_writes_histograms(tmp_path):
    run("--out", tmp_path, "impulse", "--neuron", 1, check=0)
    for name in ("impulse.csv", "spectrum.csv", "frequency_hist.csv", "damping_hist.csv"):
        assert (tmp_path / name).stat().st_size > 0


def test_empty_input_is_a_validation_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    proc = run("--out", tmp_path / "o", "simulate", "--input", empty, check=1)
    assert "no samples" in proc.stderr


def test_unknown_config_key_names_its_line(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("seed = 1\n[model]\ncompartmentz = 4\n")
    proc = run("--config", cfg, "--out", tmp_path / "o", "simulate", check=1)
    assert "compartmentz" in proc.stderr and "3" in proc.stderr


def test_gradcheck_passes(tmp_path):
    run("--out", tmp_path, "gradcheck", check=0)
    report = json.loads((tmp_path / "gradcheck.json").read_text())
    assert report["pass"] and report["max_rel_err"] <= report["tolerance"]


def test_bench_smoke(tmp_path):
    cfg = tmp_path / "bench.toml"
    cfg.write_text("[bench]\nT = [16, 32]\nbatch = [2]\nneurons = 4\nrepetitions = 5\n")
    run("--config", cfg, "--out", tmp_path / "o", "bench", check=0)
    rows = read_csv(tmp_path / "o" / "timing.csv")
    assert rows and "ratio" in rows[0]
    assert read_csv(tmp_path / "o" / "energy.csv")


def test_resume_continues_the_same_trajectory(tmp_path):
    def config(epochs):
        path = tmp_path / f"tiny{epochs}.toml"
        path.write_text(TINY.format(epochs=epochs))
        return path

    run("--config", config(2), "--out", tmp_path / "full", "train", check=0)
    run("--config", config(1), "--out", tmp_path / "half", "train", check=0)
    ckpt = tmp_path / "half" / "checkpoint.pmsn"
    run("--config", config(2), "--out", tmp_path / "resumed", "train", "--resume", ckpt, check=0)

    full = read_csv(tmp_path / "full" / "steps.csv")
    half = read_csv(tmp_path / "half" / "steps.csv")
    resumed = read_csv(tmp_path / "resumed" / "steps.csv")
    assert resumed, "resumed run took no steps"
    assert resumed[0]["step"] == full[len(half)]["step"]
    assert resumed == full[len(half):]


def test_missing_config_file_is_rejected(tmp_path):
    run("--config", tmp_path / "nope.toml", "simulate", check=1)
