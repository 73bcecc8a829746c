"""End-to-end CLI tests, run in-process through cli_main."""

import json
import shutil
import subprocess

import pytest

from kernel_hopfield.cli import cli_main
from kernel_hopfield.experiments import manifest_path


def run_cli(*argv):
    return cli_main(list(argv))


def read_lines(path):
    with open(path) as fh:
        return fh.read().splitlines()


@pytest.fixture()
def model_file(tmp_path):
    """A small trained model plus its pattern file."""
    pats = str(tmp_path / "pats.csv")
    model = str(tmp_path / "model.json")
    assert run_cli("gen-patterns", "--n", "24", "--p", "3", "--seed", "1", "--out", pats) == 0
    assert run_cli("train", "--patterns", pats, "--out", model) == 0
    return pats, model


def test_gen_patterns_writes_csv_sidecar_manifest(tmp_path):
    out = str(tmp_path / "p.csv")
    assert run_cli("gen-patterns", "--n", "8", "--p", "2", "--out", out) == 0
    lines = read_lines(out)
    assert len(lines) == 2 and len(lines[0].split(",")) == 8
    with open(str(tmp_path / "p.meta.json")) as fh:
        assert json.load(fh)["n"] == 8
    with open(manifest_path(out)) as fh:
        doc = json.load(fh)
    assert doc["experiment"] == "gen-patterns" and doc["master_seed"] == 0


def test_gen_patterns_deterministic_per_seed(tmp_path):
    p1, p2, p3 = (str(tmp_path / f"{k}.csv") for k in "abc")
    run_cli("gen-patterns", "--n", "16", "--p", "3", "--seed", "7", "--out", p1)
    run_cli("gen-patterns", "--n", "16", "--p", "3", "--seed", "7", "--out", p2)
    run_cli("gen-patterns", "--n", "16", "--p", "3", "--seed", "8", "--out", p3)
    assert read_lines(p1) == read_lines(p2)
    assert read_lines(p1) != read_lines(p3)


def test_train_produces_loadable_model(model_file):
    _, model = model_file
    with open(model) as fh:
        doc = json.load(fh)
    assert doc["format"] == "khop-model"
    assert doc["mode"] == "auto"
    assert doc["training_meta"]["iterations"] == 500


def test_snr_command(tmp_path, model_file):
    _, model = model_file
    out = str(tmp_path / "snr.csv")
    assert run_cli("snr", "--model", model, "--out", out) == 0
    lines = read_lines(out)
    assert lines[0] == "P,S,sigma,snr"
    assert len(lines) == 2
    assert int(lines[1].split(",")[0]) == 3


def test_recall_command_all_patterns(tmp_path, model_file):
    _, model = model_file
    out = str(tmp_path / "recall.csv")
    assert run_cli("recall", "--model", model, "--noise", "0.1", "--trials", "4", "--out", out) == 0
    lines = read_lines(out)
    assert lines[0] == "pattern_index,trial,success,final_overlap"
    assert len(lines) == 1 + 3 * 4
    # low load: every trial flagged success with overlap 1.0
    assert all(row.split(",")[2] == "1" for row in lines[1:])


def test_recall_single_pattern_subset(tmp_path, model_file):
    _, model = model_file
    out = str(tmp_path / "recall1.csv")
    assert run_cli("recall", "--model", model, "--pattern", "2", "--trials", "2", "--out", out) == 0
    lines = read_lines(out)
    assert len(lines) == 3
    assert all(row.split(",")[0] == "2" for row in lines[1:])


def test_sequence_command_emits_six_p_rows(tmp_path):
    pats = str(tmp_path / "p.csv")
    model = str(tmp_path / "m.json")
    out = str(tmp_path / "seq.csv")
    run_cli("gen-patterns", "--n", "20", "--p", "4", "--seed", "2", "--out", pats)
    run_cli("train", "--patterns", pats, "--mode", "sequence", "--out", model)
    assert run_cli("sequence", "--model", model, "--out", out) == 0
    lines = read_lines(out)
    assert lines[0] == "step,target_overlap"
    assert len(lines) == 1 + 6 * 4
    assert lines[1].split(",") == ["1", "1.0"]
    with open(manifest_path(out)) as fh:
        assert json.load(fh)["config"]["success"] is True


def test_morph_command_default_grid(tmp_path, model_file):
    _, model = model_file
    out = str(tmp_path / "morph.csv")
    assert run_cli("morph", "--model", model, "--a", "0", "--b", "1",
                   "--trials", "3", "--out", out) == 0
    lines = read_lines(out)
    assert lines[0].startswith("r,mean_overlap_a")
    assert len(lines) == 1 + 101
    first = lines[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 1.0


def test_potential_command(tmp_path, model_file):
    _, model = model_file
    out = str(tmp_path / "u.csv")
    assert run_cli("potential", "--model", model, "--a", "0", "--b", "1",
                   "--grid", "11", "--out", out) == 0
    lines = read_lines(out)
    assert lines[0] == "r,U"
    assert len(lines) == 12
    # stored patterns sit at negative pseudo-energy
    assert float(lines[1].split(",")[1]) < 0.0


def test_slowdown_command(tmp_path, model_file):
    _, model = model_file
    out = str(tmp_path / "slow.csv")
    assert run_cli("slowdown", "--model", model, "--a", "0", "--b", "1",
                   "--grid", "5", "--trials", "2", "--out", out) == 0
    lines = read_lines(out)
    assert lines[0] == "r,mean_steps,nonconverged_rate"
    assert len(lines) == 6
    assert float(lines[1].split(",")[1]) == 1.0


def test_capacity_sweep_with_snr_out(tmp_path):
    out = str(tmp_path / "cap.csv")
    snr_out = str(tmp_path / "snr.csv")
    assert run_cli("capacity-sweep", "--n", "24", "--grid", "2,4", "--trials", "2",
                   "--out", out, "--snr-out", snr_out) == 0
    cap = read_lines(out)
    assert cap[0] == "P,trials,successes,p_c_flag"
    assert cap[1].startswith("2,2,2,") and cap[2].startswith("4,2,2,")
    assert cap[2].endswith(",1")  # p_c = 4 flagged on its row
    snr = read_lines(snr_out)
    assert snr[0] == "P,S,sigma,snr" and len(snr) == 3
    with open(manifest_path(out)) as fh:
        doc = json.load(fh)
    assert doc["config"]["p_c"] == 4
    assert len(doc["derived_seeds"]) == 4


def test_capacity_sweep_reruns_byte_identical(tmp_path):
    o1, o2 = str(tmp_path / "c1.csv"), str(tmp_path / "c2.csv")
    for out in (o1, o2):
        assert run_cli("capacity-sweep", "--n", "20", "--grid", "2", "--trials", "2",
                       "--seed", "3", "--out", out) == 0
    assert read_lines(o1) == read_lines(o2)


def test_effdim_command(tmp_path, model_file):
    pats, _ = model_file
    out = str(tmp_path / "eff.csv")
    assert run_cli("effdim", "--patterns", pats, "--out", out) == 0
    lines = read_lines(out)
    assert lines[0] == "P,d_eff,cover_bound"
    p, d_eff, bound = lines[1].split(",")
    assert int(p) == 3
    assert float(bound) == pytest.approx(2 * float(d_eff))


def test_cover_command(tmp_path):
    out = str(tmp_path / "cover.csv")
    assert run_cli("cover", "--n", "20", "--grid", "2", "--trials", "1", "--out", out) == 0
    lines = read_lines(out)
    assert lines[0] == "P,d_eff,cover_bound,accuracy"
    assert lines[1].split(",")[0] == "2"
    assert float(lines[1].split(",")[3]) == 1.0


def test_binarize_command(tmp_path):
    emb = str(tmp_path / "emb.csv")
    out = str(tmp_path / "bin.csv")
    with open(emb, "w") as fh:
        fh.write("1.0,5.0\n3.0,1.0\n")
    assert run_cli("binarize", "--embeddings", emb, "--out", out) == 0
    assert read_lines(out) == ["-1,1", "1,-1"]


def test_unknown_flag_json_error(tmp_path, capsys):
    code = run_cli("gen-patterns", "--n", "4", "--p", "2", "--frobnicate",
                   "--out", str(tmp_path / "x.csv"))
    assert code == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    doc = json.loads(err)
    assert doc["error"] == "usage"


def test_runtime_failure_reports_json(tmp_path, capsys):
    out = str(tmp_path / "r.csv")
    code = run_cli("recall", "--model", str(tmp_path / "missing.json"), "--out", out)
    assert code == 2
    doc = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "error" in doc and "message" in doc


def test_bad_pattern_index_reports_json(tmp_path, model_file, capsys):
    _, model = model_file
    code = run_cli("recall", "--model", model, "--pattern", "99",
                   "--out", str(tmp_path / "r.csv"))
    assert code == 2
    doc = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert doc["error"] == "IndexError"


def test_version_flag():
    assert run_cli("--version") == 0


def test_threads_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("KHOP_THREADS", "2")
    out = str(tmp_path / "cap.csv")
    assert run_cli("capacity-sweep", "--n", "16", "--grid", "2", "--trials", "2",
                   "--out", out) == 0
    assert len(read_lines(out)) == 2


@pytest.mark.skipif(shutil.which("khop") is None, reason="console script not on PATH")
def test_console_script_smoke(tmp_path):
    out = str(tmp_path / "p.csv")
    proc = subprocess.run(
        ["khop", "gen-patterns", "--n", "4", "--p", "2", "--out", out],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert len(read_lines(out)) == 2
