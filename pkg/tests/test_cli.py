import json

import pytest
import yaml

from bnmoo.bn_model import load_network
from bnmoo.cli import main, resolve, build_parser


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


@pytest.fixture
def generated(tmp_path, capsys):
    out = tmp_path / "gen"
    code, _ = run(capsys, "generate", "--nodes", 6, "--density", 0.4, "--samples", 80,
                  "--noise", 0.1, "--seed", 5, "--out-dir", out)
    assert code == 0
    return out


def test_generate(generated):
    for name in ("truth.json", "truth.dot", "data.csv", "data_clean.csv"):
        assert (generated / name).exists()
    assert load_network(generated / "truth.json").dag.n == 6
    assert len((generated / "data.csv").read_text().splitlines()) == 81


def test_learn_nsga2(generated, tmp_path, capsys):
    out = tmp_path / "ns"
    code, io = run(capsys, "learn-nsga2", "--data", generated / "data.csv", "--pop-size", 10,
                   "--generations", 3, "--out-dir", out)
    assert code == 0
    front = json.loads((out / "front.json").read_text())
    assert front and all({"edges", "f1", "f2"} <= set(m) for m in front)
    assert len((out / "trace.csv").read_text().splitlines()) == 1 + 4
    assert json.loads(io.out)["evaluations"] == 40


def test_learn_hc_and_evaluate(generated, tmp_path, capsys):
    out = tmp_path / "hc"
    code, _ = run(capsys, "learn-hc", "--data", generated / "data.csv", "--score", "aic", "--out-dir", out)
    assert code == 0
    doc = json.loads((out / "result.json").read_text())
    assert doc["score_kind"] == "aic" and doc["restarts_used"] == 1
    assert (out / "result.dot").read_text().startswith("digraph")
    code, io = run(capsys, "evaluate", "--truth", generated / "truth.json", "--learned", out / "result.json",
                   "--data", generated / "data.csv")
    assert code == 0
    row = json.loads(io.out)[0]
    assert row["tp"] + row["fp"] + row["tn"] + row["fn"] == 30
    assert "f1" in row


def test_evaluate_front(generated, tmp_path, capsys):
    out = tmp_path / "ns"
    run(capsys, "learn-nsga2", "--data", generated / "data.csv", "--pop-size", 8, "--generations", 2,
        "--out-dir", out)
    code, io = run(capsys, "evaluate", "--truth", generated / "truth.json", "--learned", out / "front.json",
                   "--undirected")
    assert code == 0
    rows = json.loads(io.out)
    assert len(rows) == len(json.loads((out / "front.json").read_text()))
    assert all(r["tp"] + r["fp"] + r["tn"] + r["fn"] == 15 for r in rows)


def test_experiment(tmp_path, capsys):
    out = tmp_path / "exp"
    code, io = run(capsys, "experiment", "--nodes", 5, "--density", 0.2, 0.5, "--samples", 30,
                   "--noise", 0.0, "--pop-size", 6, "--generations", 2, "--reps", 2, "--out-dir", out)
    assert code == 0
    assert json.loads(io.out)["scenarios"] == 2
    assert len(list((out / "reports").glob("*.json"))) == 2
    assert len((out / "metrics.csv").read_text().splitlines()) == 1 + 28


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(yaml.safe_dump({"pop-size": 12, "generations": 7, "density": [0.3, 0.6]}))
    args = build_parser().parse_args(["experiment", "--config", str(cfg), "--generations", "9"])
    opts = resolve(args)
    assert opts["pop_size"] == 12
    assert opts["generations"] == 9
    assert opts["density"] == [0.3, 0.6]
    assert opts["samples"] == [50]


def test_json_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"reps": 3, "noise": 0.1}))
    opts = resolve(build_parser().parse_args(["experiment", "--config", str(cfg)]))
    assert opts["reps"] == 3 and opts["noise"] == [0.1]


def test_full_grid_flag():
    opts = resolve(build_parser().parse_args(["experiment", "--full-grid", "--reps", "2"]))
    assert len(opts["density"]) * len(opts["samples"]) * len(opts["noise"]) == 27
    assert opts["reps"] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["experiment", "--density"],
        ["experiment", "--score", "bdeu"],
        ["experiment", "--pop-size", "5", "--reps", "1"],
        ["experiment", "--noise", "1.5"],
        ["experiment", "--threads", "0"],
        ["generate", "--density", "0.2", "0.4"],
        ["frobnicate"],
    ],
)
def test_configuration_errors_exit_1(argv, tmp_path, capsys):
    with_out = argv + (["--out-dir", str(tmp_path)] if argv[0] in ("experiment", "generate") and len(argv) > 1 else [])
    try:
        code = main(with_out)
    except SystemExit as exc:
        code = exc.code
    assert code == 1


def test_unknown_config_key_exit_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"populaton": 3}))
    assert main(["experiment", "--config", str(cfg)]) == 1


def test_runtime_failure_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("V1,V2\n0,x\n")
    assert main(["learn-hc", "--data", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert main(["learn-hc", "--data", str(tmp_path / "missing.csv")]) == 2
