import json

import numpy as np
import pytest

from corrnet.cli import main
from corrnet.dataset import load_dataset
from corrnet.dynamics import load_series
from corrnet.ingest import write_csv_matrix

from test_pipeline import tiny_config


def test_single_stage_chain(tmp_path, capsys):
    d = tmp_path
    assert main(["gen-graph", "--nodes", "8", "--mean-degree", "3", "--seed", "4", "--out", str(d / "g.txt")]) == 0
    for k, lam in enumerate(["0.02", "0.05", "0.08"]):
        assert main(["simulate", "--graph", str(d / "g.txt"), "--coupling", lam, "--init-seed", str(k),
                     "--length", "120", "--stride", "10", "--transient", "10",
                     "--out", str(d / f"s{k}.cnts"), "--corr-out", str(d / f"r{k}.cncm")]) == 0
    assert load_series(d / "s0.cnts").shape == (8, 120)
    series = [str(d / f"s{k}.cnts") for k in range(3)]
    graphs = [str(d / "g.txt")] * 3
    assert main(["build-dataset", "--series", *series[:2], "--targets", str(d / "r0.cncm"),
                 str(d / "r1.cncm"), "--graphs", *graphs[:2], "--n", "3", "--w", "20", "--skip", "10",
                 "--out", str(d / "train.cnds")]) == 0
    assert main(["build-dataset", "--series", series[2], "--graphs", graphs[2], "--ids", "2",
                 "--n", "3", "--w", "20", "--skip", "10", "--out", str(d / "test.cnds")]) == 0
    ds = load_dataset(d / "train.cnds")
    assert len(ds) == 2 * 11 and ds.spec.mode == "HD"
    assert main(["train", "--dataset", str(d / "train.cnds"), "--hidden", "8", "--epochs", "3",
                 "--out", str(d / "m.cnnn"), "--history", str(d / "h.csv")]) == 0
    assert main(["predict", "--model", str(d / "m.cnnn"), "--dataset", str(d / "test.cnds"),
                 "--out", str(d / "p.npy")]) == 0
    assert np.load(d / "p.npy").shape == (11, 28)
    assert main(["evaluate", "--predictions", str(d / "p.npy"), "--dataset", str(d / "test.cnds"),
                 "--train-dataset", str(d / "train.cnds"), "--out", str(d / "metrics.json")]) == 0
    metrics = json.loads((d / "metrics.json").read_text())
    assert metrics["avg_mse"] >= 0 and metrics["windows"] == 11 and "baseline_mse" in metrics
    assert main(["embed", "--model", str(d / "m.cnnn"), "--dataset", str(d / "train.cnds"),
                 "--neighbors", "5", "--epochs", "20", "--out", str(d / "emb")]) == 0
    assert (d / "emb" / "embedding.csv").exists() and (d / "emb" / "embedding.svg").exists()
    assert "own_nearest_fraction" in capsys.readouterr().out


def test_config_commands(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(tiny_config().to_json())
    assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "manifest.json").exists()
    assert main(["verify", str(tmp_path / "run")]) == 0
    (tmp_path / "run" / "results.csv").write_text("tampered\n")
    assert main(["verify", str(tmp_path / "run")]) == 1
    assert main(["sweep", "--config", str(cfg_path), "--sweep-n", "1,2", "--retrain-seeds", "1",
                 "--out", str(tmp_path / "sweep")]) == 0
    assert (tmp_path / "sweep" / "results.csv").read_text().count("\n") == 3
    assert (tmp_path / "sweep" / "sweep.svg").exists()
    assert main(["ablate", "--config", str(cfg_path), "--fractions", "1.0,0.5", "--seeds", "1",
                 "--out", str(tmp_path / "abl")]) == 0
    assert main(["gen-graph", "--config", str(cfg_path), "--out", str(tmp_path / "graphs")]) == 0
    assert len(list((tmp_path / "graphs").glob("*.txt"))) == 3


def test_ingest_csv(tmp_path):
    x = np.random.default_rng(0).normal(size=(4, 30))
    write_csv_matrix(x, tmp_path / "subj.csv")
    assert main(["ingest-csv", str(tmp_path / "subj.csv"), "--method", "SPEARMAN",
                 "--out", str(tmp_path / "out")]) == 0
    assert load_series(tmp_path / "out" / "subj.cnts").tobytes() == x.tobytes()
    assert (tmp_path / "out" / "subj.cncm").exists()


def test_errors_give_nonzero_exit(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("1,2\n3\n")
    assert main(["ingest-csv", str(tmp_path / "bad.csv"), "--out", str(tmp_path)]) == 3
    assert "ragged row 2" in capsys.readouterr().err
    assert main(["gen-graph", "--out", str(tmp_path / "g.txt")]) == 3
    (tmp_path / "junk.cnds").write_bytes(b"nope")
    assert main(["predict", "--model", str(tmp_path / "junk.cnds"), "--dataset",
                 str(tmp_path / "junk.cnds"), "--out", str(tmp_path / "p.npy")]) == 3
    with pytest.raises(SystemExit) as info:
        main(["simulate"])
    assert info.value.code == 2
