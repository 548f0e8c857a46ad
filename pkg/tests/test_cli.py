"""Command-line interface: run, granularity, diagnose."""
import csv
import json

import numpy as np
import pytest

from nodebalance import generate_sbm, make_step_imbalance_split, save_graph
from nodebalance.cli import main
from nodebalance.synthetic import SbmParams

CFG = {
    "dataset": {
        "name": "cli-sbm",
        "sbm": {
            "block_sizes": [40, 40],
            "p_intra": 0.1,
            "p_inter": 0.02,
            "d": 6,
            "feature_shift": 1.5,
            "noise_sigma": 1.0,
        },
        "seed": 2,
    },
    "imbalance": {"kind": "step", "ir": 5, "base_per_class": 8, "val_per_class": 8},
    "method": {"baseline": "none", "aug": "topo"},
    "train": {"epochs": 5, "hidden": 16},
    "seeds": [0, 1, 2],
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(CFG))
    return path


class TestRunCommand:
    def test_writes_results_and_prints_summary(self, config_path, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["run", "--config", str(config_path), "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "vanilla+topo on cli-sbm" in printed
        assert "bacc" in printed
        with open(out / "results.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        assert {r["seed"] for r in rows} == {"0", "1", "2"}

    def test_seed_prefix_and_override(self, config_path, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "run",
                "--config",
                str(config_path),
                "--out",
                str(out),
                "--seeds",
                "2",
                "--override",
                "train.epochs=3",
            ]
        )
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["runs"] == 2
        assert summary["config"]["train"]["epochs"] == 3
        assert summary["config"]["seeds"] == [0, 1]

    def test_virtual_in_loss_flag(self, config_path, tmp_path):
        out = tmp_path / "out"
        code = main(
            ["run", "--config", str(config_path), "--out", str(out), "--virtual-in-loss"]
        )
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["config"]["train"]["virtual_in_loss"] is True

    def test_save_flags_produce_files(self, config_path, tmp_path):
        out = tmp_path / "out"
        code = main(
            [
                "run",
                "--config",
                str(config_path),
                "--out",
                str(out),
                "--seeds",
                "1",
                "--save-probs",
                "--save-history",
            ]
        )
        assert code == 0
        assert (out / "probs_seed0.json").exists()
        assert (out / "history_seed0.csv").exists()

    def test_seeds_out_of_range_fails(self, config_path, tmp_path, capsys):
        code = main(
            ["run", "--config", str(config_path), "--out", str(tmp_path / "o"), "--seeds", "9"]
        )
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_config_fails(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestGranularityCommand:
    def test_prints_table_and_writes_csv(self, config_path, tmp_path, capsys):
        out = tmp_path / "gran"
        code = main(
            [
                "granularity",
                "--config",
                str(config_path),
                "--values",
                "2,5",
                "--override",
                "seeds=[0]",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "granularity" in printed
        with open(out / "granularity.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["granularity"] for r in rows] == ["2", "5"]
        assert [r["aug_invocations"] for r in rows] == ["3", "1"]

    def test_bad_values_rejected(self, config_path, capsys):
        code = main(["granularity", "--config", str(config_path), "--values", "2,zero"])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestDiagnoseCommand:
    @pytest.fixture
    def graph_file(self, tmp_path):
        params = SbmParams(
            block_sizes=(40, 40),
            p_intra=0.12,
            p_inter=0.02,
            d=6,
            feature_shift=1.5,
            noise_sigma=1.0,
        )
        g = generate_sbm(params, 5)
        split = make_step_imbalance_split(g, 8, 2, seed=0, val_per_class=8)
        path = tmp_path / "graph.json"
        save_graph(g, path, train=split.train, val=split.val, test=split.test)
        return path, g, split

    def test_writes_bin_tables(self, graph_file, tmp_path, capsys):
        path, g, split = graph_file
        rng = np.random.default_rng(0)
        probs = rng.dirichlet(np.ones(g.m), size=g.n)
        probs_path = tmp_path / "probs.json"
        probs_path.write_text(json.dumps({"probs": probs.tolist()}))
        out = tmp_path / "diag"
        code = main(
            [
                "diagnose",
                "--graph",
                str(path),
                "--probs",
                str(probs_path),
                "--out",
                str(out),
                "--windows",
                "3",
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "test accuracy" in printed
        for name in ("het_bins.csv", "dist_bins.csv"):
            with open(out / name, newline="") as fh:
                rows = list(csv.reader(fh))
            assert len(rows) == 4  # header + 3 windows

    def test_requires_stored_split(self, tmp_path, capsys):
        params = SbmParams(
            block_sizes=(10, 10),
            p_intra=0.3,
            p_inter=0.05,
            d=4,
            feature_shift=1.0,
            noise_sigma=1.0,
        )
        g = generate_sbm(params, 0)
        path = tmp_path / "bare.json"
        save_graph(g, path)
        probs_path = tmp_path / "probs.json"
        probs_path.write_text(json.dumps({"probs": np.full((20, 2), 0.5).tolist()}))
        code = main(["diagnose", "--graph", str(path), "--probs", str(probs_path)])
        assert code == 1
        assert "stored train/val/test" in capsys.readouterr().err

    def test_probs_shape_mismatch(self, graph_file, tmp_path, capsys):
        path, g, _ = graph_file
        probs_path = tmp_path / "probs.json"
        probs_path.write_text(json.dumps({"probs": [[0.5, 0.5]] * 3}))
        code = main(["diagnose", "--graph", str(path), "--probs", str(probs_path)])
        assert code == 1
        assert "does not match" in capsys.readouterr().err
