#!/usr/bin/env python3
"""
Test script for the penaltylab command line
"""

import json

import pandas as pd
import pytest

from penaltylab.main import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestGenAndQubo:
    def test_gen_gcp(self, capsys):
        code, out = run(capsys, "gen", "gcp", "--nodes", "6", "--colors", "3")
        assert code == 0
        data = json.loads(out)
        assert data["type"] == "gcp" and len(data["edges"]) == 12

    def test_gen_pmsp_balanced(self, capsys):
        code, out = run(capsys, "gen", "pmsp", "--base", "7", "6", "5", "4")
        assert code == 0
        assert json.loads(out)["jobs"] == [7, 6, 5, 4, 3, 1]

    def test_qubo_pmsp(self, capsys):
        code, out = run(capsys, "qubo", "pmsp", "--jobs", "19", "13", "12", "21", "16", "7", "--A", "3540", "--B", "2")
        assert code == 0
        assert json.loads(out)["n_vars"] == 16

    def test_qubo_ising_from_file(self, capsys, tmp_path):
        inst = tmp_path / "inst.json"
        assert main(["--out", str(inst), "gen", "cvcp", "--sizes", "3", "3"]) == 0
        code, out = run(capsys, "qubo", "cvcp", "--file", str(inst), "--ising")
        assert code == 0
        assert "n_spins" in json.loads(out)

    def test_qubo_file_of_wrong_kind(self, capsys, tmp_path):
        inst = tmp_path / "inst.json"
        main(["--out", str(inst), "gen", "gcp"])
        code, _ = run(capsys, "qubo", "pmsp", "--file", str(inst))
        assert code == 1

    def test_construction_failure_exits_1(self, capsys):
        code, _ = run(capsys, "gen", "pmsp", "--base", "5", "5")
        assert code == 1


class TestSpectrumAndSample:
    @pytest.fixture
    def model_file(self, tmp_path):
        path = tmp_path / "model.json"
        assert main(["--out", str(path), "qubo", "pmsp", "--jobs", "7", "6", "5", "4", "3", "1",
                     "--M", "3", "--A", "960", "--B", "2"]) == 0
        return path

    def test_spectrum(self, capsys, model_file, tmp_path):
        hist = tmp_path / "hist.csv"
        code, out = run(capsys, "spectrum", "--model", str(model_file), "--workers", "1",
                        "--histogram", str(hist), "--bin-width", "120")
        assert code == 0
        report = json.loads(out)
        assert report["n_states"] == 16384
        assert report["e_min"] == 13
        assert pd.read_csv(hist)["count"].sum() == 16384

    def test_spectrum_over_cap(self, capsys, model_file):
        code, _ = run(capsys, "spectrum", "--model", str(model_file), "--max-spins", "10")
        assert code == 1

    def test_sample_is_seeded(self, capsys, model_file):
        args = ("--seed", "5", "sample", "--model", str(model_file), "--reads", "20", "--sweeps", "20")
        code, first = run(capsys, *args)
        _, second = run(capsys, *args)
        assert code == 0
        assert first == second
        assert sum(s["count"] for s in json.loads(first)["samples"]) == 20

    def test_missing_model_file(self, capsys, tmp_path):
        code, _ = run(capsys, "sample", "--model", str(tmp_path / "absent.json"))
        assert code == 1


class TestSweepAndFit:
    def test_sweep_csv_and_archive(self, capsys, tmp_path):
        spec = tmp_path / "sweep.json"
        spec.write_text(json.dumps({
            "instance": {"type": "gcp", "n_nodes": 6, "k_colors": 3,
                         "edges": [[u, v] for u in range(6) for v in range(u + 1, 6) if u // 2 != v // 2],
                         "known_chromatic": 3},
            "grid": {"A": [1.0, 2.0]},
            "sampler": {"n_reads": 20, "sweeps_per_read": 20},
        }))
        db = tmp_path / "results.db"
        code, out = run(capsys, "--db", str(db), "sweep", "--spec", str(spec), "--workers", "1")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("A,B,x_axis,dynamic_range")
        assert len(lines) == 3

    def test_fit(self, capsys, tmp_path):
        points = tmp_path / "points.csv"
        points.write_text("N,p\n10,0.5\n20,0.05\n30,0.005\n")
        code, out = run(capsys, "fit", "--points", str(points))
        assert code == 0
        assert json.loads(out)["alpha"] == pytest.approx(0.1 * 2.302585, rel=1e-5)

    def test_fit_needs_points(self, capsys, tmp_path):
        points = tmp_path / "points.csv"
        points.write_text("N,p\n10,0.5\n")
        code, _ = run(capsys, "fit", "--points", str(points))
        assert code == 1


class TestOnehotAndUsage:
    def test_onehot(self, capsys):
        code, out = run(capsys, "onehot", "--spins", "5", "--k", "2")
        assert code == 0
        model = json.loads(out)
        assert model["n_spins"] == 5
        assert len(model["J"]) == 10

    def test_usage_error_exits_2(self, capsys):
        assert main(["spectrum"]) == 2
        assert main(["nonsense"]) == 2

    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == 0
