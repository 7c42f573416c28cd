#!/usr/bin/env python3
"""
Test script for parameter sweeps
"""

import json
from pathlib import Path

import numpy as np
import pytest

from penaltylab.errors import ConfigError
from penaltylab.instances import instance_to_dict
from penaltylab.problem_gcp import gen_complete_kpartite
from penaltylab.problem_pmsp import SIX_JOBS, SMALL_JOBS, PmspInstance, pmsp_balance_a
from penaltylab.sweep_runner import (
    CSV_COLUMNS,
    NORMALIZED_COLUMN,
    SweepSpec,
    expand_grid,
    linear_grid,
    log_grid,
    point_seed,
    records_frame,
    records_to_csv,
    run_point,
    run_sweep,
    write_text_atomic,
)

GCP = instance_to_dict(gen_complete_kpartite(6, 3))
SMALL = {"type": "pmsp", "jobs": list(SMALL_JOBS), "m": 2, "M": 3}
QUICK = {"n_reads": 40, "sweeps_per_read": 40}


def gcp_spec(**overrides):
    data = {"instance": GCP, "grid": {"A": [1.0, 5.0], "B": [1.0]}, "sampler": QUICK, "seed": 7, "workers": 1}
    data.update(overrides)
    return SweepSpec.from_dict(data)


class TestGrids:
    def test_log_grid(self):
        np.testing.assert_allclose(log_grid(1, 100, 3), [1, 10, 100])
        with pytest.raises(ConfigError):
            log_grid(0, 1, 3)

    def test_linear_grid(self):
        assert linear_grid(0, 1, 3) == [0.0, 0.5, 1.0]
        with pytest.raises(ConfigError):
            linear_grid(2, 1, 3)

    def test_cartesian_order_is_b_outer(self):
        inst = gen_complete_kpartite(6, 3)
        points = expand_grid({"A": [1, 2], "B": [10, 20]}, inst)
        assert points == [(1.0, 10.0), (2.0, 10.0), (1.0, 20.0), (2.0, 20.0)]

    def test_axis_dict(self):
        points = expand_grid({"A": {"lo": 1, "hi": 100, "n": 3}, "B": 2}, gen_complete_kpartite(6, 3))
        np.testing.assert_allclose([a for a, _ in points], [1, 10, 100])
        assert {b for _, b in points} == {2.0}

    def test_explicit_points(self):
        points = expand_grid({"points": [[3, 1], [4, 2]]}, gen_complete_kpartite(6, 3))
        assert points == [(3.0, 1.0), (4.0, 2.0)]

    def test_ratio_axis(self):
        inst = PmspInstance(SIX_JOBS, 2, 15, 44)
        points = expand_grid({"ratio": [0.5, 1.0], "B": [2.0]}, inst)
        assert points[1][0] == pytest.approx(pmsp_balance_a(inst, 2.0))
        assert points[0][0] == pytest.approx(0.5 * points[1][0])

    @pytest.mark.parametrize(
        "grid",
        [
            {},
            {"A": []},
            {"ratio": [1.0]},
            {"A": [-1.0]},
            {"A": {"lo": 1, "hi": 2}},
            {"A": {"lo": 1, "hi": 2, "n": 2, "scale": "cubic"}},
            {"points": [[1]]},
            {"A": "many"},
        ],
    )
    def test_bad_grids(self, grid):
        with pytest.raises(ConfigError):
            expand_grid(grid, gen_complete_kpartite(6, 3))


class TestSweepSpec:
    def test_from_dict(self):
        spec = gcp_spec()
        assert spec.grid == ((1.0, 1.0), (5.0, 1.0))
        assert spec.sampler.n_reads == 40
        assert spec.predicates == ("ground", "practical")

    @pytest.mark.parametrize(
        "overrides",
        [
            {"sampler": {"reads": 10}},
            {"sampler": {"n_reads": 0}},
            {"limits": {"max_spins": -1}},
            {"predicates": ["fastest"]},
        ],
    )
    def test_bad_specs(self, overrides):
        with pytest.raises(ConfigError):
            gcp_spec(**overrides)

    def test_needs_an_instance(self):
        with pytest.raises(ConfigError):
            SweepSpec.from_dict({"grid": {"A": [1.0]}})

    def test_from_json_resolves_instance_file(self, tmp_path):
        (tmp_path / "inst.json").write_text(json.dumps(GCP))
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps({"instance_file": "inst.json", "grid": {"A": [2.0]}}))
        spec = SweepSpec.from_json(path)
        assert spec.instance == gen_complete_kpartite(6, 3)
        assert spec.grid == ((2.0, 1.0),)

    @pytest.mark.parametrize("name, n_points", [("gcp_6n3c.json", 12), ("pmsp_six_ratio.json", 9)])
    def test_shipped_sweep_files(self, name, n_points):
        spec = SweepSpec.from_json(Path(__file__).parent.parent / "sweeps" / name)
        assert len(spec.grid) == n_points

    def test_from_json_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            SweepSpec.from_json(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            SweepSpec.from_json(bad)


class TestRunPoint:
    def test_coloring_point(self):
        record = run_point(gcp_spec(), 0)
        assert (record.A, record.B, record.x_axis) == (1.0, 1.0, 1.0)
        assert record.dynamic_range == pytest.approx(1 / 60)
        assert 0 <= record.ground_count <= 40
        assert record.practical_count is None
        assert record.n_reads == 40
        assert record.seed == point_seed(7, 0)

    def test_ground_count_without_spectrum(self):
        record = run_point(gcp_spec(spectrum=False), 1)
        assert record.dynamic_range is None
        assert record.ground_count is not None

    def test_scheduling_point(self):
        spec = SweepSpec.from_dict(
            {"instance": SMALL, "grid": {"points": [[960, 2]]}, "sampler": QUICK, "normalize_degeneracy": True}
        )
        record = run_point(spec, 0)
        assert record.x_axis == pytest.approx(960 * 6 / (2 * (3 + 26) ** 2))
        assert record.practical_count >= record.ground_count
        assert record.ground_probability_normalized == pytest.approx(record.ground_count / (40 * 4))

    def test_spectrum_over_cap_is_skipped(self):
        spec = SweepSpec.from_dict({"instance": SMALL, "grid": {"points": [[960, 2]]}, "sampler": QUICK,
                                    "limits": {"max_spins": 10}})
        record = run_point(spec, 0)
        assert record.dynamic_range is None
        assert record.ground_count is None
        assert record.practical_count is not None

    def test_point_seeds_differ(self):
        assert point_seed(7, 0) != point_seed(7, 1)
        assert point_seed(7, 0) == point_seed(7, 0)


class TestRunSweep:
    def test_records_in_grid_order(self):
        records = run_sweep(gcp_spec())
        assert [r.A for r in records] == [1.0, 5.0]

    def test_worker_count_does_not_change_output(self):
        serial = records_to_csv(run_sweep(gcp_spec(workers=1)))
        parallel = records_to_csv(run_sweep(gcp_spec(workers=2)))
        assert serial == parallel

    def test_csv_columns(self):
        records = run_sweep(gcp_spec())
        assert records_to_csv(records).splitlines()[0] == ",".join(CSV_COLUMNS)
        frame = records_frame(records, normalized=True)
        assert list(frame.columns) == CSV_COLUMNS + [NORMALIZED_COLUMN]
        assert frame["practical_count"].isna().all()

    def test_atomic_write(self, tmp_path):
        target = tmp_path / "out.csv"
        target.write_text("old")
        write_text_atomic("a,b\n1,2\n", target)
        assert target.read_text() == "a,b\n1,2\n"
        assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


@pytest.mark.slow
class TestSweepBehavior:
    def test_coloring_peak_sits_in_the_dynamic_range_window(self):
        spec = SweepSpec.from_dict({
            "instance": GCP,
            "grid": {"A": {"lo": 1, "hi": 360, "n": 12}, "B": [10.0]},
            "sampler": {"n_reads": 300, "sweeps_per_read": 100, "beta_scale": "max"},
            "seed": 11,
            "workers": 1,
        })
        records = run_sweep(spec)
        ranges = np.array([r.dynamic_range for r in records])
        best = int(np.argmax([r.ground_count for r in records]))
        assert ranges[best] >= 0.5 * ranges.max()

    def test_scheduling_balance_beats_a_weak_one_hot_penalty(self):
        inst = PmspInstance(SIX_JOBS, 2, 15, 44)
        spec = SweepSpec.from_dict({
            "instance": instance_to_dict(inst),
            "grid": {"ratio": [0.01, 0.1, 1.0], "B": [2.0]},
            "sampler": {"n_reads": 2000, "sweeps_per_read": 1000},
            "seed": 5,
            "workers": 1,
        })
        records = run_sweep(spec)
        np.testing.assert_allclose([r.x_axis for r in records], [0.01, 0.1, 1.0])
        ground = [r.ground_count for r in records]
        practical = [r.practical_count for r in records]
        # every ground state is an optimal schedule, so practical hits include all ground hits
        assert all(p >= g for p, g in zip(practical, ground))
        assert any(p > g for p, g in zip(practical, ground))
        assert ground[2] > ground[0]
