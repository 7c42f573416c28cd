#!/usr/bin/env python3
"""
Test script for exhaustive spectrum analysis
"""

import math

import numpy as np
import pytest

from penaltylab.errors import ArgumentError, ResourceLimitError, UndefinedValueError
from penaltylab.problem_cvcp import CvcpParams, build_cvcp_qubo, gen_clique_union
from penaltylab.problem_gcp import GcpParams, build_gcp_qubo, gen_complete_kpartite
from penaltylab.problem_pmsp import SMALL_JOBS, PmspInstance, PmspParams, build_pmsp_qubo
from penaltylab.qubo_core import IsingModel, QuboModel, qubo_to_ising
from penaltylab.spectrum import (
    SpectrumLimits,
    count_states,
    degeneracy,
    dynamic_range,
    enumerate_spectrum,
    find_histogram_peaks,
    histogram_export,
    iter_state_blocks,
    naive_spectrum,
)

SERIAL = SpectrumLimits(workers=1)


def random_qubo(rng, n):
    quadratic = {(i, j): float(rng.integers(-4, 5)) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4}
    return QuboModel(n, quadratic, {i: float(rng.integers(-4, 5)) for i in range(n)})


class TestIterStateBlocks:
    def test_bit_order(self):
        rows = np.vstack(list(iter_state_blocks(3, block_bits=1)))
        assert rows.shape == (8, 3)
        assert rows[1].tolist() == [1, 0, 0]
        assert rows[6].tolist() == [0, 1, 1]

    def test_range(self):
        rows = np.vstack(list(iter_state_blocks(4, block_bits=2, start=5, stop=9)))
        assert len(rows) == 4
        assert rows[0].tolist() == [1, 0, 1, 0]


class TestEnumerateSpectrum:
    def test_coloring_anchor(self):
        model = build_gcp_qubo(gen_complete_kpartite(6, 3), GcpParams(1, 1))
        report = enumerate_spectrum(model, SERIAL)
        assert report.n_states == 2**18
        assert report.e_min == 0.0
        assert report.ground_count == 6
        assert len(report.ground_states) == 6
        assert report.gap == 1.0
        assert report.e_max == 60.0
        assert report.dynamic_range == pytest.approx(1 / 60)

    def test_matches_naive(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            model = random_qubo(rng, 9)
            report = enumerate_spectrum(model, SERIAL)
            assert list(report.histogram) == naive_spectrum(model)

    def test_ising_model(self):
        model = qubo_to_ising(random_qubo(np.random.default_rng(22), 7))
        report = enumerate_spectrum(model, SERIAL)
        assert report.kind == "ising"
        naive = naive_spectrum(model)
        assert report.e_min == pytest.approx(naive[0][0])
        assert report.ground_count == naive[0][1]
        assert all(set(g.values.tolist()) <= {-1, 1} for g in report.ground_states)

    def test_parallel_matches_serial(self):
        model = random_qubo(np.random.default_rng(23), 12)
        serial = enumerate_spectrum(model, SpectrumLimits(block_bits=4, workers=1))
        parallel = enumerate_spectrum(model, SpectrumLimits(block_bits=4, workers=2))
        assert parallel.histogram == serial.histogram
        assert parallel.ground_count == serial.ground_count

    def test_float_levels_within_tolerance_merge(self):
        model = QuboModel(2, {}, {0: 0.1 + 0.2, 1: 0.3})
        report = enumerate_spectrum(model, SERIAL)
        assert report.ground_count == 1
        assert degeneracy(report, 0.3) == 2

    def test_ground_state_cap(self):
        report = enumerate_spectrum(QuboModel(4, {}, {0: 1.0}), SpectrumLimits(max_ground_states=3, workers=1))
        assert report.ground_count == 8
        assert len(report.ground_states) == 3

    def test_resource_limit(self):
        with pytest.raises(ResourceLimitError):
            enumerate_spectrum(QuboModel(30), SpectrumLimits(max_spins=28))

    def test_constant_model(self):
        report = enumerate_spectrum(IsingModel(3, {}, {}, 2.0), SERIAL)
        assert report.constant
        assert report.ground_count == 8
        assert math.isnan(report.dynamic_range)
        assert report.to_dict()["dynamic_range"] is None
        with pytest.raises(UndefinedValueError):
            dynamic_range(report)


class TestHistogram:
    @pytest.fixture
    def scheduling_report(self):
        inst = PmspInstance(SMALL_JOBS, 2, 3, 13)
        return enumerate_spectrum(build_pmsp_qubo(inst, PmspParams(960, 2)), SERIAL)

    def test_scheduling_spectrum_bounds(self, scheduling_report):
        assert scheduling_report.n_spins == 14
        assert scheduling_report.e_min == 13.0
        assert scheduling_report.e_max == 5804.0

    def test_exact_binning_sums_to_all_states(self, scheduling_report):
        table = histogram_export(scheduling_report)
        assert table["count"].sum() == 2**14
        assert table["bin_center"].iloc[0] == 13.0

    def test_fixed_binning_is_dense(self, scheduling_report):
        table = histogram_export(scheduling_report, "fixed", 120)
        assert table["count"].sum() == 2**14
        assert table["bin_center"].iloc[0] == pytest.approx(13 + 60)
        assert np.allclose(np.diff(table["bin_center"]), 120)

    def test_one_hot_bands_show_as_peaks(self, scheduling_report):
        table = histogram_export(scheduling_report, "fixed", 120)
        peaks = find_histogram_peaks(table)
        assert len(peaks) == 7
        assert np.allclose(np.diff(peaks["bin_center"]), 960)

    def test_bad_binning(self, scheduling_report):
        with pytest.raises(ArgumentError):
            histogram_export(scheduling_report, "log")
        with pytest.raises(ArgumentError):
            histogram_export(scheduling_report, "fixed", 0)


class TestCountStates:
    def test_counts_predicate(self):
        assert count_states(10, lambda bits: bits.sum(axis=1) == 1) == 10

    def test_limit(self):
        with pytest.raises(ResourceLimitError):
            count_states(40, lambda bits: bits[:, 0] == 1)


class TestKnownGroundSets:
    def test_clique_cover_of_two_triangles(self):
        model = build_cvcp_qubo(gen_clique_union([3, 3]), CvcpParams(1, 1))
        report = enumerate_spectrum(model, SERIAL)
        assert report.e_min == 0.0
        assert report.ground_count == 2
