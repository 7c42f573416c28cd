#!/usr/bin/env python3
"""
Test script for the annealing sampler and convergence counting
"""

import dimod
import numpy as np
import pytest

from penaltylab.anneal_sampler import (
    DimodSamplerAdapter,
    SaConfig,
    SampleSet,
    _anneal_block,
    count_convergence,
    ground_predicate,
    practical_predicate,
    sa_sample,
)
from penaltylab.errors import ArgumentError, ConfigError, MissingStateError
from penaltylab.problem_gcp import GcpParams, build_gcp_qubo, gen_complete_kpartite
from penaltylab.problem_pmsp import SMALL_JOBS, PmspInstance, PmspParams, build_pmsp_qubo
from penaltylab.qubo_core import IsingModel, QuboModel, qubo_to_ising

FAST = SaConfig(n_reads=50, sweeps_per_read=30, seed=3)


@pytest.fixture
def coloring_model():
    return build_gcp_qubo(gen_complete_kpartite(6, 3), GcpParams(1, 1))


class TestSaConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_reads": 0},
            {"sweeps_per_read": 0},
            {"schedule": "cosine"},
            {"beta_start": 0.0},
            {"beta_start": 2.0, "beta_end": 1.0},
            {"seed": -1},
            {"beta_scale": "median"},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ArgumentError):
            SaConfig(**kwargs)

    def test_default_betas_follow_scale(self):
        betas = SaConfig(sweeps_per_read=5).betas(2.0)
        assert betas[0] == pytest.approx(0.05)
        assert betas[-1] == pytest.approx(5.0)
        assert np.all(np.diff(betas) > 0)

    def test_cold_end_follows_typical_scale(self):
        betas = SaConfig(sweeps_per_read=5).betas(2.0, 0.5)
        assert betas[0] == pytest.approx(0.05)
        assert betas[-1] == pytest.approx(20.0)

    def test_schedule_ends_by_scale(self):
        model = QuboModel(3, {(0, 1): 8.0, (1, 2): 2.0}, {0: -1.0})
        typical = sa_sample(model, SaConfig(n_reads=5, sweeps_per_read=5)).config["beta_range"]
        auto_gain = sa_sample(model, SaConfig(n_reads=5, sweeps_per_read=5, beta_scale="max")).config["beta_range"]
        ising = qubo_to_ising(model)
        assert typical[0] == auto_gain[0] == pytest.approx(0.1 / ising.max_abs_coefficient())
        assert typical[1] == pytest.approx(10 / ising.typical_abs_coefficient())
        assert auto_gain[1] == pytest.approx(10 / ising.max_abs_coefficient())
        assert typical[1] > auto_gain[1]

    def test_linear_schedule(self):
        betas = SaConfig(sweeps_per_read=3, beta_start=1.0, beta_end=3.0, schedule="linear").betas(1.0)
        np.testing.assert_allclose(betas, [1.0, 2.0, 3.0])


class TestSaSample:
    def test_read_count_and_energies(self, coloring_model):
        samples = sa_sample(coloring_model, FAST)
        assert samples.n_reads == 50
        assert samples.vartype == "binary"
        for s in samples.samples:
            assert s.energy == coloring_model.energy(s.state)
        energies = [s.energy for s in samples.samples]
        assert energies == sorted(energies)

    def test_deterministic(self, coloring_model):
        assert sa_sample(coloring_model, FAST).to_dict() == sa_sample(coloring_model, FAST).to_dict()

    def test_reads_do_not_depend_on_block_split(self):
        rng = np.random.default_rng(41)
        J = np.triu(rng.integers(-3, 4, size=(6, 6)), 1).astype(float)
        W = J + J.T
        h = rng.integers(-2, 3, size=6).astype(float)
        betas = np.geomspace(0.1, 5, 20)
        whole = _anneal_block(h, W, betas, 9, range(0, 10))
        tail = _anneal_block(h, W, betas, 9, range(5, 10))
        np.testing.assert_array_equal(whole[5:], tail)

    def test_more_reads_than_one_block(self):
        samples = sa_sample(QuboModel(3, {(0, 1): 1.0}, {2: -1.0}), SaConfig(n_reads=300, sweeps_per_read=5))
        assert samples.n_reads == 300

    def test_finds_coloring_ground_state(self, coloring_model):
        samples = sa_sample(coloring_model, SaConfig(n_reads=1000, sweeps_per_read=200, seed=1))
        assert samples.lowest_energy == 0.0
        assert count_convergence(samples, ground_predicate(0.0)) >= 500

    def test_ising_input_keeps_spin_states(self, coloring_model):
        samples = sa_sample(qubo_to_ising(coloring_model), FAST)
        assert samples.vartype == "spin"
        assert all(s.state.kind == "spin" for s in samples.samples)

    def test_constant_model(self):
        samples = sa_sample(IsingModel(3, {}, {}, 1.5), SaConfig(n_reads=20, sweeps_per_read=3))
        assert samples.n_reads == 20
        assert {s.energy for s in samples.samples} == {1.5}

    def test_config_echo(self, coloring_model):
        config = sa_sample(coloring_model, FAST).config
        assert config["seed"] == 3
        assert len(config["beta_range"]) == 2


class TestSampleSetJson:
    def test_round_trip(self, coloring_model):
        samples = sa_sample(coloring_model, FAST)
        again = SampleSet.from_json(samples.to_json())
        assert again.to_dict() == samples.to_dict()

    def test_spin_round_trip(self):
        samples = sa_sample(IsingModel(2, {(0, 1): 1.0}), FAST)
        again = SampleSet.from_json(samples.to_json())
        assert all(s.state.kind == "spin" for s in again.samples)

    def test_malformed(self):
        with pytest.raises(ConfigError):
            SampleSet.from_json('{"samples": [{"state": "01"}]}')


class TestConvergence:
    def test_predicates_need_targets(self):
        with pytest.raises(MissingStateError):
            ground_predicate(None)
        with pytest.raises(MissingStateError):
            practical_predicate(PmspInstance(SMALL_JOBS))

    def test_practical_count(self):
        inst = PmspInstance(SMALL_JOBS, 2, 15, 13)
        samples = sa_sample(build_pmsp_qubo(inst, PmspParams(20, 1)), FAST)
        practical = count_convergence(samples, practical_predicate(inst))
        assert 0 <= practical <= samples.n_reads
        assert count_convergence(samples, lambda s: True) == 50


class TestDimodSamplerAdapter:
    def test_exact_solver(self):
        small = build_gcp_qubo(gen_complete_kpartite(4, 2), GcpParams(1, 1))
        samples = DimodSamplerAdapter(dimod.ExactSolver()).sample(small, 10)
        assert samples.n_reads == 2**8
        assert samples.lowest_energy == 0.0
        assert count_convergence(samples, ground_predicate(0.0)) == 2

    def test_random_sampler_read_count(self, coloring_model):
        samples = DimodSamplerAdapter(dimod.RandomSampler(), seed=4).sample(coloring_model, 25)
        assert samples.n_reads == 25
        for s in samples.samples:
            assert s.energy == coloring_model.energy(s.state)

    def test_ising_model(self):
        model = IsingModel(3, {(0, 1): 1.0, (1, 2): 1.0}, {0: 0.5})
        samples = DimodSamplerAdapter(dimod.ExactSolver()).sample(model, 1)
        assert samples.vartype == "spin"
        assert samples.lowest_energy == pytest.approx(min(model.energies(np.array(
            [[a, b, c] for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)]
        ))))


@pytest.mark.slow
class TestAnnealLength:
    def test_longer_anneals_do_not_lose_ground_hits(self, coloring_model):
        fractions = []
        for sweeps in (1, 10, 100, 1000):
            hits = [
                count_convergence(
                    sa_sample(coloring_model, SaConfig(n_reads=200, sweeps_per_read=sweeps, seed=seed)),
                    ground_predicate(0.0),
                )
                for seed in (1, 2, 3)
            ]
            fractions.append(np.median(hits) / 200)
        for shorter, longer in zip(fractions, fractions[1:]):
            assert longer >= shorter - 0.1
        assert fractions[-1] > fractions[0]
