#!/usr/bin/env python3
"""
Annealing sampler for penaltylab
Single-flip Metropolis simulated annealing with independent restarts, plus an adapter
for any dimod sampler, and convergence counting over the resulting sample sets
"""

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Protocol, Tuple

import dimod
import numpy as np
from loguru import logger
from tqdm import tqdm

from penaltylab.errors import ArgumentError, ConfigError, MissingStateError
from penaltylab.log_setup import progress_enabled
from penaltylab.problem_pmsp import PmspInstance, is_practical_correct
from penaltylab.qubo_core import IsingModel, Model, QuboModel, SpinVector, n_variables, qubo_to_ising

SCHEDULES = ("geometric", "linear")
# "typical": cold end from the median coefficient; "max": both ends from the largest (auto-gain)
BETA_SCALES = ("typical", "max")
# Reads annealed together in one vectorized block
READ_BLOCK = 256


@dataclass(frozen=True)
class SaConfig:
    """Anneal settings; unset betas are derived from the model's coefficient scale.

    beta_start defaults to 0.1 / max|coefficient|. beta_end defaults to
    10 / median|coefficient| under beta_scale="typical", so the final sweeps
    resolve energy steps of the size most flips see, or to 10 / max|coefficient|
    under beta_scale="max", which ties the whole schedule to the largest term
    the way an auto-gain annealer rescales its input.
    """

    n_reads: int = 1000
    sweeps_per_read: int = 200
    beta_start: Optional[float] = None
    beta_end: Optional[float] = None
    schedule: str = "geometric"
    seed: int = 0
    beta_scale: str = "typical"

    def __post_init__(self):
        if self.n_reads < 1:
            raise ArgumentError("n_reads must be >= 1")
        if self.sweeps_per_read < 1:
            raise ArgumentError("sweeps_per_read must be >= 1")
        if self.schedule not in SCHEDULES:
            raise ArgumentError(f"unknown schedule {self.schedule!r}; use one of {SCHEDULES}")
        if self.beta_scale not in BETA_SCALES:
            raise ArgumentError(f"unknown beta scale {self.beta_scale!r}; use one of {BETA_SCALES}")
        for beta in (self.beta_start, self.beta_end):
            if beta is not None and not beta > 0:
                raise ArgumentError(f"inverse temperatures must be > 0, got {beta}")
        if self.beta_start is not None and self.beta_end is not None and not self.beta_start < self.beta_end:
            raise ArgumentError("beta_start must be below beta_end")
        if not 0 <= self.seed < 2**64:
            raise ArgumentError("seed must fit in 64 unsigned bits")

    def betas(self, scale: float, cold_scale: Optional[float] = None) -> np.ndarray:
        """Per-sweep inverse temperatures; defaults are 0.1/scale and 10/cold_scale (cold_scale falls back to scale)"""
        scale = scale if scale > 0 else 1.0
        cold_scale = cold_scale if cold_scale is not None and cold_scale > 0 else scale
        start = self.beta_start if self.beta_start is not None else 0.1 / scale
        end = self.beta_end if self.beta_end is not None else 10.0 / cold_scale
        if not start < end:
            raise ArgumentError(f"derived schedule runs backwards ({start} -> {end})")
        if self.schedule == "geometric":
            return np.geomspace(start, end, self.sweeps_per_read)
        return np.linspace(start, end, self.sweeps_per_read)


@dataclass(frozen=True)
class Sample:
    state: SpinVector
    energy: float
    count: int


@dataclass(frozen=True)
class SampleSet:
    """Distinct final states with multiplicities, sorted by energy then state"""

    samples: Tuple[Sample, ...]
    fingerprint: str = ""
    config: Mapping = field(default_factory=dict)
    vartype: str = "binary"

    @property
    def n_reads(self) -> int:
        return sum(s.count for s in self.samples)

    @property
    def lowest_energy(self) -> Optional[float]:
        return self.samples[0].energy if self.samples else None

    def to_dict(self) -> Dict:
        return {
            "samples": [{"state": s.state.to_string(), "energy": s.energy, "count": s.count} for s in self.samples],
            "config": dict(self.config),
            "fingerprint": self.fingerprint,
            "vartype": self.vartype,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SampleSet":
        try:
            data = json.loads(text)
            vartype = data.get("vartype", "binary")
            samples = []
            for row in data["samples"]:
                state = SpinVector.from_string(row["state"])
                samples.append(Sample(state.to_spin() if vartype == "spin" else state, float(row["energy"]), int(row["count"])))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"malformed sample set JSON: {e}") from e
        return cls(tuple(samples), data.get("fingerprint", ""), data.get("config", {}), vartype)


def _aggregate(model: Model, finals: np.ndarray, fingerprint: str, config: Mapping) -> SampleSet:
    """Collapse final spin rows into distinct states with model-convention energies"""
    is_ising = isinstance(model, IsingModel)
    rows = finals if is_ising else (finals + 1) // 2
    unique, counts = np.unique(rows.astype(np.int8), axis=0, return_counts=True)
    energies = model.energies(unique) if len(unique) else np.zeros(0)
    samples = [
        Sample(SpinVector(row, "spin" if is_ising else "binary"), float(e), int(c))
        for row, e, c in zip(unique, energies, counts)
    ]
    samples.sort(key=lambda s: (s.energy, s.state.to_string()))
    return SampleSet(tuple(samples), fingerprint, config, "spin" if is_ising else "binary")


def _anneal_block(h: np.ndarray, W: np.ndarray, betas: np.ndarray, seed: int, reads: range) -> np.ndarray:
    n = h.size
    spins = np.empty((len(reads), n))
    uniforms = np.empty((len(reads), betas.size, n))
    for k, r in enumerate(reads):
        rng = np.random.default_rng([seed, r])
        spins[k] = 2 * rng.integers(0, 2, size=n) - 1
        uniforms[k] = rng.random((betas.size, n))
    local = h + spins @ W
    for t, beta in enumerate(betas):
        for i in range(n):
            delta = -2.0 * spins[:, i] * local[:, i]
            accept = uniforms[:, t, i] < np.exp(np.minimum(0.0, -beta * delta))
            if accept.any():
                change = np.where(accept, -2.0 * spins[:, i], 0.0)
                spins[:, i] += change
                local += change[:, None] * W[i][None, :]
    return spins


def sa_sample(model: Model, cfg: Optional[SaConfig] = None) -> SampleSet:
    """n_reads independent restarts; read r draws its start state and acceptance uniforms from rng(seed, r)"""
    cfg = cfg or SaConfig()
    ising = model if isinstance(model, IsingModel) else qubo_to_ising(model)
    n = n_variables(model)
    h, J = ising.dense
    W = J + J.T
    cold = ising.typical_abs_coefficient() if cfg.beta_scale == "typical" else None
    betas = cfg.betas(ising.max_abs_coefficient(), cold)
    logger.info("🔥 Annealing {} reads x {} sweeps on {} variables", cfg.n_reads, cfg.sweeps_per_read, n)

    blocks = [range(lo, min(lo + READ_BLOCK, cfg.n_reads)) for lo in range(0, cfg.n_reads, READ_BLOCK)]
    finals = [
        _anneal_block(h, W, betas, cfg.seed, reads)
        for reads in tqdm(blocks, desc="reads", disable=not progress_enabled())
    ]
    config = asdict(cfg)
    config["beta_range"] = [float(betas[0]), float(betas[-1])]
    return _aggregate(model, np.vstack(finals), model.fingerprint(), config)


def ground_predicate(e_min: Optional[float], tol: float = 1e-9) -> Callable[[Sample], bool]:
    if e_min is None:
        raise MissingStateError("ground predicate needs the ground energy")
    return lambda s: abs(s.energy - e_min) <= tol


def practical_predicate(inst: PmspInstance) -> Callable[[Sample], bool]:
    if inst.known_min_makespan is None:
        raise MissingStateError("practical predicate needs known_min_makespan")
    return lambda s: is_practical_correct(inst, s.state)


def count_convergence(samples: SampleSet, predicate: Callable[[Sample], bool]) -> int:
    """Reads whose final state satisfies predicate"""
    return sum(s.count for s in samples.samples if predicate(s))


class ExternalSampler(Protocol):
    def sample(self, model: Model, n_reads: int) -> SampleSet:
        ...


class DimodSamplerAdapter:
    """Runs any dimod.Sampler (e.g. a hardware client or neal) behind the SampleSet interface"""

    def __init__(self, sampler: dimod.Sampler, **params):
        self.sampler = sampler
        self.params = params

    def _to_bqm(self, model: Model) -> dimod.BinaryQuadraticModel:
        if isinstance(model, QuboModel):
            return model.to_bqm()
        bqm = dimod.BinaryQuadraticModel(dict(model.fields), dict(model.couplings), model.offset, dimod.SPIN)
        bqm.add_variables_from({i: 0.0 for i in range(model.n_spins)})
        return bqm

    def sample(self, model: Model, n_reads: int) -> SampleSet:
        n = n_variables(model)
        kwargs = dict(self.params)
        if "num_reads" in self.sampler.parameters:
            kwargs["num_reads"] = n_reads
        result = self.sampler.sample(self._to_bqm(model), **kwargs)
        rows: List[np.ndarray] = []
        for datum in result.data(["sample", "num_occurrences"]):
            values = np.array([datum.sample[i] for i in range(n)])
            spins = values if result.vartype is dimod.SPIN else 2 * values - 1
            rows.extend([spins] * int(datum.num_occurrences))
        logger.debug("🛰️ External sampler returned {} reads", len(rows))
        finals = np.array(rows).reshape(len(rows), n)
        return _aggregate(model, finals, model.fingerprint(), {"sampler": type(self.sampler).__name__, **kwargs})
