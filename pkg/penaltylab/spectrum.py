#!/usr/bin/env python3
"""
Spectrum analysis for penaltylab
Exhaustive enumeration of every state of a QUBO or Ising model: ground set, gap, spread,
dynamic range, degeneracy and energy histograms
"""

import itertools
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
import psutil
from loguru import logger
from scipy.signal import find_peaks
from tqdm import tqdm

from penaltylab.errors import ArgumentError, ResourceLimitError, UndefinedValueError
from penaltylab.log_setup import progress_enabled
from penaltylab.qubo_core import IsingModel, Model, SpinVector, model_energy, n_variables

# Energies of non-integer models closer than this share a histogram bin
FLOAT_TOL = 1e-9


def default_workers() -> int:
    """Physical cores, then logical cores, then 1"""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


@dataclass(frozen=True)
class SpectrumLimits:
    max_spins: int = 28
    max_ground_states: int = 1024
    block_bits: int = 16
    workers: Optional[int] = None

    def __post_init__(self):
        if self.max_spins < 0 or self.max_ground_states < 0:
            raise ArgumentError("spectrum limits must be non-negative")
        if not 1 <= self.block_bits <= 24:
            raise ArgumentError("block_bits must lie in [1, 24]")

    def resolved_workers(self) -> int:
        return max(1, self.workers if self.workers is not None else default_workers())


@dataclass(frozen=True)
class SpectrumReport:
    """Exact energy spectrum of a model; dynamic_range is NaN (with constant=True) for a constant model"""

    n_spins: int
    e_min: float
    e_second: Optional[float]
    e_max: float
    ground_states: Tuple[SpinVector, ...]
    ground_count: int
    histogram: Tuple[Tuple[float, int], ...]
    constant: bool = False
    kind: str = "qubo"

    @property
    def n_states(self) -> int:
        return 2**self.n_spins

    @property
    def gap(self) -> float:
        return 0.0 if self.e_second is None else self.e_second - self.e_min

    @property
    def spread(self) -> float:
        return self.e_max - self.e_min

    @property
    def dynamic_range(self) -> float:
        return math.nan if self.constant else self.gap / self.spread

    def to_dict(self) -> Dict:
        return {
            "n_spins": self.n_spins,
            "n_states": self.n_states,
            "kind": self.kind,
            "e_min": self.e_min,
            "e_second": self.e_second,
            "e_max": self.e_max,
            "gap": self.gap,
            "spread": self.spread,
            "dynamic_range": None if self.constant else self.dynamic_range,
            "constant": self.constant,
            "ground_count": self.ground_count,
            "ground_states": [g.to_string() for g in self.ground_states],
            "histogram": [[e, c] for e, c in self.histogram],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def iter_state_blocks(n: int, block_bits: int = 16, start: int = 0, stop: Optional[int] = None) -> Iterator[np.ndarray]:
    """(k, n) int8 bit rows for state indices start..stop in order; bit i of the index is variable i"""
    stop = 2**n if stop is None else stop
    shifts = np.arange(n, dtype=np.int64)
    step = 2**block_bits
    for lo in range(start, stop, step):
        idx = np.arange(lo, min(lo + step, stop), dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1).astype(np.int8)


def _block_energies(model: Model, bits: np.ndarray) -> np.ndarray:
    if isinstance(model, IsingModel):
        return model.energies(2 * bits.astype(np.int64) - 1)
    return model.energies(bits)


def _is_integral(model: Model) -> bool:
    if isinstance(model, IsingModel):
        values = list(model.fields.values()) + list(model.couplings.values())
    else:
        values = list(model.linear.values()) + list(model.quadratic.values())
    return all(float(c).is_integer() for c in values + [model.offset])


@dataclass
class _Partial:
    """Mergeable summary of one contiguous state range"""

    energies: np.ndarray
    counts: np.ndarray
    e_min: float = math.inf
    ground: List[np.ndarray] = field(default_factory=list)


def _scan_range(model: Model, lo: int, hi: int, block_bits: int, max_ground: int, tol: float) -> _Partial:
    n = n_variables(model)
    tally: Counter = Counter()
    part = _Partial(np.zeros(0), np.zeros(0, dtype=np.int64))
    for bits in iter_state_blocks(n, block_bits, lo, hi):
        energies = _block_energies(model, bits)
        values, counts = np.unique(energies, return_counts=True)
        tally.update(dict(zip(values.tolist(), counts.tolist())))
        block_min = float(values[0])
        if block_min < part.e_min - tol:
            part.e_min = block_min
            part.ground = []
        if block_min <= part.e_min + tol and len(part.ground) < max_ground:
            hits = bits[np.abs(energies - part.e_min) <= tol]
            part.ground.extend(hits[: max_ground - len(part.ground)])
    keys = sorted(tally)
    part.energies = np.array(keys, dtype=np.float64)
    part.counts = np.array([tally[k] for k in keys], dtype=np.int64)
    return part


def _merge_levels(energies: np.ndarray, counts: np.ndarray, tol: float) -> List[Tuple[float, int]]:
    order = np.argsort(energies, kind="stable")
    levels: List[Tuple[float, int]] = []
    for e, c in zip(energies[order].tolist(), counts[order].tolist()):
        if levels and e - levels[-1][0] <= tol:
            levels[-1] = (levels[-1][0], levels[-1][1] + c)
        else:
            levels.append((e, c))
    return levels


def enumerate_spectrum(model: Model, limits: Optional[SpectrumLimits] = None) -> SpectrumReport:
    """Visit all 2^n states once, in contiguous ranges spread over worker processes"""
    limits = limits or SpectrumLimits()
    n = n_variables(model)
    if n > limits.max_spins:
        raise ResourceLimitError(f"{n} variables exceed the enumeration cap of {limits.max_spins}")
    tol = 0.0 if _is_integral(model) else FLOAT_TOL
    total = 2**n
    n_chunks = max(1, total >> limits.block_bits)
    workers = min(limits.resolved_workers(), n_chunks)
    chunk = -(-total // n_chunks)
    ranges = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    logger.info("🧮 Enumerating {} states over {} ranges ({} workers)", total, len(ranges), workers)

    args = [(model, lo, hi, limits.block_bits, limits.max_ground_states, tol) for lo, hi in ranges]
    if workers == 1:
        partials = [_scan_range(*a) for a in tqdm(args, desc="states", disable=not progress_enabled())]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_scan_range, *a) for a in args]
            partials = [f.result() for f in tqdm(futures, desc="states", disable=not progress_enabled())]

    levels = _merge_levels(
        np.concatenate([p.energies for p in partials]), np.concatenate([p.counts for p in partials]), tol
    )
    e_min = levels[0][0]
    ground: List[np.ndarray] = []
    for p in partials:
        if abs(p.e_min - e_min) <= tol:
            ground.extend(p.ground[: limits.max_ground_states - len(ground)])
    is_ising = isinstance(model, IsingModel)
    ground_states = tuple(SpinVector(g).to_spin() if is_ising else SpinVector(g) for g in ground)
    constant = len(levels) == 1
    report = SpectrumReport(
        n_spins=n,
        e_min=e_min,
        e_second=None if constant else levels[1][0],
        e_max=levels[-1][0],
        ground_states=ground_states,
        ground_count=levels[0][1],
        histogram=tuple(levels),
        constant=constant,
        kind="ising" if is_ising else "qubo",
    )
    logger.debug("📊 e_min={} gap={} spread={} ground={}", report.e_min, report.gap, report.spread, report.ground_count)
    return report


def dynamic_range(report: SpectrumReport) -> float:
    """Gap near the ground state over the max-min spread"""
    if report.constant:
        raise UndefinedValueError("dynamic range of a constant spectrum is undefined")
    return report.gap / report.spread


def degeneracy(report: SpectrumReport, energy: float, tol: float = FLOAT_TOL) -> int:
    """States whose energy lies within tol of the given energy"""
    return sum(c for e, c in report.histogram if abs(e - energy) <= tol)


def histogram_export(report: SpectrumReport, binning: str = "exact", width: Optional[float] = None) -> pd.DataFrame:
    """(bin_center, count) table; fixed binning is dense, anchored at e_min, and keeps empty bins"""
    energies = np.array([e for e, _ in report.histogram])
    counts = np.array([c for _, c in report.histogram], dtype=np.int64)
    if binning == "exact":
        return pd.DataFrame({"bin_center": energies, "count": counts})
    if binning != "fixed":
        raise ArgumentError(f"unknown binning {binning!r}; use 'exact' or 'fixed'")
    if width is None or not width > 0:
        raise ArgumentError(f"bin width must be > 0, got {width!r}")
    index = np.floor((energies - report.e_min) / width).astype(np.int64)
    dense = np.bincount(index, weights=counts, minlength=int(index.max()) + 1).astype(np.int64)
    centers = report.e_min + (np.arange(dense.size) + 0.5) * width
    return pd.DataFrame({"bin_center": centers, "count": dense})


def find_histogram_peaks(table: pd.DataFrame, prominence: Optional[float] = None) -> pd.DataFrame:
    """Local maxima of a fixed-width histogram; the first and last bins can be peaks"""
    padded = np.concatenate([[0], table["count"].to_numpy(), [0]])
    peaks, _ = find_peaks(padded, prominence=prominence)
    return table.iloc[peaks - 1].reset_index(drop=True)


def naive_spectrum(model: Model) -> List[Tuple[float, int]]:
    """Straightforward per-state evaluation, sorted (energy, count) pairs"""
    n = n_variables(model)
    tally: Counter = Counter()
    values = (-1, 1) if isinstance(model, IsingModel) else (0, 1)
    for state in itertools.product(values, repeat=n):
        tally[model_energy(model, list(state))] += 1
    return sorted(tally.items())


def count_states(n_vars: int, predicate: Callable[[np.ndarray], np.ndarray], limits: Optional[SpectrumLimits] = None) -> int:
    """Number of binary states of the given width for which the batched predicate holds"""
    limits = limits or SpectrumLimits()
    if n_vars > limits.max_spins:
        raise ResourceLimitError(f"{n_vars} variables exceed the enumeration cap of {limits.max_spins}")
    return int(sum(int(predicate(bits).sum()) for bits in iter_state_blocks(n_vars, limits.block_bits)))
