#!/usr/bin/env python3
"""
Sweep Runner for penaltylab
Runs a penalty-coefficient grid: one QUBO build, optional exact spectrum and one annealing
run per grid point, gathered into ordered records and written as CSV
"""

import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from penaltylab.anneal_sampler import SaConfig, count_convergence, ground_predicate, practical_predicate, sa_sample
from penaltylab.core_system import REGISTRY
from penaltylab.errors import ConfigError, PenaltyLabError, ResourceLimitError
from penaltylab.instances import Instance, instance_from_dict, load_instance
from penaltylab.log_setup import progress_enabled
from penaltylab.problem_pmsp import PmspInstance, pmsp_balance_a
from penaltylab.spectrum import SpectrumLimits, default_workers, enumerate_spectrum

CSV_COLUMNS = ["A", "B", "x_axis", "dynamic_range", "ground_count", "practical_count", "n_reads", "seed"]
NORMALIZED_COLUMN = "ground_probability_normalized"
PREDICATES = ("ground", "practical")


def log_grid(lo: float, hi: float, n: int) -> List[float]:
    if not (lo > 0 and hi >= lo and n >= 1):
        raise ConfigError(f"log grid needs 0 < lo <= hi and n >= 1, got ({lo}, {hi}, {n})")
    return [float(v) for v in np.geomspace(lo, hi, n)]


def linear_grid(lo: float, hi: float, n: int) -> List[float]:
    if not (hi >= lo and n >= 1):
        raise ConfigError(f"linear grid needs lo <= hi and n >= 1, got ({lo}, {hi}, {n})")
    return [float(v) for v in np.linspace(lo, hi, n)]


def _axis_values(axis: Union[Sequence[float], Dict], name: str) -> List[float]:
    """An axis is a plain list or {"lo", "hi", "n", "scale": "log" | "linear"}"""
    if isinstance(axis, dict):
        try:
            lo, hi, n = float(axis["lo"]), float(axis["hi"]), int(axis["n"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"grid axis {name} needs lo, hi and n: {e}") from e
        scale = axis.get("scale", "log")
        if scale not in ("log", "linear"):
            raise ConfigError(f"grid axis {name} has unknown scale {scale!r}")
        return log_grid(lo, hi, n) if scale == "log" else linear_grid(lo, hi, n)
    if isinstance(axis, (int, float)):
        return [float(axis)]
    try:
        return [float(v) for v in axis]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"grid axis {name} is not a list of numbers: {e}") from e


def expand_grid(grid: Dict, inst: Instance) -> List[Tuple[float, float]]:
    """(A, B) points from explicit "points", or "A" x "B", or "ratio" x "B" for scheduling instances"""
    if "points" in grid:
        try:
            points = [(float(a), float(b)) for a, b in grid["points"]]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"grid points must be [A, B] pairs: {e}") from e
    else:
        Bs = _axis_values(grid.get("B", [1.0]), "B")
        if "ratio" in grid:
            if not isinstance(inst, PmspInstance):
                raise ConfigError("a ratio axis is only defined for scheduling instances")
            ratios = _axis_values(grid["ratio"], "ratio")
            points = [(r * pmsp_balance_a(inst, B), B) for B in Bs for r in ratios]
        elif "A" in grid:
            points = [(A, B) for B in Bs for A in _axis_values(grid["A"], "A")]
        else:
            raise ConfigError("grid needs 'points', an 'A' axis or a 'ratio' axis")
    if not points:
        raise ConfigError("parameter grid is empty")
    if any(not (math.isfinite(a) and math.isfinite(b)) or a < 0 or b < 0 for a, b in points):
        raise ConfigError("grid coefficients must be finite and non-negative")
    return points


@dataclass(frozen=True)
class SweepSpec:
    instance: Instance
    grid: Tuple[Tuple[float, float], ...]
    sampler: SaConfig = field(default_factory=SaConfig)
    seed: int = 0
    predicates: Tuple[str, ...] = PREDICATES
    compute_spectrum: bool = True
    normalize_degeneracy: bool = False
    limits: SpectrumLimits = field(default_factory=SpectrumLimits)
    workers: Optional[int] = None
    out: Optional[str] = None

    def __post_init__(self):
        if not self.grid:
            raise ConfigError("parameter grid is empty")
        unknown = set(self.predicates) - set(PREDICATES)
        if unknown:
            raise ConfigError(f"unknown predicates {sorted(unknown)}; use {PREDICATES}")

    @classmethod
    def from_dict(cls, data: Dict, base_dir: Union[str, Path] = ".") -> "SweepSpec":
        """Instance inline under "instance" or by path under "instance_file" (relative to base_dir)"""
        if "instance" in data:
            inst = instance_from_dict(data["instance"])
        elif "instance_file" in data:
            inst = load_instance(Path(base_dir) / data["instance_file"])
        else:
            raise ConfigError("sweep spec needs 'instance' or 'instance_file'")
        try:
            sampler = SaConfig(**data.get("sampler", {}))
            limits = SpectrumLimits(**data.get("limits", {}))
        except TypeError as e:
            raise ConfigError(f"unknown sampler or limits key: {e}") from e
        except PenaltyLabError as e:
            raise ConfigError(f"invalid sampler or limits: {e}") from e
        return cls(
            instance=inst,
            grid=tuple(expand_grid(data.get("grid", {}), inst)),
            sampler=sampler,
            seed=int(data.get("seed", 0)),
            predicates=tuple(data.get("predicates", PREDICATES)),
            compute_spectrum=bool(data.get("spectrum", True)),
            normalize_degeneracy=bool(data.get("normalize_degeneracy", False)),
            limits=limits,
            workers=data.get("workers"),
            out=data.get("out"),
        )

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "SweepSpec":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as e:
            raise ConfigError(f"cannot read sweep spec {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"sweep spec {path} is not JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("sweep spec must be a JSON object")
        return cls.from_dict(data, path.parent)


@dataclass(frozen=True)
class SweepRecord:
    A: float
    B: float
    x_axis: float
    dynamic_range: Optional[float]
    ground_count: Optional[int]
    practical_count: Optional[int]
    n_reads: int
    seed: int
    ground_probability_normalized: Optional[float] = None


def point_seed(master: int, index: int) -> int:
    """Seed for grid point `index`, independent of worker scheduling"""
    return int(np.random.SeedSequence([master, index]).generate_state(1, dtype=np.uint64)[0])


def run_point(spec: SweepSpec, index: int, serial_spectrum: bool = False) -> SweepRecord:
    inst = spec.instance
    A, B = spec.grid[index]
    kind = REGISTRY.kind_of(inst)
    model = kind.build(inst, A, B)
    seed = point_seed(spec.seed, index)

    report = None
    if spec.compute_spectrum:
        limits = replace(spec.limits, workers=1) if serial_spectrum else spec.limits
        try:
            report = enumerate_spectrum(model, limits)
        except ResourceLimitError as e:
            logger.warning(
                "⚠️ Skipping spectrum at A={} B={} (reference max energy {:g}): {}", A, B, kind.max_energy(inst, A, B), e
            )

    samples = sa_sample(model, replace(spec.sampler, seed=seed))
    e_min = report.e_min if report is not None else kind.ground_energy(inst)
    ground = None
    if "ground" in spec.predicates and e_min is not None:
        ground = count_convergence(samples, ground_predicate(e_min))
    practical = None
    if "practical" in spec.predicates and kind.has_practical:
        practical = count_convergence(samples, practical_predicate(inst))

    normalized = None
    if spec.normalize_degeneracy and report is not None and ground is not None:
        normalized = ground / (samples.n_reads * report.ground_count)
    dyn = None if report is None or report.constant else report.dynamic_range
    return SweepRecord(A, B, kind.x_axis(inst, A, B), dyn, ground, practical, samples.n_reads, seed, normalized)


def run_sweep(spec: SweepSpec) -> List[SweepRecord]:
    """One record per grid point, in grid order, whatever the worker count"""
    workers = min(spec.workers or default_workers(), len(spec.grid))
    logger.info("🧪 Sweeping {} grid points on {} workers", len(spec.grid), workers)
    indices = range(len(spec.grid))
    if workers <= 1:
        return [run_point(spec, i) for i in tqdm(indices, desc="grid", disable=not progress_enabled())]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_point, spec, i, True) for i in indices]
        records = [f.result() for f in tqdm(futures, desc="grid", disable=not progress_enabled())]
    logger.info("✅ Sweep finished")
    return records


def records_frame(records: Sequence[SweepRecord], normalized: bool = False) -> pd.DataFrame:
    columns = CSV_COLUMNS + ([NORMALIZED_COLUMN] if normalized else [])
    frame = pd.DataFrame([asdict(r) for r in records], columns=columns)
    for col in ("ground_count", "practical_count"):
        frame[col] = frame[col].astype("Int64")
    return frame


def records_to_csv(records: Sequence[SweepRecord], normalized: bool = False) -> str:
    return records_frame(records, normalized).to_csv(index=False)


def write_text_atomic(text: str, path: Union[str, Path]):
    """Write to a temporary sibling and rename over the target"""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info("💾 Wrote {}", path)
