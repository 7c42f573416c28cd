#!/usr/bin/env python3
"""
penaltylab - Main Entry Point
Command line front end: instance generation, QUBO builds, spectra, sampling, sweeps and fits
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import pandas as pd
from loguru import logger

from penaltylab.anneal_sampler import BETA_SCALES, SaConfig, sa_sample
from penaltylab.core_system import REGISTRY
from penaltylab.database import ResultsDatabase
from penaltylab.errors import ConfigError, PenaltyLabError
from penaltylab.instances import Instance, dump_instance, load_instance
from penaltylab.log_setup import configure_logging
from penaltylab.polarity_ising import PolarityGroup, one_hot_ising
from penaltylab.problem_cvcp import gen_clique_union
from penaltylab.problem_gcp import gen_complete_kpartite
from penaltylab.problem_pmsp import PmspInstance, ensure_known_optimum, gen_balanced_instance, pad_balanced_instance
from penaltylab.qubo_core import load_model, qubo_to_ising
from penaltylab.scaling_fit import fit_scaling
from penaltylab.spectrum import SpectrumLimits, enumerate_spectrum, histogram_export
from penaltylab.sweep_runner import SweepSpec, records_frame, run_sweep, write_text_atomic


def emit(text: str, out: Optional[str]):
    """Machine output goes to --out or standard output, never through the logger"""
    if not text.endswith("\n"):
        text += "\n"
    if out:
        write_text_atomic(text, out)
    else:
        sys.stdout.write(text)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e


def _generate(args) -> Instance:
    if args.problem == "gcp":
        return gen_complete_kpartite(args.nodes, args.colors)
    if args.problem == "cvcp":
        return gen_clique_union(args.sizes, args.colors)
    if args.jobs:
        inst = ensure_known_optimum(PmspInstance(tuple(args.jobs), args.machines, args.M))
    else:
        inst = gen_balanced_instance(args.base, args.smallest, args.machines, args.M)
    if args.pad:
        inst = pad_balanced_instance(inst, args.pad)
    return inst


def cmd_gen(args) -> int:
    inst = _generate(args)
    logger.info("🏗️ Generated {} instance", args.problem)
    emit(dump_instance(inst), args.out)
    return 0


def cmd_qubo(args) -> int:
    if args.file:
        inst = load_instance(args.file)
        kind = REGISTRY.kind_of(inst)
        if kind.name != args.problem:
            raise ConfigError(f"instance file holds a {kind.name} instance, not {args.problem}")
    else:
        inst = _generate(args)
    kind = REGISTRY.kind_of(inst)
    model = kind.build(inst, args.A, args.B)
    logger.info(
        "🧱 Built {}-variable {} model, reference max energy {:g}", model.n_vars, args.problem, kind.max_energy(inst, args.A, args.B)
    )
    emit((qubo_to_ising(model) if args.ising else model).to_json(), args.out)
    return 0


def cmd_spectrum(args) -> int:
    model = load_model(_read_text(args.model))
    report = enumerate_spectrum(model, SpectrumLimits(max_spins=args.max_spins, workers=args.workers))
    if args.histogram:
        binning = "fixed" if args.bin_width is not None else "exact"
        table = histogram_export(report, binning, args.bin_width)
        write_text_atomic(table.to_csv(index=False), args.histogram)
    if args.format == "csv":
        emit(pd.DataFrame([{k: v for k, v in report.to_dict().items() if k not in ("histogram", "ground_states")}]).to_csv(index=False), args.out)
    else:
        emit(report.to_json(), args.out)
    return 0


def _sa_config(args) -> SaConfig:
    return SaConfig(
        n_reads=args.reads,
        sweeps_per_read=args.sweeps,
        beta_start=args.beta_start,
        beta_end=args.beta_end,
        schedule=args.schedule,
        seed=args.seed,
        beta_scale=args.beta_scale,
    )


def cmd_sample(args) -> int:
    model = load_model(_read_text(args.model))
    samples = sa_sample(model, _sa_config(args))
    logger.info("🎯 Lowest sampled energy {}", samples.lowest_energy)
    emit(samples.to_json(), args.out)
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec.from_json(args.spec)
    if args.workers is not None:
        spec = replace(spec, workers=args.workers)
    if args.seed_given:
        spec = replace(spec, seed=args.seed)
    records = run_sweep(spec)
    if args.db:
        ResultsDatabase(args.db).log_records(args.experiment or Path(args.spec).stem, records)
    frame = records_frame(records, spec.normalize_degeneracy)
    if args.format == "json":
        text = frame.to_json(orient="records")
    else:
        text = frame.to_csv(index=False)
    out = args.out or spec.out
    emit(text, out)
    return 0


def cmd_fit(args) -> int:
    try:
        table = pd.read_csv(args.points)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read points file {args.points}: {e}") from e
    if table.shape[1] < 2:
        raise ConfigError("points file needs two columns: size and probability (or time)")
    points = list(zip(table.iloc[:, 0], table.iloc[:, 1]))
    fit = fit_scaling(points, args.beta, args.kind)
    result = {
        "alpha": fit.alpha,
        "beta": fit.beta,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "kind": fit.kind,
        "n_points": len(fit.points),
        "dropped": fit.dropped,
    }
    if args.format == "csv":
        emit(pd.DataFrame([result]).to_csv(index=False), args.out)
    else:
        emit(json.dumps(result), args.out)
    return 0


def cmd_onehot(args) -> int:
    model = one_hot_ising(PolarityGroup(args.spins, args.k, args.J_scale))
    emit(model.to_json(), args.out)
    return 0


def _add_instance_flags(p: argparse.ArgumentParser):
    sub = p.add_subparsers(dest="problem", required=True)
    gcp = sub.add_parser("gcp", help="complete k-partite coloring instance")
    gcp.add_argument("--nodes", type=int, default=6)
    gcp.add_argument("--colors", type=int, default=3)
    cvcp = sub.add_parser("cvcp", help="clique union for clique cover")
    cvcp.add_argument("--sizes", type=int, nargs="+", default=[3, 3])
    cvcp.add_argument("--colors", type=int, default=None)
    pmsp = sub.add_parser("pmsp", help="two-machine scheduling instance")
    pmsp.add_argument("--base", type=int, nargs="+", default=[7, 6, 5, 4], help="descending base job pairs")
    pmsp.add_argument("--smallest", type=int, default=1)
    pmsp.add_argument("--jobs", type=int, nargs="+", default=None, help="explicit job list instead of --base")
    pmsp.add_argument("--machines", type=int, default=2)
    pmsp.add_argument("--M", type=int, default=15, help="slack bound")
    pmsp.add_argument("--pad", type=int, nargs="*", default=None, help="equal job pairs to prepend")
    for q in (gcp, cvcp, pmsp):
        q.add_argument("--file", default=None, help="instance JSON (qubo only)")
        q.add_argument("--A", type=float, default=1.0)
        q.add_argument("--B", type=float, default=1.0)
        q.add_argument("--ising", action="store_true", help="emit the Ising form")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="penaltylab", description="Penalty-coefficient studies of QUBO encodings")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output file (default: standard output)")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--db", default=None, help="SQLite results archive")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_instance_flags(sub.add_parser("gen", help="generate an instance"))
    _add_instance_flags(sub.add_parser("qubo", help="build a model JSON"))

    spec = sub.add_parser("spectrum", help="exhaustive spectrum of a model")
    spec.add_argument("--model", required=True)
    spec.add_argument("--histogram", default=None, help="histogram CSV path")
    spec.add_argument("--bin-width", dest="bin_width", type=float, default=None)
    spec.add_argument("--max-spins", dest="max_spins", type=int, default=SpectrumLimits.max_spins)
    spec.add_argument("--workers", type=int, default=None)

    sample = sub.add_parser("sample", help="one annealing run")
    sample.add_argument("--model", required=True)
    sample.add_argument("--reads", type=int, default=SaConfig.n_reads)
    sample.add_argument("--sweeps", type=int, default=SaConfig.sweeps_per_read)
    sample.add_argument("--beta-start", dest="beta_start", type=float, default=None)
    sample.add_argument("--beta-end", dest="beta_end", type=float, default=None)
    sample.add_argument("--schedule", choices=("geometric", "linear"), default="geometric")
    sample.add_argument("--beta-scale", dest="beta_scale", choices=BETA_SCALES, default=SaConfig.beta_scale)

    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("--spec", required=True)
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--experiment", default=None, help="label in the results archive")

    fit = sub.add_parser("fit", help="exponential scaling fit")
    fit.add_argument("--points", required=True, help="CSV: size, probability (or time)")
    fit.add_argument("--beta", type=float, default=1.0)
    fit.add_argument("--kind", choices=("probability", "time"), default="probability")

    onehot = sub.add_parser("onehot", help="k-hot polarity Ising block")
    onehot.add_argument("--spins", type=int, required=True)
    onehot.add_argument("--k", type=int, default=1)
    onehot.add_argument("--J-scale", dest="J_scale", type=float, default=1.0)
    return parser


COMMANDS = {
    "gen": cmd_gen,
    "qubo": cmd_qubo,
    "spectrum": cmd_spectrum,
    "sample": cmd_sample,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "onehot": cmd_onehot,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.verbose)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    if args.format is None:
        args.format = "csv" if args.command == "sweep" else "json"
    if args.command == "gen" and getattr(args, "file", None):
        logger.warning("⚠️ --file is ignored by gen")

    try:
        return COMMANDS[args.command](args)
    except PenaltyLabError as e:
        logger.error("❌ {}", e)
        return 1
    except KeyboardInterrupt:
        logger.warning("🛑 Interrupted")
        return 1
    except Exception as e:
        logger.exception("❌ Unexpected error: {}", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
