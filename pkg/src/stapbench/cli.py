"""Command-line front end: parse a config, run one experiment, write results.

Outputs per experiment: ``<kind>.csv`` with (algorithm, x, metric, std, runs)
rows, one plot-ready two-column ``<kind>_<algorithm>.dat`` per algorithm, and
a summary table (final metric per algorithm) on stdout.

Exit status: 0 on success, 2 on configuration/validation errors, 3 when any
algorithm's failed-design count exceeds the configured failure budget.
"""

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluation, scene, storage
from .config_io import ConfigError, ExperimentSpec, parse_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stapbench",
        description="Synthesize an airborne-radar interference scene and benchmark "
        "space-time beamformers.",
    )
    parser.add_argument("--config", metavar="PATH", help="configuration file (defaults apply if omitted)")
    parser.add_argument("--experiment", metavar="KIND", help="override the experiment kind")
    parser.add_argument("--seed", type=int, metavar="U64", help="override the master seed")
    parser.add_argument("--runs", type=int, metavar="N", help="override the Monte-Carlo run count")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--threads", type=int, metavar="N", help="worker threads (default 1)")
    return parser


def _algorithm_params(spec: ExperimentSpec) -> evaluation.AlgorithmParams:
    return evaluation.AlgorithmParams(
        rank=spec.rank,
        branches=spec.branches,
        interp_len=spec.interp_len,
        iterations=spec.iterations,
        evd_selection=spec.evd_selection,
        evd_rank=spec.evd_rank,
        krylov_rank=spec.krylov_rank,
        sa_penalty=spec.sa_penalty,
        sa_epsilon=spec.sa_epsilon,
        ka_mode=spec.ka_mode,
        ka_alpha=spec.ka_alpha,
        ka_eta=spec.ka_eta,
        prior_velocity_fraction=spec.prior_velocity_fraction,
        prior_cnr_offset_db=spec.prior_cnr_offset_db,
    )


def run_experiment(cfg, target, spec: ExperimentSpec):
    """Dispatch one experiment; returns its ExperimentResult."""
    params = _algorithm_params(spec)
    seed = spec.seed if spec.seed is not None else cfg.master_seed
    if spec.kind == "complexity":
        algorithms = [a for a in spec.algorithms if a != "optimal"]
        return evaluation.run_complexity_sweep(
            algorithms, spec.m_grid, rank=spec.rank, branches=spec.branches,
            interp_len=spec.interp_len, iterations=spec.iterations,
        )
    if spec.kind == "sinr-vs-snapshots":
        return evaluation.run_sinr_vs_snapshots(
            cfg, spec.algorithms, spec.k_max, spec.runs, seed,
            k_grid=spec.k_grid, target=target, loading=spec.loading,
            params=params, workers=spec.threads,
        )
    if spec.kind == "sinr-vs-doppler":
        return evaluation.run_sinr_vs_doppler(
            cfg, spec.algorithms, spec.doppler_grid(), spec.effective_k_train(),
            spec.runs, seed, target=target, loading=spec.loading,
            params=params, workers=spec.threads,
        )
    return evaluation.run_pd_vs_snr(
        cfg, spec.algorithms, spec.snr_grid_db, spec.effective_k_train(),
        spec.trials, spec.pfa, seed, designs=spec.designs, target=target,
        loading=spec.loading, params=params, workers=spec.threads,
    )


def write_outputs(result, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    storage.write_csv(out / f"{result.kind}.csv", result.rows())
    for name, points in result.curves.items():
        rows = [row for row in result.rows() if row[0] == name]
        storage.write_xy(out / f"{result.kind}_{name}.dat", [r[1] for r in rows], [r[2] for r in rows])


def print_summary(result, stream=None) -> None:
    stream = stream or sys.stdout
    print(f"experiment: {result.kind}", file=stream)
    print(f"{'algorithm':<12} {'final ' + result.metric_label:>18} {'failures':>9}", file=stream)
    for name, points in result.curves.items():
        last = points[-1]
        if hasattr(last, "sinr_db"):
            final = last.sinr_db
        elif hasattr(last, "pd"):
            final = last.pd
        else:
            final = last.multiplications
        fails = result.failures.get(name, 0)
        print(f"{name:<12} {final:>18.6g} {fails:>9}", file=stream)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config:
            cfg, target, spec = parse_config(args.config)
        else:
            cfg, target, spec = scene.RadarConfig(), scene.TargetSpec(), ExperimentSpec()
        overrides = {}
        if args.experiment is not None:
            overrides["kind"] = args.experiment
        if args.runs is not None:
            overrides["runs"] = args.runs
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.threads is not None:
            overrides["threads"] = args.threads
        if args.seed is not None:
            overrides["seed"] = args.seed
        elif spec.seed is None and os.environ.get("STAP_BENCH_SEED"):
            overrides["seed"] = int(os.environ["STAP_BENCH_SEED"])
        if overrides:
            spec = replace(spec, **overrides)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_experiment(cfg, target, spec)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        write_outputs(result, spec.out_dir)
    except OSError as exc:
        print(f"error writing {spec.out_dir}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print_summary(result)

    budget_exceeded = []
    for name, fail_count in result.failures.items():
        total = result.designs.get(name, 0)
        if total and fail_count > spec.failure_budget * total:
            budget_exceeded.append((name, fail_count, total))
    if budget_exceeded:
        for name, fail_count, total in budget_exceeded:
            print(
                f"error: {name} failed {fail_count}/{total} designs "
                f"(budget {spec.failure_budget:.0%})",
                file=sys.stderr,
            )
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
