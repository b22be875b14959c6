"""Command-line entry point.

Subcommands:
  run        benchmark runs for selected suite functions and seeds
  suite      ablation table across variants
  wsn        distributed localization task
  calibrate  probe run estimating the scheduling horizon T
  verify     admissibility check over recorded mixing matrices

Exit codes: 0 success, 1 configuration error, 2 runtime fault,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import engine, scheduler
from .analysis import check_admissibility
from .config import (
    ExperimentConfig,
    build_benchmark,
    build_graph,
    build_run_config,
    build_wsn_objective,
    load_config,
)
from .errors import ConfigError
from .objectives import FAMILIES
from .wsn import system_error

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAULT = 2
EXIT_VERIFY = 3


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lacmas")
    sub = parser.add_subparsers(required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON configuration file")
    common.add_argument("--out", default=None, help="output directory override")
    common.add_argument("--seed", type=int, default=None, help="master seed override")
    common.add_argument("--variant", default=None, choices=engine.VARIANTS)
    common.add_argument("--provider", default=None, choices=["heuristic", "llm"])
    common.add_argument("--max-iter", type=int, default=None)
    common.add_argument("--agents", type=int, default=None)
    common.add_argument("--dim", type=int, default=None)

    p_run = sub.add_parser("run", parents=[common], help="benchmark experiment runs")
    p_run.add_argument("--suite", default=None, help="comma-separated families (default: all)")
    p_run.add_argument("--seeds", type=int, default=None, help="number of seeded repetitions")
    p_run.add_argument("--hetero-sigma", type=float, default=None)
    p_run.add_argument("--record-matrices", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_suite = sub.add_parser("suite", parents=[common], help="ablation table across variants")
    p_suite.add_argument("--variants", default="baseline,coop,act,full")
    p_suite.add_argument("--suite", default=None)
    p_suite.add_argument("--seeds", type=int, default=None)
    p_suite.set_defaults(func=cmd_suite)

    p_wsn = sub.add_parser("wsn", parents=[common], help="distributed localization task")
    p_wsn.add_argument("-n", "--sensors", type=int, default=None)
    p_wsn.add_argument("--targets", type=int, default=None)
    p_wsn.add_argument("--noise", type=float, default=None)
    p_wsn.set_defaults(func=cmd_wsn)

    p_cal = sub.add_parser("calibrate", parents=[common], help="estimate the horizon T")
    p_cal.add_argument("--probe-length", type=int, default=200)
    p_cal.add_argument("--family", default="sphere", choices=FAMILIES)
    p_cal.set_defaults(func=cmd_calibrate)

    p_ver = sub.add_parser("verify", parents=[common], help="replay admissibility checks")
    p_ver.add_argument("matrices", help=".npz file with recorded mixing matrices")
    p_ver.set_defaults(func=cmd_verify)

    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "seed", None) is not None:
        cfg.master_seed = args.seed
    if getattr(args, "variant", None):
        cfg.variant = args.variant
    if getattr(args, "provider", None):
        cfg.provider = args.provider
    if getattr(args, "max_iter", None):
        cfg.max_iterations = args.max_iter
    if getattr(args, "agents", None):
        cfg.objective.num_agents = args.agents
    if getattr(args, "dim", None):
        cfg.objective.dim = args.dim
    if getattr(args, "seeds", None):
        cfg.num_runs = args.seeds
    if getattr(args, "hetero_sigma", None) is not None:
        cfg.objective.hetero_sigma = args.hetero_sigma
    if getattr(args, "suite", None):
        cfg.suite = [f.strip() for f in args.suite.split(",") if f.strip()]
        for fam in cfg.suite:
            if fam not in FAMILIES:
                raise ConfigError(f"unknown suite family {fam!r}")
    if cfg.variant == "baseline" and cfg.provider == "llm":
        print("warning: provider 'llm' has no effect for the baseline variant; using heuristic")
        cfg.provider = "heuristic"
    return cfg


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = _outdir(cfg)
    record = bool(getattr(args, "record_matrices", False))
    summaries = []
    for family in cfg.suite:
        objective = build_benchmark(cfg, family)
        graph = build_graph(cfg, objective.num_agents)
        for k in range(cfg.num_runs):
            run_cfg = build_run_config(cfg, objective, graph, cfg.master_seed + k)
            run_cfg.record_matrices = record
            report = engine.run(run_cfg)
            stem = f"trace_{family}_{cfg.variant}_seed{run_cfg.master_seed}"
            engine.write_trace_csv(report, out / f"{stem}.csv")
            if record and report.matrices is not None:
                np.savez_compressed(
                    out / f"{stem}_matrices.npz", *[m for m in report.matrices]
                )
            summaries.append((family, report))
            if report.aborted:
                print(engine.summarize(report), file=sys.stderr)
                return EXIT_FAULT
    summary_path = out / f"summary_{cfg.variant}.txt"
    with open(summary_path, "w") as fh:
        for family, report in summaries:
            fh.write(f"[{family}]\n{engine.summarize(report)}\n\n")
    print(f"wrote {len(summaries)} runs to {out}")
    return EXIT_OK


def cmd_suite(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    for v in variants:
        if v not in engine.VARIANTS:
            raise ConfigError(f"unknown variant {v!r}")
    out = _outdir(cfg)
    # Variants run to the full budget so final fitness is compared at equal
    # evaluation counts; communication cost is counted up to the first
    # disagreement-threshold crossing.
    lines = ["family,variant,mean_final_fitness,mean_comm_cost,mean_converged_at,converged_runs"]
    for family in cfg.suite:
        objective = build_benchmark(cfg, family)
        graph = build_graph(cfg, objective.num_agents)
        for variant in variants:
            finals, costs, convs = [], [], []
            for k in range(cfg.num_runs):
                run_cfg = build_run_config(cfg, objective, graph, cfg.master_seed + k)
                run_cfg.variant = variant
                run_cfg.stop_at_convergence = False
                if variant == "baseline":
                    run_cfg.provider = "heuristic"
                report = engine.run(run_cfg)
                if report.aborted:
                    print(engine.summarize(report), file=sys.stderr)
                    return EXIT_FAULT
                finals.append(report.final_fitness_mean_state)
                costs.append(report.comm_cost_at_convergence)
                convs.append(report.converged_at)
            done = [c for c in convs if c is not None]
            mean_conv = float(np.mean(done)) if done else float("nan")
            lines.append(
                f"{family},{variant},{float(np.mean(finals))!r},"
                f"{float(np.mean(costs))!r},{mean_conv!r},{len(done)}"
            )
    table = out / "ablation.csv"
    table.write_text("\n".join(lines) + "\n")
    print(f"wrote {table}")
    return EXIT_OK


def cmd_wsn(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if getattr(args, "sensors", None):
        cfg.wsn.num_sensors = args.sensors
    if getattr(args, "targets", None):
        cfg.wsn.num_targets = args.targets
    if getattr(args, "noise", None) is not None:
        cfg.wsn.noise_sigma = args.noise
    out = _outdir(cfg)
    objective = build_wsn_objective(cfg)
    # num_agents tracks the sensor count for this task.
    cfg.objective.num_agents = objective.num_agents
    graph = build_graph(cfg, objective.num_agents)
    run_cfg = build_run_config(cfg, objective, graph, cfg.master_seed)
    report = engine.run(run_cfg)
    if report.aborted:
        print(engine.summarize(report), file=sys.stderr)
        return EXIT_FAULT
    stem = f"wsn_n{cfg.wsn.num_sensors}_t{cfg.wsn.num_targets}_seed{cfg.master_seed}"
    engine.write_trace_csv(report, out / f"{stem}.csv")
    err = system_error(objective.scenario, objective.phi, report.final_states)
    print(f"final estimation error: {err!r}")
    print(engine.summarize(report))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    objective = build_benchmark(cfg, args.family)
    graph = build_graph(cfg, objective.num_agents)
    run_cfg = build_run_config(cfg, objective, graph, cfg.master_seed)
    run_cfg.variant = "baseline"
    run_cfg.provider = "heuristic"
    run_cfg.max_iterations = args.probe_length
    report = engine.run(run_cfg)
    if report.aborted:
        print(engine.summarize(report), file=sys.stderr)
        return EXIT_FAULT
    horizon = scheduler.calibrate_horizon(
        report.disagreement_trace,
        threshold=cfg.convergence_threshold,
        default_T=cfg.pcg.horizon_T,
    )
    print(horizon)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    try:
        with np.load(args.matrices) as data:
            matrices = [data[key] for key in data.files]
    except OSError as exc:
        raise ConfigError(f"cannot read matrices file: {exc}") from None
    if not matrices:
        raise ConfigError("matrices file is empty")
    graph = build_graph(cfg, matrices[0].shape[0])
    failures = 0
    for idx, matrix in enumerate(matrices):
        report = check_admissibility(matrix, graph)
        if not report.passed:
            failures += 1
            print(f"iteration {idx}: violation "
                  f"(row_dev={report.max_row_deviation!r}, min={report.min_entry!r})")
    admissible = failures == 0
    print(f"admissible: {'true' if admissible else 'false'} "
          f"({len(matrices)} matrices, {failures} violations)")
    return EXIT_OK if admissible else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
