"""Command-line front end.

Subcommands: run, sweep, bounds, fig1, fig2-desk, fig3, app-scheduling,
app-federated.  QCS_LOG_LEVEL in {error, warn, info, debug} controls
diagnostics; debug additionally forces per-step conservation assertions
on even when a config switched them off.

Instance file schemas (JSON):
  scheduling:  {"nodes": [{"l": 40, "u": 0, "pi_max": 100}, ...]}
  federated:   {"nodes": [{"r_size": 10, "w_local": 100}, ...]}
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import experiments
from .applications import (
    FederatedInstance,
    SchedulingInstance,
    federated_recover,
    make_scheduling_recovery,
    scheduling_init,
    federated_init,
    scheduling_utilizations,
)
from .async_engine import DelayModel, run_async
from .bounds import bounds_report
from .digraph import Digraph, generate_random_digraph
from .errors import QcsError
from .experiments import (
    ExperimentConfig,
    FileGraphSpec,
    parse_config,
    run_experiment,
)
from .sync_engine import RunConfig, run_sync

logger = logging.getLogger(__name__)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _setup_logging() -> str:
    name = os.environ.get("QCS_LOG_LEVEL", "warn").lower()
    if name not in _LOG_LEVELS:
        print(
            f"QCS_LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, got {name!r}",
            file=sys.stderr,
        )
        name = "warn"
    logging.basicConfig(
        level=_LOG_LEVELS[name],
        format="%(levelname)s %(name)s: %(message)s",
    )
    return name


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="base seed (trial i adds i)")
    p.add_argument("--trials", type=int, default=None, help="number of trials")
    p.add_argument("--out", type=Path, default=None, help="artifact output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None, help="trial worker processes")


def _workers(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    return max(1, os.cpu_count() or 1)


def _override(cfg: ExperimentConfig, args, debug: bool) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if getattr(args, "graph_file", None) is not None:
        changes["graph"] = FileGraphSpec(path=str(args.graph_file))
    if debug:
        changes["check_invariants"] = True
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _print_stats(label: str, res: experiments.ExperimentResult) -> None:
    st = res.stats
    print(
        f"{label}: {st.converged_count}/{st.trials} converged, "
        f"steps mean={st.mean:.1f} std={st.std:.1f} min={st.min} max={st.max}"
    )
    if st.fraction_within_bound is not None:
        print(f"{label}: fraction within completion bound = {st.fraction_within_bound:.3f}")
    for name, path in res.artifacts.items():
        print(f"{label}: wrote {name} -> {path}")


def load_scheduling_instance(path: Path) -> SchedulingInstance:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    nodes = data["nodes"]
    return SchedulingInstance(
        workloads=tuple(int(v["l"]) for v in nodes),
        occupied=tuple(int(v["u"]) for v in nodes),
        capacity=tuple(int(v["pi_max"]) for v in nodes),
    )


def load_federated_instance(path: Path) -> FederatedInstance:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    nodes = data["nodes"]
    return FederatedInstance(
        dataset_sizes=tuple(int(v["r_size"]) for v in nodes),
        local_params=tuple(int(v["w_local"]) for v in nodes),
    )


def _app_graph(args, n: int) -> Digraph:
    if args.graph_file is not None:
        return Digraph.load(args.graph_file)
    return generate_random_digraph(n, args.edge_prob, seed=args.seed or 0)


def _cmd_run(args, debug: bool) -> int:
    cfg = _override(parse_config(args.config), args, debug)
    res = run_experiment(cfg, out_dir=args.out, fmt=args.format, workers=_workers(args))
    _print_stats("run", res)
    return 0


def _cmd_sweep(args, debug: bool) -> int:
    sizes = [int(v) for v in args.sizes.split(",")]
    delays = [int(v) for v in args.delays.split(",")]
    cells = []
    for n in sizes:
        for b in delays:
            cfg = ExperimentConfig(
                mode="async",
                graph=experiments.RandomGraphSpec(n=n, edge_prob=args.edge_prob),
                initial=experiments.SchedulingUniformInitial(
                    load_range=(1, 100), capacity_pattern=(100, 300), occupied=0
                ),
                delay=DelayModel(max_delay=b),
                trials=args.trials if args.trials is not None else 50,
                seed=(args.seed or 0) + (n * 1000 + b) * 100_000,
                check_invariants=True,
            )
            cells.append((n, b, cfg))
    rows = experiments.run_sweep(cells, out_dir=args.out, workers=_workers(args))
    for row in rows:
        print(
            f"n={row['n']} B={row['max_delay']}: mean={row['mean_steps']:.1f} "
            f"({row['converged']}/{row['trials']} converged)"
        )
    return 0


def _cmd_bounds(args, debug: bool) -> int:
    cfg = _override(parse_config(args.config), args, debug)
    epsilon = args.epsilon if args.epsilon is not None else cfg.epsilon
    if epsilon is None:
        print("bounds: an epsilon is required (config key or --epsilon)", file=sys.stderr)
        return 2
    inst = experiments.build_trial_instance(cfg, 0)
    report = bounds_report(
        inst.graph,
        epsilon,
        inst.y0,
        inst.z0,
        max_delay=None if cfg.delay is None else cfg.delay.max_delay,
        min_max_delay_prob=None
        if cfg.delay is None
        else cfg.delay.min_max_delay_prob(inst.graph.n),
    )
    width = max(len(k) for k in report)
    for key, value in report.items():
        print(f"{key:<{width}}  {value}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "bounds.json"
        path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        print(f"bounds: wrote {path}")
    return 0


def _cmd_fig1(args, debug: bool) -> int:
    cfg = _override(experiments.fig1_config(), args, debug)
    res = run_experiment(cfg, out_dir=args.out, fmt=args.format, workers=_workers(args))
    _print_stats("fig1", res)
    return 0


def _cmd_fig2_desk(args, debug: bool) -> int:
    cells = experiments.fig2_grid(
        trials=args.trials if args.trials is not None else 50,
        seed=args.seed or 0,
        full_scale=args.full_scale,
    )
    rows = experiments.run_sweep(cells, out_dir=args.out, workers=_workers(args))
    for row in rows:
        print(
            f"n={row['n']} B={row['max_delay']}: mean={row['mean_steps']:.1f} "
            f"({row['converged']}/{row['trials']} converged)"
        )
    return 0


def _cmd_fig3(args, debug: bool) -> int:
    cfgs = experiments.fig3_configs(
        trials=args.trials if args.trials is not None else 100, seed=args.seed or 0
    )
    for label, cfg in cfgs.items():
        if debug:
            cfg = dataclasses.replace(cfg, check_invariants=True)
        out = None if args.out is None else args.out / label
        res = run_experiment(cfg, out_dir=out, fmt=args.format, workers=_workers(args))
        _print_stats(f"fig3-{label}", res)
    return 0


def _run_app(args, y0, z0, recovery, n: int):
    g = _app_graph(args, n)
    cfg = RunConfig(
        graph=g,
        y0=y0,
        z0=z0,
        seed=args.seed or 0,
        recovery=recovery,
        record_trajectory=False,
    )
    if args.mode == "async":
        return run_async(cfg, DelayModel(max_delay=args.max_delay)), g
    return run_sync(cfg), g


def _cmd_app_scheduling(args, debug: bool) -> int:
    inst = load_scheduling_instance(args.instance)
    y0, z0 = scheduling_init(inst)
    outcome, g = _run_app(args, y0, z0, make_scheduling_recovery(inst), inst.n)
    if not outcome.converged:
        print("did not converge within the step cap", file=sys.stderr)
        return 1
    workloads = [int(v) for v in outcome.recovered_solution]
    utils = scheduling_utilizations(inst, workloads)
    print(f"converged at step {outcome.termination_step} (diameter {g.diameter})")
    for j, (w, u) in enumerate(zip(workloads, utils)):
        print(f"node {j}: w*={w} utilization={float(u):.4f}")
    return 0


def _cmd_app_federated(args, debug: bool) -> int:
    inst = load_federated_instance(args.instance)
    y0, z0 = federated_init(inst)
    outcome, g = _run_app(args, y0, z0, None, inst.n)
    if not outcome.converged:
        print("did not converge within the step cap", file=sys.stderr)
        return 1
    aggregate = federated_recover(int(outcome.final_estimate[0]))
    exact = inst.exact_aggregate()
    print(f"converged at step {outcome.termination_step} (diameter {g.diameter})")
    print(f"aggregate={aggregate} exact={float(exact):.4f} error={abs(aggregate - float(exact)):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcs",
        description="Quantized-consensus distributed optimization simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a config file")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--graph-file", type=Path, default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep", help="n x B async sweep over scheduling workloads")
    p.add_argument("--sizes", default="50,100,200,300")
    p.add_argument("--delays", default="5,10,15")
    p.add_argument("--edge-prob", type=float, default=0.5)
    _add_common(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("bounds", help="print the closed-form bound table for a config")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--graph-file", type=Path, default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_bounds)

    p = sub.add_parser("fig1", help="task-scheduling preset (sync, 20 nodes)")
    _add_common(p)
    p.set_defaults(fn=_cmd_fig1)

    p = sub.add_parser("fig2-desk", help="delayed-convergence sweep preset")
    p.add_argument("--full-scale", action="store_true")
    _add_common(p)
    p.set_defaults(fn=_cmd_fig2_desk)

    p = sub.add_parser("fig3", help="federated aggregation preset (sync + async)")
    _add_common(p)
    p.set_defaults(fn=_cmd_fig3)

    for name, fn in (("app-scheduling", _cmd_app_scheduling), ("app-federated", _cmd_app_federated)):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} demo on an instance file")
        p.add_argument("--instance", type=Path, required=True)
        p.add_argument("--graph-file", type=Path, default=None)
        p.add_argument("--edge-prob", type=float, default=0.5)
        p.add_argument("--mode", choices=("sync", "async"), default="sync")
        p.add_argument("--max-delay", type=int, default=5)
        _add_common(p)
        p.set_defaults(fn=fn)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    level = _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, debug=(level == "debug"))
    except QcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
