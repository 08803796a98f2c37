"""Command-line entry point.

    hfsp generate --preset fb2009 --seed 1 --machines 20 --out trace.json
    hfsp run --preset fb2009 --scheduler hfsp --seeds 1 --out runs/one
    hfsp compare --schedulers hfsp,fair,fifo --trace trace.json --seeds 1..10 --out cmp
    hfsp scenario preemption-bench --preemption eager
    hfsp report cmp

Run configuration comes from an optional JSON file (``--config``); flags
override its values.  Relative output paths are resolved under
``$HFSP_OUTPUT_ROOT`` when it is set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import metrics
from .baselines import FairScheduler, FifoScheduler
from .core import ClusterConfig, ValidationError
from .engine import run_simulation
from .estimator import EstimatorConfig
from .scenarios import run_single_slot, run_shared_cluster, run_preemption_bench
from .scheduler import HfspConfig, HfspScheduler
from .workload import (PRESETS, WorkloadSpec, generate_workload, map_only, parse_trace,
                       preset_trace, scale_trace, write_atomic, write_trace)

log = logging.getLogger("hfsp")

OUTPUT_ROOT_ENV = "HFSP_OUTPUT_ROOT"
SCHEDULERS = ("hfsp", "fair", "fifo")


class UsageError(Exception):
    pass


def parse_seeds(text) -> list[int]:
    """``"3"``, ``"1,2,5"``, ``"1..10"`` (inclusive) or a list of ints."""
    try:
        return _parse_seeds(text)
    except (TypeError, ValueError):
        raise UsageError(f"bad seed list {text!r}") from None


def _parse_seeds(text) -> list[int]:
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(s) for s in text]
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise UsageError("no seeds given")
    return seeds


def resolve_output(path: str) -> str:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not os.path.isabs(path):
        return os.path.join(root, path)
    return path


def make_scheduler(name: str, config: dict | None = None):
    config = dict(config or {})
    if name == "hfsp":
        return HfspScheduler(HfspConfig.from_dict(config))
    if name == "fair":
        return FairScheduler(**config)
    if name == "fifo":
        if config:
            raise UsageError("fifo takes no configuration")
        return FifoScheduler()
    raise UsageError(f"unknown scheduler {name!r}; choose from {', '.join(SCHEDULERS)}")


@dataclass
class RunConfig:
    """Everything needed to reproduce a run or a comparison."""

    trace: str | None = None
    generator: dict | None = None  # {"preset": name} or a WorkloadSpec dict
    machines_scale: bool = True  # scale preset traces to the cluster size
    map_only: bool = False
    cluster: dict = field(default_factory=dict)
    schedulers: list[str] = field(default_factory=lambda: ["hfsp"])
    scheduler_config: dict = field(default_factory=dict)  # name -> config
    seeds: list[int] = field(default_factory=lambda: [0])
    output: str = "results"

    def validate(self) -> None:
        if (self.trace is None) == (self.generator is None):
            raise UsageError("give exactly one of a trace file or a generator spec")
        if not self.seeds:
            raise UsageError("seeds must not be empty")
        for name in self.schedulers:
            if name not in SCHEDULERS:
                raise UsageError(f"unknown scheduler {name!r}; choose from {', '.join(SCHEDULERS)}")
        ClusterConfig.from_dict(self.cluster).validate()

    def resolved(self) -> dict:
        """The configuration with every default written out.

        The output location is left out so runs written to different
        directories stay byte-identical.
        """
        cluster = ClusterConfig.from_dict(self.cluster)
        scheds = {}
        for name in self.schedulers:
            scheds[name] = make_scheduler(name, self.scheduler_config.get(name)).describe()
        return {"trace": self.trace, "generator": self.generator,
                "machines_scale": self.machines_scale, "map_only": self.map_only,
                "cluster": cluster.to_dict(), "schedulers": scheds, "seeds": self.seeds}

    def load_trace(self, seed: int):
        cluster = ClusterConfig.from_dict(self.cluster)
        if self.trace is not None:
            trace = parse_trace(self.trace)
        elif "preset" in self.generator:
            gen = dict(self.generator)
            name = gen.pop("preset")
            machines = cluster.num_machines if self.machines_scale else 100
            trace = preset_trace(name, seed, machines, **gen)
        else:
            trace = generate_workload(WorkloadSpec.from_dict(self.generator), seed)
        if self.map_only:
            trace = map_only(trace)
        return trace


def _simulate(args):
    cfg, name, seed = args
    trace = cfg.load_trace(seed)
    sched = make_scheduler(name, cfg.scheduler_config.get(name))
    return run_simulation(trace, ClusterConfig.from_dict(cfg.cluster), sched, seed=seed)


def run_many(cfg: RunConfig, workers: int = 1) -> dict[str, list]:
    """All (scheduler, seed) simulations; results keyed by scheduler, in seed order."""
    jobs = [(cfg, name, seed) for name in cfg.schedulers for seed in cfg.seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_simulate, jobs))
    else:
        results = [_simulate(j) for j in jobs]
    out: dict[str, list] = {name: [] for name in cfg.schedulers}
    for (_, name, _), res in zip(jobs, results):
        out[name].append(res)
    return out


def write_outputs(cfg: RunConfig, results: dict[str, list], outdir: str) -> dict:
    """Per-run files under ``<scheduler>/seed<k>/`` plus a top-level summary."""
    summary = {"config": cfg.resolved(), "seeds": cfg.seeds, "schedulers": {}}
    for name, runs in results.items():
        for res in runs:
            if res.unfinished:
                raise ValidationError(f"{name} seed {res.seed}: unfinished jobs "
                                      f"{', '.join(res.unfinished)}")
            metrics.write_run_outputs(res, os.path.join(outdir, name, f"seed{res.seed}"))
        summary["schedulers"][name] = metrics.summarize(runs)
    write_atomic(os.path.join(outdir, "config.json"), metrics.dumps_json(cfg.resolved()))
    metrics.write_summary(summary, os.path.join(outdir, "summary.json"))
    return summary


# -- subcommands -----------------------------------------------------------

def _load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from None
    if "seeds" in data:
        data["seeds"] = parse_seeds(data["seeds"])
    try:
        cfg = RunConfig(**data)
    except TypeError as e:
        raise UsageError(f"config: {e}") from None
    if args.trace:
        cfg.trace, cfg.generator = args.trace, None
    if args.preset:
        cfg.generator, cfg.trace = {"preset": args.preset}, None
    if cfg.trace is None and cfg.generator is None:
        cfg.generator = {"preset": "fb2009"}
    if args.map_only:
        cfg.map_only = True
    if args.seeds is not None:
        cfg.seeds = parse_seeds(args.seeds)
    if args.out:
        cfg.output = args.out
    if args.machines is not None:
        cfg.cluster["num_machines"] = args.machines
    if args.heartbeat is not None:
        cfg.cluster["heartbeat_interval"] = args.heartbeat
    if getattr(args, "schedulers", None):
        cfg.schedulers = [s.strip() for s in args.schedulers.split(",") if s.strip()]
    if getattr(args, "scheduler", None):
        cfg.schedulers = [args.scheduler]
    hfsp = dict(cfg.scheduler_config.get("hfsp", {}))
    est = dict(hfsp.get("estimator", {}))
    for flag, key in (("preemption", "reduce_preemption"), ("max_skips", "max_skips")):
        v = getattr(args, flag)
        if v is not None:
            hfsp[key] = v
    for flag, key in (("alpha", "alpha"), ("xi", "xi"), ("delta", "delta"),
                      ("sample_size", "s")):
        v = getattr(args, flag)
        if v is not None:
            est[key] = v
    if est:
        hfsp["estimator"] = est
    if hfsp:
        cfg.scheduler_config["hfsp"] = hfsp
    if args.max_skips is not None:
        fair = dict(cfg.scheduler_config.get("fair", {}))
        fair["max_skips"] = args.max_skips
        cfg.scheduler_config["fair"] = fair
    cfg.validate()
    return cfg


def _print_summary(summary: dict, out) -> None:
    rows = []
    for name, s in summary["schedulers"].items():
        a = s["across_seeds"]
        rows.append((name, a["sojourn_job"]["mean"], a["sojourn_job"]["std"],
                     a.get("locality", {}).get("mean", float("nan"))))
    print(f"{'scheduler':<10} {'mean sojourn (s)':>17} {'std':>9} {'locality':>9}", file=out)
    for name, m, sd, loc in rows:
        print(f"{name:<10} {m:>17.2f} {sd:>9.2f} {loc:>9.3f}", file=out)


def cmd_generate(args) -> int:
    if bool(args.preset) == bool(args.spec):
        raise UsageError("give exactly one of --preset or --spec")
    if args.preset:
        trace = preset_trace(args.preset, args.seed, args.machines)
    else:
        try:
            with open(args.spec, encoding="utf-8") as f:
                spec = WorkloadSpec.from_dict(json.load(f))
        except (OSError, json.JSONDecodeError, TypeError, KeyError) as e:
            raise UsageError(f"cannot read spec {args.spec}: {e}") from None
        trace = generate_workload(spec, args.seed)
        if args.machines != 100:
            trace = scale_trace(trace, args.machines / 100)
    if args.map_only:
        trace = map_only(trace)
    out = resolve_output(args.out)
    write_trace(trace, out)
    print(f"wrote {len(trace.jobs)} jobs to {out}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    if len(cfg.schedulers) != 1:
        raise UsageError("run takes a single scheduler; use compare for several")
    return _run_and_report(cfg, args.workers)


def cmd_compare(args) -> int:
    return _run_and_report(_load_config(args), args.workers)


def _run_and_report(cfg: RunConfig, workers: int) -> int:
    outdir = resolve_output(cfg.output)
    results = run_many(cfg, workers)
    summary = write_outputs(cfg, results, outdir)
    _print_summary(summary, sys.stdout)
    print(f"outputs in {outdir}")
    return 0


def cmd_scenario(args) -> int:
    name = args.name
    if name == "single-slot":
        r = run_single_slot(args.heartbeat if args.heartbeat is not None else 0.5)
        body = {k: v for k, v in r.items() if k != "result"}
    elif name == "shared-cluster":
        r = run_shared_cluster()
        body = {k: v for k, v in r.items() if k != "fsp_allocations"}
        body["fsp_allocations"] = [[t, a] for t, a in r["fsp_allocations"]]
    else:
        modes = [args.preemption] if args.preemption else ["eager", "wait", "kill"]
        body = {"scenario": "preemption-bench", "modes": {}}
        for mode in modes:
            r = run_preemption_bench(mode)
            body["modes"][mode] = {"mean_sojourn": r["mean_sojourn"], "sojourn": r["sojourn"],
                                   "completion": r["completion"]}
    text = metrics.dumps_json(body)
    if args.out:
        out = resolve_output(args.out)
        write_atomic(os.path.join(out, "summary.json"), text)
    sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    path = resolve_output(args.dir)
    summary_path = os.path.join(path, "summary.json") if os.path.isdir(path) else path
    try:
        with open(summary_path, encoding="utf-8") as f:
            summary = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {summary_path}: {e}") from None
    if "schedulers" not in summary:
        raise UsageError(f"{summary_path} is not a run or compare summary")
    _print_summary(summary, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hfsp", description="HFSP / FAIR / FIFO cluster simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings from the estimator")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic workload trace")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--spec", help="WorkloadSpec JSON file")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--machines", type=int, default=100, help="scale task counts to this cluster")
    g.add_argument("--map-only", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    def run_flags(sp, many: bool):
        sp.add_argument("--config", help="RunConfig JSON file; flags override it")
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--trace")
        src.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--map-only", action="store_true")
        if many:
            sp.add_argument("--schedulers", help="comma-separated, e.g. hfsp,fair,fifo")
        else:
            sp.add_argument("--scheduler", choices=SCHEDULERS)
        sp.add_argument("--seeds", help="e.g. 3, 1,2,5 or 1..10")
        sp.add_argument("--machines", type=int)
        sp.add_argument("--heartbeat", type=float)
        sp.add_argument("--preemption", choices=("eager", "wait", "kill"))
        sp.add_argument("--alpha", type=float, help="size estimation error")
        sp.add_argument("--xi", type=float)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--sample-size", type=int)
        sp.add_argument("--max-skips", type=int, help="delay scheduling skips D")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out")

    r = sub.add_parser("run", help="simulate one scheduler and write metrics")
    run_flags(r, many=False)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="same workload and seeds across schedulers")
    run_flags(c, many=True)
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("scenario", help="replay a built-in scenario")
    s.add_argument("name", choices=("single-slot", "shared-cluster", "preemption-bench"))
    s.add_argument("--preemption", choices=("eager", "wait", "kill"))
    s.add_argument("--heartbeat", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scenario)

    rep = sub.add_parser("report", help="print the summary of a run or compare directory")
    rep.add_argument("dir")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValidationError) as e:
        print(f"hfsp {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
