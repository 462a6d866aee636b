"""Command-line front end.

Subcommands: solve (one placement on a topology file), simulate (a given
blue set), experiment (trials x strategies x budgets grid to CSV), scaling
(normalized utilization across sizes and budget rules), bench (solver
timing), generate (emit a topology file).

Exit codes: 0 success, 2 configuration error (bad arguments, unreadable or
invalid files), 3 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass, fields

from . import scenarios
from .errors import AggTreeError
from .reduce_sim import (Placement, simulate_bytes, simulate_reduce,
                         write_edge_csv)
from .scenarios import ScenarioConfig, gen_payloads, resolve_budget
from .solver import gather, color, solve
from .strategies import STRATEGY_NAMES, place
from .topology import load_topology, save_topology

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SCALING_SIZES = (256, 512, 1024, 2048, 4096)
SCALING_GUARD = 2 ** 13


@dataclass
class ExperimentRow:
    strategy: str
    n: int
    k: int
    seed: int
    rate_scheme: str
    load_dist: str
    use_case: str
    utilization: float
    normalized_vs_allred: float
    bytes: int | None
    bytes_normalized: float | None
    runtime_ms: float


ROW_FIELDS = tuple(f.name for f in fields(ExperimentRow))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _parse_id(token: str):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        return token


def _parse_ids(text: str):
    return [_parse_id(t) for t in text.split(",") if t.strip()]


# -- experiment machinery --------------------------------------------------------


def experiment_rows(config: ScenarioConfig, writer=None):
    """Yield one ExperimentRow per (trial, strategy, k).

    When ``writer`` is given, rows are also written as they are produced so
    partial results survive a failure.
    """
    for trial in range(config.trials):
        tree = config.build_instance(trial)
        allred = simulate_reduce(tree, Placement()).total
        model = None
        allred_bytes = None
        if config.use_case != "none":
            n_servers = sum(tree.load.values())
            payload_seed = config.trial_seed(trial).spawn(3)[2]
            model = gen_payloads(config.use_case, n_servers, payload_seed,
                                 **dict(config.payload))
            allred_bytes = simulate_bytes(tree, Placement(), model)[1]
        for k in config.budgets():
            for strategy in config.strategies:
                t0 = time.perf_counter()
                placement = place(strategy, tree, k)
                runtime_ms = (time.perf_counter() - t0) * 1000.0
                util = simulate_reduce(tree, placement).total
                row = ExperimentRow(
                    strategy=strategy, n=config.n, k=k, seed=config.seed,
                    rate_scheme=config.rate_scheme,
                    load_dist=config.load_dist, use_case=config.use_case,
                    utilization=util,
                    normalized_vs_allred=(1.0 if allred == 0
                                          else util / allred),
                    bytes=None, bytes_normalized=None,
                    runtime_ms=runtime_ms)
                if model is not None:
                    total = simulate_bytes(tree, placement, model)[1]
                    row.bytes = total
                    row.bytes_normalized = (1.0 if allred_bytes == 0
                                            else total / allred_bytes)
                if writer is not None:
                    writer.writerow([_fmt(getattr(row, f))
                                     for f in ROW_FIELDS])
                yield row


def summarize(rows):
    """Mean and sample standard deviation per (strategy, k) cell."""
    cells: dict = {}
    for row in rows:
        cells.setdefault((row.strategy, row.k), []).append(row)
    out = []
    for (strategy, k), group in sorted(cells.items(),
                                       key=lambda kv: (kv[0][1], kv[0][0])):
        norm = [r.normalized_vs_allred for r in group]
        util = [r.utilization for r in group]
        entry = {
            "strategy": strategy, "k": k, "trials": len(group),
            "utilization_mean": statistics.fmean(util),
            "utilization_std": (statistics.stdev(util)
                                if len(util) > 1 else 0.0),
            "normalized_mean": statistics.fmean(norm),
            "normalized_std": (statistics.stdev(norm)
                               if len(norm) > 1 else 0.0),
        }
        byte_norms = [r.bytes_normalized for r in group
                      if r.bytes_normalized is not None]
        entry["bytes_normalized_mean"] = (statistics.fmean(byte_norms)
                                          if byte_norms else "")
        out.append(entry)
    return out


def min_budget_for_reduction(make_tree, n: int, target: float,
                             k_cap: int | None = None) -> int | None:
    """Smallest budget whose optimal cost is <= (1-target) x all-red.

    Binary search over k; the optimal cost is non-increasing in k. Returns
    None when even ``k_cap`` (default: all switches) falls short.
    """
    tree = make_tree()
    allred = simulate_reduce(tree, Placement()).total
    if allred == 0:
        return 0
    hi = k_cap if k_cap is not None else tree.node_count
    goal = (1.0 - target) * allred

    def ok(k):
        return solve(tree, k).cost <= goal

    if not ok(hi):
        return None
    lo = 0
    while lo < hi:  # invariant: ok(hi), not ok(lo) unless lo==0
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return hi


# -- subcommands -----------------------------------------------------------------


def cmd_solve(args) -> int:
    tree = load_topology(args.topology)
    t0 = time.perf_counter()
    placement = place(args.strategy, tree, args.k)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    util = simulate_reduce(tree, placement)
    allred = simulate_reduce(tree, Placement()).total
    print(f"strategy: {args.strategy}")
    print(f"k: {args.k}")
    print("blue:", " ".join(str(v) for v in sorted(placement,
                                                   key=lambda x: str(x))))
    print(f"cost: {util.total}")
    norm = 1.0 if allred == 0 else util.total / allred
    print(f"normalized_vs_allred: {norm}")
    print(f"runtime_ms: {runtime_ms:.3f}")
    for v in tree.nodes():
        parent = tree.parent[v]
        print(f"edge {v}->{'d' if parent is None else parent}: "
              f"msg={util.msg[v]} cost={util.cost[v]}")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_edge_csv(fh, tree, util)
    return EXIT_OK


def cmd_simulate(args) -> int:
    tree = load_topology(args.topology)
    placement = Placement(_parse_ids(args.blue)) if args.blue else Placement()
    util = simulate_reduce(tree, placement)
    per_edge_bytes = None
    total_bytes = None
    if args.use_case != "none":
        n_servers = sum(tree.load.values())
        model = gen_payloads(args.use_case, n_servers, args.seed,
                             entry_bytes=args.entry_bytes,
                             corpus_path=args.corpus)
        per_edge_bytes, total_bytes = simulate_bytes(tree, placement, model)
    print("blue:", " ".join(str(v) for v in sorted(placement,
                                                   key=lambda x: str(x))))
    print(f"cost: {util.total}")
    if total_bytes is not None:
        print(f"bytes: {total_bytes}")
    for v in tree.nodes():
        parent = tree.parent[v]
        line = (f"edge {v}->{'d' if parent is None else parent}: "
                f"msg={util.msg[v]} cost={util.cost[v]}")
        if per_edge_bytes is not None:
            line += f" bytes={per_edge_bytes[v]}"
        print(line)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_edge_csv(fh, tree, util, per_edge_bytes)
    return EXIT_OK


def cmd_experiment(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = ScenarioConfig.from_json_dict(json.load(fh))
    rows = []
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROW_FIELDS)
        try:
            for row in experiment_rows(config, writer):
                rows.append(row)
        except Exception as exc:  # flush what we have, mark the failure
            writer.writerow(["error"] + [""] * (len(ROW_FIELDS) - 1))
            print(f"experiment aborted: {exc}", file=sys.stderr)
            raise
    summary_path = args.summary or (args.out + ".summary.csv")
    summary = summarize(rows)
    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        if summary:
            writer = csv.DictWriter(fh, fieldnames=list(summary[0]))
            writer.writeheader()
            for entry in summary:
                writer.writerow({k: _fmt(v) for k, v in entry.items()})
    print(f"wrote {len(rows)} rows to {args.out}; summary in {summary_path}")
    return EXIT_OK


def cmd_scaling(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    for n in sizes:
        if n > SCALING_GUARD:
            raise AggTreeError(f"size {n} exceeds the memory guard "
                               f"({SCALING_GUARD})")
    rules = args.k_rules.split(",") if args.k_rules else []
    targets = ([float(t) for t in args.targets.split(",")]
               if args.targets else [])
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("record", "n", "k_rule", "k", "seed",
                         "normalized", "target", "blue_fraction"))
        for n in sizes:
            for rule in rules:
                k = resolve_budget(rule, n)
                for trial in range(args.trials):
                    config = ScenarioConfig(
                        family="complete_binary", n=n, load_dist=args.loads,
                        rate_scheme=args.rates, k_values=(k,),
                        seed=args.seed, trials=args.trials,
                        strategies=("soar",))
                    tree = config.build_instance(trial)
                    allred = simulate_reduce(tree, Placement()).total
                    cost = solve(tree, k).cost
                    norm = 1.0 if allred == 0 else cost / allred
                    writer.writerow(("rule", n, rule, k, trial, repr(norm),
                                     "", ""))
            for target in targets:
                config = ScenarioConfig(
                    family="complete_binary", n=n, load_dist=args.loads,
                    rate_scheme=args.rates, k_values=(1,), seed=args.seed,
                    trials=1, strategies=("soar",))
                k_min = min_budget_for_reduction(
                    lambda: config.build_instance(0), n, target)
                fraction = "" if k_min is None else repr(k_min / n)
                writer.writerow(("target", n, "", k_min, 0, "", target,
                                 fraction))
    print(f"wrote scaling results to {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    k_values = [int(k) for k in args.k_values.split(",")]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("n", "k", "gather_ms_median", "color_ms_median"))
        for n in sizes:
            config = ScenarioConfig(family="complete_binary", n=n,
                                    load_dist=args.loads,
                                    rate_scheme=args.rates, k_values=(1,),
                                    seed=args.seed, trials=1,
                                    strategies=("soar",))
            tree = config.build_instance(0)
            for k in k_values:
                gather_times = []
                color_times = []
                for _ in range(args.trials):
                    t0 = time.perf_counter()
                    tables = gather(tree, k)
                    t1 = time.perf_counter()
                    color(tree, tables, k)
                    t2 = time.perf_counter()
                    gather_times.append((t1 - t0) * 1000.0)
                    color_times.append((t2 - t1) * 1000.0)
                writer.writerow((n, k,
                                 repr(statistics.median(gather_times)),
                                 repr(statistics.median(color_times))))
                fh.flush()
    print(f"wrote bench results to {args.out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.family == "complete_binary":
        tree = scenarios.gen_complete_binary(args.n, args.rates)
    else:
        tree = scenarios.gen_rpa(args.n, args.seed, args.rates)
    if not (args.family == "rpa" and args.loads == "unit"):
        tree = tree.with_loads(scenarios.gen_loads(tree, args.loads,
                                                   args.seed))
    save_topology(tree, args.out)
    print(f"wrote {args.family} topology (n={args.n}) to {args.out}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aggtree",
        description="Place a bounded number of in-network aggregation "
                    "switches in a tree network.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance from a topology file")
    p.add_argument("--topology", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--strategy", default="soar", choices=STRATEGY_NAMES)
    p.add_argument("--out", help="write per-edge CSV here")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("simulate", help="simulate a given blue set")
    p.add_argument("--topology", required=True)
    p.add_argument("--blue", default="", help="comma-separated switch ids")
    p.add_argument("--use-case", default="none",
                   choices=("none", "wordcount", "gradient"))
    p.add_argument("--corpus", help="plain-text corpus for wordcount")
    p.add_argument("--entry-bytes", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write per-edge CSV here")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("experiment", help="run a config-driven grid")
    p.add_argument("--config", required=True, help="scenario config JSON")
    p.add_argument("--out", required=True, help="per-row CSV path")
    p.add_argument("--summary", help="summary CSV path "
                                     "(default: <out>.summary.csv)")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("scaling", help="normalized cost across sizes")
    p.add_argument("--sizes", default=",".join(str(s) for s in SCALING_SIZES))
    p.add_argument("--k-rules", default="fraction_1pct,log_n,sqrt_n")
    p.add_argument("--targets", default="0.3,0.5,0.7",
                   help="cost-reduction targets; empty to skip")
    p.add_argument("--loads", default="powerlaw",
                   choices=("uniform", "powerlaw", "unit"))
    p.add_argument("--rates", default="constant",
                   choices=("constant", "linear", "exponential"))
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_scaling)

    p = sub.add_parser("bench", help="time the solver passes")
    p.add_argument("--sizes", default="256,512,1024,2048")
    p.add_argument("--k-values", default="4,8,16,32,64,128")
    p.add_argument("--loads", default="powerlaw",
                   choices=("uniform", "powerlaw", "unit"))
    p.add_argument("--rates", default="constant",
                   choices=("constant", "linear", "exponential"))
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("generate", help="emit a topology JSON file")
    p.add_argument("--family", default="complete_binary",
                   choices=("complete_binary", "rpa"))
    p.add_argument("--n", type=int, required=True,
                   help="network size including the destination")
    p.add_argument("--rates", default="constant",
                   choices=("constant", "linear", "exponential"))
    p.add_argument("--loads", default="powerlaw",
                   choices=("uniform", "powerlaw", "unit"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (AggTreeError, OSError, json.JSONDecodeError, ValueError,
            TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
