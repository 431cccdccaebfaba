"""Command-line experiment driver.

Subcommands expose each module; `experiment` runs a JSON-described grid and
writes plot-ready CSV plus a JSON summary with least-squares trend fits.
Every output embeds the fully resolved parameters and seeds, and contains no
wall-clock state, so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import birth_death as bd
from . import drift as drift_mod
from . import graphs as graphs_mod
from . import simulate as sim
from . import spectral as spectral_mod

__all__ = ["ExperimentSpec", "run_experiment", "ols_fit", "main"]

KINDS = ("fig1_mixing", "fig2_drift", "fig3_er_hitting", "fig4_dreg_hitting", "thresholds", "custom")


@dataclasses.dataclass
class ExperimentSpec:
    """Grid description for run_experiment; seeds are explicit, never wall-clock."""

    kind: str
    seed: int
    n_values: list
    alphas: list
    replicates: int = 10
    graphs_per_n: int = 5
    epsilon: float = 0.25
    t_max: float = 1e6
    d: int = 10
    k: int = 1
    mean_degree_log_factor: float = 2.0  # ER mean degree = factor * log(n)
    t_cap: float = 1e7
    drift_n: int | None = 100
    y_step: float = 0.01
    out_prefix: str = "experiment"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "thresholds" and (not self.n_values or not self.alphas):
            raise ValueError("parameter grids must be nonempty")
        if self.seed is None:
            raise ValueError("seed is required (no wall-clock seeding)")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        data = json.loads(text)
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def ols_fit(x, y):
    """Least-squares line fit: returns (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit")
    xm, ym = x.mean(), y.mean()
    sxx = ((x - xm) ** 2).sum()
    slope = ((x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    sst = ((y - ym) ** 2).sum()
    r2 = 1.0 - float((resid**2).sum() / sst) if sst > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path, spec_dict, header, rows):
    with open(path, "w") as f:
        f.write("# spec " + json.dumps(spec_dict, sort_keys=True) + "\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _make_graph(kind, n, spec, graph_index):
    seed = int(
        np.random.SeedSequence(spec.seed, spawn_key=(n, graph_index)).generate_state(1)[0]
    )
    if kind == "er":
        return graphs_mod.erdos_renyi(n, spec.mean_degree_log_factor * math.log(n), seed), seed
    return graphs_mod.random_regular(n, spec.d, seed), seed


def _hitting_task(args):
    kind, n, alpha, graph_index, spec_dict = args
    spec = ExperimentSpec(**spec_dict)
    g, gseed = _make_graph(kind, n, spec, graph_index)
    run_seed = int(
        np.random.SeedSequence(spec.seed, spawn_key=(n, graph_index, int(alpha * 1e6))).generate_state(1)[0]
    )
    cfg = sim.SimConfig(
        alpha=alpha, seed=run_seed, t_max=spec.t_max, k=spec.k, stop=sim.half_levels(n)
    )
    records, _ = sim.run_batch(g, sim.OpinionState.zeros(n), cfg, spec.replicates)
    rows = [
        (n, alpha, graph_index, gseed, i, r.seed, "" if r.hit_time is None else r.hit_time,
         int(r.censored), r.events)
        for i, r in enumerate(records)
    ]
    return (n, alpha, graph_index), rows, [r.hit_time for r in records]


def _experiment_hitting(spec: ExperimentSpec, out_prefix: str, kind: str, workers: int) -> dict:
    tasks = [
        (kind, n, alpha, gi, spec.to_dict())
        for n in spec.n_values
        for alpha in spec.alphas
        for gi in range(spec.graphs_per_n)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_hitting_task, tasks))
    else:
        results = [_hitting_task(t) for t in tasks]
    results.sort(key=lambda item: item[0])
    rows = [r for _, chunk, _ in results for r in chunk]
    _write_csv(
        f"{out_prefix}.csv",
        spec.to_dict(),
        ["n", "alpha", "graph_index", "graph_seed", "replicate", "run_seed", "hit_time", "censored", "events"],
        rows,
    )
    summary = {"spec": spec.to_dict(), "pooled": {}, "fits": {}}
    for alpha in spec.alphas:
        means, ns = [], []
        for n in spec.n_values:
            hits = [
                h
                for (key, _, hlist) in results
                if key[0] == n and key[1] == alpha
                for h in hlist
                if h is not None
            ]
            total = spec.graphs_per_n * spec.replicates
            pooled = {
                "n": n,
                "count": len(hits),
                "censored": total - len(hits),
                "mean": float(np.mean(hits)) if hits else None,
                "stderr": float(np.std(hits, ddof=1) / math.sqrt(len(hits))) if len(hits) > 1 else None,
            }
            summary["pooled"].setdefault(str(alpha), []).append(pooled)
            if hits:
                means.append(np.mean(hits))
                ns.append(n)
        fits = {}
        if len(ns) >= 2:
            slope, intercept, r2 = ols_fit(np.log(ns), means)
            fits["t_vs_log_n"] = {"slope": slope, "intercept": intercept, "r2": r2}
            if all(m > 0 for m in means):
                slope, intercept, r2 = ols_fit(ns, np.log(means))
                fits["log_t_vs_n"] = {"slope": slope, "intercept": intercept, "r2": r2}
        summary["fits"][str(alpha)] = fits
    _write_json(f"{out_prefix}_summary.json", summary)
    return summary


def _experiment_fig1(spec: ExperimentSpec, out_prefix: str) -> dict:
    rows = []
    summary = {"spec": spec.to_dict(), "fits": {}}
    for alpha in spec.alphas:
        ns, tms = [], []
        for n in spec.n_values:
            try:
                tm = bd.mixing_time(
                    bd.complete_rates(n, alpha), epsilon=spec.epsilon, t_cap=spec.t_cap
                )
                rows.append((n, alpha, tm, "ok"))
                ns.append(n)
                tms.append(tm)
            except bd.CapExceededError:
                rows.append((n, alpha, "", "cap_exceeded"))
        fits = {}
        if len(ns) >= 2:
            slope, intercept, r2 = ols_fit(ns, np.log(tms))
            fits["log_t_vs_n"] = {"slope": slope, "intercept": intercept, "r2": r2}
            slope, intercept, r2 = ols_fit(np.log(ns), tms)
            fits["t_vs_log_n"] = {"slope": slope, "intercept": intercept, "r2": r2}
        summary["fits"][str(alpha)] = fits
    _write_csv(f"{out_prefix}.csv", spec.to_dict(), ["n", "alpha", "t_mix", "status"], rows)
    _write_json(f"{out_prefix}_summary.json", summary)
    return summary


def _experiment_fig2(spec: ExperimentSpec, out_prefix: str) -> dict:
    rows = []
    summary = {"spec": spec.to_dict(), "sign_changes": {}}
    ys = np.arange(0.0, 1.0 + spec.y_step / 2, spec.y_step)
    for alpha in spec.alphas:
        vals = [drift_mod.f_complete(y, spec.drift_n, alpha) for y in ys]
        rows.extend((alpha, y, v) for y, v in zip(ys, vals))
        signs = np.sign([v for v in vals if v != 0.0])
        summary["sign_changes"][str(alpha)] = int((np.diff(signs) != 0).sum())
    _write_csv(f"{out_prefix}.csv", spec.to_dict(), ["alpha", "y", "f"], rows)
    _write_json(f"{out_prefix}_summary.json", summary)
    return summary


def _experiment_thresholds(spec: ExperimentSpec, out_prefix: str) -> dict:
    entries = []
    for n in spec.n_values or [None]:
        if n is None:
            continue
        g, gseed = _make_graph("dreg", n, spec, 0)
        summary = spectral_mod.spectral_summary(g)
        entry = {"n": n, "graph_seed": gseed, "spectral": summary.to_json_dict(), "alphas": {}}
        for alpha in spec.alphas:
            th = drift_mod.thresholds_general(summary, alpha)
            entry["alphas"][str(alpha)] = dataclasses.asdict(th)
        entries.append(entry)
    payload = {"spec": spec.to_dict(), "instances": entries}
    _write_json(f"{out_prefix}_summary.json", payload)
    return payload


def run_experiment(spec: ExperimentSpec, out_dir: str = ".", workers: int = 1) -> dict:
    """Run the experiment grid and write <prefix>.csv / <prefix>_summary.json."""
    prefix = f"{out_dir}/{spec.out_prefix}"
    if spec.kind == "fig1_mixing":
        return _experiment_fig1(spec, prefix)
    if spec.kind == "fig2_drift":
        return _experiment_fig2(spec, prefix)
    if spec.kind == "fig3_er_hitting":
        return _experiment_hitting(spec, prefix, "er", workers)
    if spec.kind == "fig4_dreg_hitting":
        return _experiment_hitting(spec, prefix, "dreg", workers)
    if spec.kind == "thresholds":
        return _experiment_thresholds(spec, prefix)
    # custom: a single hitting-time batch on one explicit graph family point
    return _experiment_hitting(spec, prefix, "er", workers)


# -- argument parsing --------------------------------------------------------------


def _add_graph_args(p, required=True):
    p.add_argument("--graph", choices=["complete", "er", "dreg", "file"], required=required)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--mean-degree", type=float)
    p.add_argument("--graph-seed", type=int, default=0)
    p.add_argument("--path", help="edge-list file for --graph file")


def _build_graph(args) -> graphs_mod.Graph:
    if args.graph == "file":
        if not args.path:
            raise SystemExit("--path is required with --graph file")
        return graphs_mod.read_edge_list(args.path)
    if args.n is None:
        raise SystemExit("--n is required")
    if args.graph == "complete":
        return graphs_mod.complete_graph(args.n)
    if args.graph == "er":
        md = args.mean_degree if args.mean_degree is not None else 2.0 * math.log(args.n)
        return graphs_mod.erdos_renyi(args.n, md, args.graph_seed)
    return graphs_mod.random_regular(args.n, args.d, args.graph_seed)


def _parse_range(text):
    # "20:120:10" -> [20, 30, ..., 120]; "20,30,40" -> [20, 30, 40]
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",")]


def _cmd_analyze_complete(args) -> int:
    ns = _parse_range(args.sweep) if args.sweep else [args.n]
    if ns == [None]:
        raise SystemExit("provide --n or --sweep")
    mixing_rows, hitting_rows = [], []
    for n in ns:
        spec = bd.complete_rates(n, args.alpha)
        try:
            tm = bd.mixing_time(spec, epsilon=args.epsilon, t_cap=args.t_cap)
            mixing_rows.append((n, args.alpha, tm, "ok"))
        except bd.CapExceededError as exc:
            mixing_rows.append((n, args.alpha, "", f"cap_exceeded:{exc.t_cap:g}"))
        targets = sim.half_levels(n)
        hitting_rows.append((n, args.alpha, args.a0, bd.expected_hitting_time(spec, args.a0, targets)))
    meta = {
        "alpha": args.alpha, "epsilon": args.epsilon, "n_values": ns,
        "a0": args.a0, "t_cap": args.t_cap,
    }
    _write_csv(f"{args.out}_mixing.csv", meta, ["n", "alpha", "t_mix", "status"], mixing_rows)
    _write_csv(f"{args.out}_hitting.csv", meta, ["n", "alpha", "a0", "expected_t_half"], hitting_rows)
    print(f"wrote {args.out}_mixing.csv and {args.out}_hitting.csv")
    return 0


def _cmd_simulate(args) -> int:
    g = _build_graph(args)
    if args.init == "zeros":
        initial = sim.OpinionState.zeros(g.n)
    elif args.init == "ones":
        initial = sim.OpinionState.ones(g.n)
    else:
        initial = sim.OpinionState.random_fraction(g.n, float(args.init), args.seed)
    if args.stop == "half":
        stop = sim.half_levels(g.n)
    elif args.stop == "none":
        stop = None
    else:
        stop = frozenset({int(args.stop)})
    cfg = sim.SimConfig(
        alpha=args.alpha, seed=args.seed, t_max=args.t_max, k=args.k, stop=stop
    )
    records, summary = sim.run_batch(g, initial, cfg, args.replicates)
    meta = {
        "graph": args.graph, "n": g.n, "alpha": args.alpha, "k": args.k,
        "init": args.init, "replicates": args.replicates, "seed": args.seed,
        "t_max": args.t_max, "stop": sorted(stop) if stop else None,
    }
    rows = [
        (i, r.seed, "" if r.hit_time is None else r.hit_time, int(r.censored), r.events)
        for i, r in enumerate(records)
    ]
    _write_csv(f"{args.out}.csv", meta, ["replicate", "seed", "hit_time", "censored", "events"], rows)
    _write_json(f"{args.out}_summary.json", {"config": meta, "summary": dataclasses.asdict(summary)})
    print(f"wrote {args.out}.csv and {args.out}_summary.json")
    return 0


def _cmd_drift(args) -> int:
    ys = np.arange(0.0, 1.0 + args.step / 2, args.step)
    if args.kind == "complete":
        vals = [drift_mod.f_complete(y, args.n, args.alpha) for y in ys]
    elif args.kind == "2k":
        vals = [drift_mod.f_2k(y, args.k, args.alpha) for y in ys]
    else:
        vals = [drift_mod.F_general(y, args.alpha, args.sigma_l, args.delta_l) for y in ys]
    meta = vars(args).copy()
    for drop in ("func", "out"):
        meta.pop(drop, None)
    _write_csv(f"{args.out}.csv", meta, ["y", "f"], list(zip(ys, vals)))
    print(f"wrote {args.out}.csv")
    return 0


def _cmd_spectral(args) -> int:
    g = _build_graph(args)
    summary = spectral_mod.spectral_summary(g)
    payload = summary.to_json_dict()
    if args.out:
        _write_json(args.out, payload)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_thresholds(args) -> int:
    if args.lam is not None:
        summary = spectral_mod.summary_from_lambda(args.lam, args.d_min, args.d_max)
    elif args.graph is None:
        raise SystemExit("provide either --lam or --graph")
    else:
        summary = spectral_mod.spectral_summary(_build_graph(args))
    th = drift_mod.thresholds_general(summary, args.alpha)
    payload = {"spectral": summary.to_json_dict(), "alpha": args.alpha, "thresholds": dataclasses.asdict(th)}
    if args.out:
        _write_json(args.out, payload)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_experiment(args) -> int:
    with open(args.spec) as f:
        spec = ExperimentSpec.from_json(f.read())
    summary = run_experiment(spec, out_dir=args.out_dir, workers=args.workers)
    print(json.dumps({"kind": spec.kind, "fits": summary.get("fits", {})}, indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twochoices",
        description="Analyze and simulate the 2-choices consensus dynamics with node failures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-complete", help="exact mixing/hitting times of the count chain on K_n")
    p.add_argument("--n", type=int)
    p.add_argument("--sweep", help="n range start:stop:step or comma list")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--a0", type=int, default=0)
    p.add_argument("--t-cap", type=float, default=1e7)
    p.add_argument("--out", default="analyze")
    p.set_defaults(func=_cmd_analyze_complete)

    p = sub.add_parser("simulate", help="event-driven simulation batches")
    _add_graph_args(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--init", default="zeros", help="zeros | ones | fraction in [0,1]")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-max", type=float, default=1e3)
    p.add_argument("--stop", default="half", help="half | none | integer level")
    p.add_argument("--out", default="simulate")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("drift", help="CSV sweep of a drift function")
    p.add_argument("--kind", choices=["complete", "2k", "general"], default="complete")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma-l", type=float, default=2.0)
    p.add_argument("--delta-l", type=float, default=0.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out", default="drift")
    p.set_defaults(func=_cmd_drift)

    p = sub.add_parser("spectral", help="spectral summary JSON for a graph")
    _add_graph_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_spectral)

    p = sub.add_parser("thresholds", help="phase-transition thresholds for a graph or eigenvalue")
    _add_graph_args(p, required=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lam", type=float, help="use this eigenvalue instead of a graph instance")
    p.add_argument("--d-min", type=int, default=1)
    p.add_argument("--d-max", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("experiment", help="run a JSON experiment spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_experiment)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
