"""Command-line entry point: ``walkestimate <subcommand> [options]``.

Subcommands
-----------
generate  write a synthetic graph as an edge list
analyze   JSON summary of a graph and a walk design
walk      classic walk samples as CSV (chain_id, step, node, degree)
sample    sampler output as CSV (one row per decided candidate)
ideal     curves and ratios of the idealised walk-then-reject sampler
bias      empirical sampling distribution against the target law
run       a JSON campaign config

Errors are printed to stderr as one JSON object and give a non-zero exit
code: 2 for bad arguments or configs, 3 for unreadable inputs, 4 for
runtime failures, 5 for I/O errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidParameter, ParseError, WalkEstimateError
from .experiments import (METHODS, case_study_graph, default_diameter_bound, load_config,
                          run_config, run_method, target_distribution, write_csv)
from .generators import from_spec, load_edge_list, write_edge_list
from .graph import AccessOracle
from .ideal import (IdealParams, case_study_ratio, cycle_cost_AR, exact_ideal_cost_curve,
                    ideal_cost, t_opt)
from .metrics import distribution_distance, ground_truth, sampling_frequencies, smooth_half
from .transition import (Design, burn_in_length, spectral_summary, stationary_for,
                         transition_matrix)
from .walkers import many_short_runs_batch, one_long_run

__all__ = ["build_parser", "main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _graph_args(p):
    g = p.add_argument_group("graph")
    g.add_argument("--graph", help="edge-list file")
    g.add_argument("--symmetrize", choices=["intersection", "union"], default="intersection")
    g.add_argument("--attributes", help="node attribute file")
    g.add_argument("--model", choices=["cycle", "hypercube", "barbell", "tree", "ba",
                                       "complete", "path"])
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int, default=5)
    g.add_argument("--k", type=int)
    g.add_argument("--height", type=int)
    g.add_argument("--graph-seed", type=int)


def _load_graph(a):
    if a.graph:
        return load_edge_list(a.graph, a.symmetrize, a.attributes)
    if not a.model:
        raise ConfigError("give --graph FILE or --model NAME")
    spec = {"model": a.model, "m": a.m, "seed": a.graph_seed}
    for key in ("n", "k", "height"):
        if getattr(a, key) is not None:
            spec[key] = getattr(a, key)
    return from_spec(spec)


def _design_args(p, default="srw"):
    p.add_argument("--design", choices=["srw", "mhrw"], default=default)
    p.add_argument("--lazy", action="store_true", help="hold with probability 1/2 each step")


def _out(text, path):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_generate(a):
    g = _load_graph(a)
    _out(write_edge_list(g), a.out)
    return 0


def cmd_analyze(a):
    g = _load_graph(a)
    design = Design(a.design, lazy=a.lazy)
    info = {"n": g.node_count, "edges": g.edge_count, "d_min": g.d_min, "d_max": g.d_max,
            "diameter": g.diameter(), "connected": g.is_connected(), "design": design.name}
    if g.is_connected() and g.node_count > 1:
        T = transition_matrix(g, design, sparse=g.node_count > 2000)
        pi = stationary_for(g, design)
        summ = spectral_summary(T, pi)
        info["lambda"] = summ.spectral_gap
        info["second_eigenvalue"] = summ.second_eigenvalue
        info["stationary"] = {"target": design.default_target, "min": float(pi.min()),
                              "max": float(pi.max())}
        info["burn_in"] = None
        info["burn_in_eps"] = a.eps
        if g.node_count <= a.dense_limit:
            try:
                info["burn_in"] = burn_in_length(T, a.eps, cap=a.burn_in_cap, pi=pi)
            except WalkEstimateError:
                pass
    info["ground_truth"] = ground_truth(g)
    _out(json.dumps(info, indent=2, sort_keys=True) + "\n", a.out)
    return 0


def cmd_walk(a):
    g = _load_graph(a)
    design = Design(a.design, lazy=a.lazy)
    rng = np.random.default_rng(a.seed)
    oracle = AccessOracle(g, budget=a.budget)
    start = int(rng.integers(g.node_count)) if a.start is None else g.check_node(a.start)
    if a.mode == "short":
        records, _ = many_short_runs_batch(oracle, design, start, a.samples, rng,
                                           geweke_threshold=a.geweke_z)
        rows = [{"chain_id": i, "step": r.walk_length, "node": r.node,
                 "degree": g.degree(r.node)} for i, r in enumerate(records)]
    else:
        records = one_long_run(oracle, design, start, a.burn_in, a.samples, rng)
        rows = [{"chain_id": 0, "step": r.walk_length, "node": r.node,
                 "degree": g.degree(r.node)} for r in records]
    _out(write_csv(rows, columns=["chain_id", "step", "node", "degree"]), a.out)
    return 0


def _settings(a, g):
    we = {"epsilon": a.epsilon, "crawl_depth": a.crawl_depth, "percentile": a.percentile,
          "est_runs": a.est_runs}
    bound = a.diameter_bound
    if bound is None and a.walk_length is None and a.method not in ("srw", "mhrw"):
        bound = default_diameter_bound(g, loaded=bool(a.graph))
    return {"design": a.design, "lazy": a.lazy, "target": a.target,
            "walk_length": a.walk_length, "diameter_bound": bound,
            "geweke_z": a.geweke_z, "we": we}


def _sample_args(p):
    p.add_argument("--method", choices=list(METHODS), default="we")
    _design_args(p)
    p.add_argument("--target", choices=["uniform", "degree"])
    p.add_argument("--walk-length", type=int)
    p.add_argument("--diameter-bound", type=int)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--crawl-depth", type=int, default=2)
    p.add_argument("--percentile", type=float, default=10.0)
    p.add_argument("--est-runs", type=int, default=10)
    p.add_argument("--geweke-z", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", type=int)


def cmd_sample(a):
    g = _load_graph(a)
    rng = np.random.default_rng(a.seed)
    start = int(rng.integers(g.node_count)) if a.start is None else g.check_node(a.start)
    oracle = AccessOracle(g, budget=a.budget, budget_kind=a.budget_kind)
    records, report, _ = run_method(a.method, oracle, start, a.samples, rng, _settings(a, g))
    rows = [{"sample_id": i, "node": r.node, "t": r.walk_length,
             "p_est": "" if r.p_est is None else r.p_est,
             "beta": "" if r.beta is None else r.beta,
             "accepted": int(r.accepted), "cum_unique_queries": r.unique_queries}
            for i, r in enumerate(records)]
    _out(write_csv(rows, columns=["sample_id", "node", "t", "p_est", "beta", "accepted",
                                  "cum_unique_queries"]), a.out)
    if a.report:
        Path(a.report).write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
    return 0


def cmd_ideal(a):
    if a.kind == "curve":
        params = IdealParams(a.lam, a.d_max, a.d_max if a.gamma is None else a.gamma, a.delta)
        t_max = a.t_max or max(10, int(math.ceil(4 * t_opt(params))))
        ts = np.arange(1, t_max + 1)
        rows = [{"t": int(t), "f": float(f)} for t, f in zip(ts, ideal_cost(params, ts))]
        text = write_csv(rows, columns=["t", "f"])
    elif a.kind == "ratios":
        rows = []
        for model in a.models.split(","):
            for n in (int(s) for s in a.sizes.split(",")):
                r = case_study_ratio(case_study_graph(model, n), delta=a.delta)
                rows.append({"model": model, "n": n, "improvement_ratio": r["ratio"],
                             "c": r["c"], "c_rw": r["c_rw"], "t_best": r["t_best"],
                             "lambda": r["lam"]})
        text = write_csv(rows, columns=["model", "n", "improvement_ratio", "c", "c_rw",
                                        "t_best", "lambda"])
    elif a.kind == "exact":
        g = _load_graph(a)
        design = Design(a.design, lazy=a.lazy)
        start = g.peripheral_node() if a.start is None else g.check_node(a.start)
        c = exact_ideal_cost_curve(g, design, start, a.t_max or 4 * max(1, g.diameter()))
        rows = [{"t": t, "cost": float(v)} for t, v in enumerate(c) if t >= 1]
        text = write_csv(rows, columns=["t", "cost"])
    else:
        k_max = a.t_max or a.l * a.l
        rows = [{"k": k, "c_ar": cycle_cost_AR(a.l, k)} for k in range(1, k_max + 1)]
        text = write_csv(rows, columns=["k", "c_ar"])
    _out(text, a.out)
    return 0


def cmd_bias(a):
    g = _load_graph(a)
    rng = np.random.default_rng(a.seed)
    start = int(rng.integers(g.node_count)) if a.start is None else g.check_node(a.start)
    n_samples = a.samples or 100 * g.node_count
    oracle = AccessOracle(g, budget=a.budget, budget_kind=a.budget_kind)
    records, report, target = run_method(a.method, oracle, start, n_samples, rng, _settings(a, g))
    nodes = [r.node for r in records if r.accepted]
    if not nodes:
        raise InvalidParameter("no accepted samples within the budget")
    freq = sampling_frequencies(nodes, g.node_count)
    counts = np.bincount(nodes, minlength=g.node_count)
    q = target_distribution(g, target)
    rows = [{"node": v, "degree": int(g.degrees[v]), "frequency": float(freq[v]),
             "target": float(q[v])} for v in range(g.node_count)]
    _out(write_csv(rows, columns=["node", "degree", "frequency", "target"]), a.out)
    summary = {"method": a.method, "target": target, "samples": len(nodes),
               "l_inf": distribution_distance(freq, q, "l_inf"),
               "kl": distribution_distance(smooth_half(counts), q, "kl"),
               "unique_queries": report.unique_queries, "total_queries": report.total_queries}
    text = json.dumps(summary, sort_keys=True) + "\n"
    if a.summary:
        Path(a.summary).write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)
    return 0


def cmd_run(a):
    cfg = load_config(a.config)
    summary = run_config(cfg, a.out, workers=a.workers)
    if not summary["completed"]:
        sys.stderr.write(json.dumps({"error": "CellFailed", "errors": summary["errors"]}) + "\n")
        return 4
    sys.stdout.write(json.dumps({"out": str(a.out), "cells": summary["cells"],
                                 "partial": summary["partial"],
                                 "config_hash": summary["config_hash"]}) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="walkestimate", description="Random-walk node sampling toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("generate", help="write a synthetic graph as an edge list")
    _graph_args(s)
    s.add_argument("--out")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("analyze", help="graph and walk summary as JSON")
    _graph_args(s)
    _design_args(s)
    s.add_argument("--eps", type=float, default=0.1, help="burn-in accuracy")
    s.add_argument("--burn-in-cap", type=int, default=100_000)
    s.add_argument("--dense-limit", type=int, default=2000)
    s.add_argument("--out")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("walk", help="classic walk samples")
    _graph_args(s)
    _design_args(s)
    s.add_argument("--mode", choices=["short", "long"], default="short")
    s.add_argument("--geweke-z", type=float, default=0.1)
    s.add_argument("--burn-in", type=int, default=1000)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--start", type=int)
    s.add_argument("--budget", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_walk)

    s = sub.add_parser("sample", help="draw samples with one method")
    _graph_args(s)
    _sample_args(s)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--budget", type=int)
    s.add_argument("--budget-kind", choices=["unique", "total"], default="unique")
    s.add_argument("--report", help="write the run report as JSON here")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("ideal", help="idealised sampler curves")
    s.add_argument("kind", choices=["curve", "ratios", "exact", "cycle"])
    _graph_args(s)
    _design_args(s, default="mhrw")
    s.add_argument("--lam", type=float, default=0.1)
    s.add_argument("--d-max", type=float, default=10.0)
    s.add_argument("--gamma", type=float)
    s.add_argument("--delta", type=float, default=1e-3)
    s.add_argument("--t-max", type=int)
    s.add_argument("--models", default="hypercube,barbell,tree,ba")
    s.add_argument("--sizes", default="32,64,128")
    s.add_argument("--l", type=int, default=5, help="cycle length")
    s.add_argument("--start", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_ideal)

    s = sub.add_parser("bias", help="empirical sampling distribution")
    _graph_args(s)
    _sample_args(s)
    s.add_argument("--samples", type=int, help="default 100 * n")
    s.add_argument("--budget", type=int)
    s.add_argument("--budget-kind", choices=["unique", "total"], default="unique")
    s.add_argument("--summary", help="write l_inf/KL summary JSON here instead of stderr")
    s.add_argument("--out")
    s.set_defaults(func=cmd_bias)

    s = sub.add_parser("run", help="run a JSON campaign config")
    s.add_argument("config")
    s.add_argument("--out", default="results")
    s.add_argument("--workers", type=int, help="overrides WALKESTIMATE_WORKERS")
    s.set_defaults(func=cmd_run)
    return p


def _error(exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    path = getattr(exc, "path", None)
    if path is not None and not isinstance(exc, OSError):
        payload["path"] = list(path)
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ConfigError, InvalidParameter) as exc:
        return _error(exc, 2)
    except ParseError as exc:
        return _error(exc, 3)
    except WalkEstimateError as exc:
        return _error(exc, 4)
    except OSError as exc:
        return _error(exc, 5)


if __name__ == "__main__":
    sys.exit(main())
