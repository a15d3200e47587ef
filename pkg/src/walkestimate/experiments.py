"""Configured comparison campaigns: seeded cells, atomic outputs, CSV reports.

A campaign config is one JSON document. Its cells are the product of
``methods x budgets x samples``; each cell repeats an independent run
``repetitions`` times and writes one report row. Seeds derive from the
config hash and the cell index, so a cell's row does not depend on the
worker that ran it or on the order cells finish.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .errors import ConfigError, InvalidParameter, WalkEstimateError
from .generators import balanced_tree, barabasi_albert, barbell, from_spec, hypercube
from .graph import AccessOracle, Graph
from .metrics import distribution_distance, local_clustering, relative_error, smooth_half
from .sampler import VARIANTS, WEConfig, sample_batch
from .transition import Design
from .walkers import many_short_runs_batch

__all__ = ["METHODS", "CONFIG_SCHEMA", "REPORT_COLUMNS", "WORKERS_ENV", "load_config",
           "validate_config", "config_hash", "cell_seed", "run_method", "weighted_average",
           "target_distribution", "default_diameter_bound", "run_cell", "run_config", "case_study_graph", "write_csv"]

METHODS = tuple(VARIANTS) + ("srw", "mhrw")
WORKERS_ENV = "WALKESTIMATE_WORKERS"
REPORT_COLUMNS = ["method", "budget", "samples", "aggregate", "estimate", "truth",
                  "rel_error", "l_inf", "kl", "repetitions", "empty_runs",
                  "exhausted_runs", "mean_unique_queries", "mean_total_queries",
                  "config_hash", "seed"]

_WE_KEYS = {
    "epsilon": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    "crawl_depth": {"type": "integer", "minimum": 0},
    "percentile": {"type": "number", "minimum": 0, "maximum": 100},
    "est_runs": {"type": "integer", "minimum": 1},
    "initial_runs": {"type": "integer", "minimum": 1},
    "block": {"type": "integer", "minimum": 1},
    "max_block": {"type": "integer", "minimum": 1},
    "reuse_estimates": {"type": "boolean"},
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["graph", "methods"],
    "properties": {
        "name": {"type": "string"},
        "graph": {
            "type": "object",
            "oneOf": [{"required": ["model"]}, {"required": ["edge_list"]}],
            "properties": {
                "model": {"enum": ["cycle", "hypercube", "barbell", "tree", "ba",
                                   "complete", "path"]},
                "n": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "k": {"type": "integer", "minimum": 1},
                "height": {"type": "integer", "minimum": 0},
                "seed": {"type": ["integer", "null"]},
                "edge_list": {"type": "string"},
                "attributes": {"type": "string"},
                "symmetrize": {"enum": ["intersection", "union"]},
            },
            "additionalProperties": False,
        },
        "methods": {"type": "array", "minItems": 1, "items": {"enum": list(METHODS)}},
        "budgets": {"type": "array", "minItems": 1,
                    "items": {"type": ["integer", "null"], "minimum": 0}},
        "budget_kind": {"enum": ["unique", "total"]},
        "samples": {"oneOf": [{"type": "integer", "minimum": 0},
                              {"type": "array", "minItems": 1,
                               "items": {"type": "integer", "minimum": 0}}]},
        "repetitions": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "start": {"oneOf": [{"type": "integer", "minimum": 0}, {"const": "random"}]},
        "aggregate": {"type": "string", "pattern": "^avg_"},
        "design": {"enum": ["srw", "mhrw"]},
        "lazy": {"type": "boolean"},
        "target": {"enum": ["uniform", "degree", None]},
        "walk_length": {"type": ["integer", "null"], "minimum": 1},
        "diameter_bound": {"type": ["integer", "null"], "minimum": 1},
        "geweke_z": {"type": "number", "exclusiveMinimum": 0},
        "we": {"type": "object", "properties": _WE_KEYS, "additionalProperties": False},
    },
}

_DEFAULTS = {
    "name": "campaign",
    "budgets": [None],
    "budget_kind": "unique",
    "samples": 1000,
    "repetitions": 100,
    "seed": 0,
    "start": "random",
    "aggregate": "avg_degree",
    "design": "srw",
    "lazy": False,
    "target": None,
    "walk_length": None,
    "diameter_bound": None,
    "geweke_z": 0.1,
    "we": {},
}


def validate_config(config: dict) -> dict:
    """Check ``config`` against :data:`CONFIG_SCHEMA` and fill defaults.

    Raises
    ------
    ConfigError
        With the JSON path of the first offending entry.
    """
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, list(err.absolute_path))
    cfg = copy.deepcopy(_DEFAULTS)
    cfg.update(copy.deepcopy(config))
    if isinstance(cfg["samples"], int):
        cfg["samples"] = [cfg["samples"]]
    return cfg


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("invalid JSON (%s)" % exc.msg) from None
    return validate_config(raw)


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form of a validated config (16 hex digits)."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def cell_seed(cfg: dict, index: int) -> int:
    """Integer seed of cell ``index`` from the config seed and hash."""
    h = int(config_hash(cfg), 16)
    ss = np.random.SeedSequence([cfg["seed"], h & 0xFFFFFFFF, h >> 32, index])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def case_study_graph(model: str, n: int) -> Graph:
    """Graph of about ``n`` nodes from a case-study family.

    ``hypercube`` needs ``n`` a power of two; ``barbell`` uses ``n + 1`` nodes
    so both cliques have ``n / 2``; ``tree`` is the balanced binary tree of
    ``n - 1`` nodes; ``ba`` is BA(n, 2) with seed 1.
    """
    if model == "hypercube":
        k = int(round(math.log2(n)))
        if 1 << k != n:
            raise InvalidParameter("hypercube size must be a power of two")
        return hypercube(k)
    if model == "barbell":
        return barbell(n + 1)
    if model == "tree":
        return balanced_tree(int(round(math.log2(n))) - 1)
    if model == "ba":
        return barabasi_albert(n, 2, seed=1)
    raise InvalidParameter("unknown case-study model %r" % model)


REAL_GRAPH_DIAMETER_BOUND = 7


def default_diameter_bound(graph: Graph, loaded: bool = False) -> int:
    """Diameter bound for the walk-length policy: 7 for loaded snapshots,
    the measured diameter for synthetic graphs."""
    if loaded:
        return REAL_GRAPH_DIAMETER_BOUND
    return max(1, graph.diameter())


def _we_config(method, settings, graph):
    we = dict(settings.get("we") or {})
    length = settings.get("walk_length")
    bound = settings.get("diameter_bound")
    if length is None and bound is None:
        bound = default_diameter_bound(graph)
    return WEConfig(variant=method, walk_length=length, diameter_bound=bound,
                    target=settings.get("target"), **we)


def run_method(method: str, oracle: AccessOracle, start: int, n_samples: int, rng,
               settings: Optional[dict] = None):
    """Run one sampler through ``oracle``.

    ``srw`` and ``mhrw`` are many-short-runs samplers stopped by the Geweke
    monitor; the ``we*`` methods use the input walk named by
    ``settings["design"]``.

    Returns
    -------
    records, report, target
        ``target`` names the law the accepted samples follow.
    """
    s = dict(_DEFAULTS)
    s.update(settings or {})
    if method in ("srw", "mhrw"):
        design = Design(method, lazy=s["lazy"])
        # Lock-step chains would spend a budget in parallel before any of
        # them converges; under a budget the chains run one after another.
        batch = 2048 if oracle.ledger.budget is None else 1
        records, report = many_short_runs_batch(oracle, design, start, n_samples, rng,
                                                geweke_threshold=s["geweke_z"], batch=batch)
        return records, report, design.default_target
    if method not in VARIANTS:
        raise InvalidParameter("unknown method %r" % method)
    design = Design(s["design"], lazy=s["lazy"])
    cfg = _we_config(method, s, oracle.graph)
    records, report = sample_batch(oracle, design, start, n_samples, rng, cfg)
    return records, report, cfg.target or design.default_target


def _aggregate_values(graph, aggregate):
    if aggregate == "avg_degree":
        return graph.degrees.astype(float)
    if aggregate == "avg_clustering":
        return local_clustering(graph)
    name = aggregate[len("avg_"):]
    if name not in (graph.attributes or {}):
        raise InvalidParameter("no attribute for aggregate %r" % aggregate)
    return np.asarray(graph.attributes[name], dtype=float)


def target_distribution(graph: Graph, target: str) -> np.ndarray:
    q = np.ones(graph.node_count) if target == "uniform" else graph.degrees.astype(float)
    return q / q.sum()


def weighted_average(values, nodes, graph: Graph, target: str) -> float:
    """Self-normalised importance estimate of the plain node average.

    Samples drawn from the degree-proportional law are weighted by
    ``1 / d``; for the degree itself this is the harmonic mean.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InvalidParameter("no samples")
    if target == "uniform":
        return float(x.mean())
    w = 1.0 / graph.degrees[np.asarray(nodes)].astype(float)
    return float(np.sum(w * x) / np.sum(w))


def run_cell(cfg: dict, index: int, graph: Optional[Graph] = None) -> dict:
    """Run every repetition of cell ``index`` and return its report row."""
    cells = _cells(cfg)
    method, budget, n_samples = cells[index]
    graph = from_spec(cfg["graph"]) if graph is None else graph
    seed = cell_seed(cfg, index)
    values = _aggregate_values(graph, cfg["aggregate"])
    truth = float(np.mean(values))
    n = graph.node_count
    counts = np.zeros(n, dtype=np.int64)
    ests, errs, got = [], [], []
    exhausted = 0
    uq, tq = [], []
    target = None
    settings = dict(cfg)
    if method in VARIANTS and cfg["walk_length"] is None and cfg["diameter_bound"] is None:
        settings["diameter_bound"] = default_diameter_bound(graph, "edge_list" in cfg["graph"])
    for rep in range(cfg["repetitions"]):
        rng = np.random.default_rng([seed, rep])
        start = int(rng.integers(n)) if cfg["start"] == "random" else graph.check_node(cfg["start"])
        oracle = AccessOracle(graph, budget=budget, budget_kind=cfg["budget_kind"])
        records, report, target = run_method(method, oracle, start, n_samples, rng, settings)
        nodes = np.array([r.node for r in records if r.accepted], dtype=np.int64)
        exhausted += bool(report.budget_exhausted)
        uq.append(report.unique_queries)
        tq.append(report.total_queries)
        got.append(nodes.size)
        if nodes.size:
            counts += np.bincount(nodes, minlength=n)
            est = weighted_average(values[nodes], nodes, graph, target)
            ests.append(est)
            if truth != 0:
                errs.append(relative_error(est, truth))
    row = {"method": method, "budget": "" if budget is None else budget,
           "samples": float(np.mean(got)), "aggregate": cfg["aggregate"],
           "estimate": float(np.mean(ests)) if ests else "", "truth": truth,
           "rel_error": float(np.mean(errs)) if errs else "",
           "l_inf": "", "kl": "", "repetitions": cfg["repetitions"],
           "empty_runs": int(sum(g == 0 for g in got)), "exhausted_runs": exhausted,
           "mean_unique_queries": float(np.mean(uq)), "mean_total_queries": float(np.mean(tq)),
           "config_hash": config_hash(cfg), "seed": seed}
    if counts.sum():
        q = target_distribution(graph, target)
        row["l_inf"] = distribution_distance(counts / counts.sum(), q, "l_inf")
        row["kl"] = distribution_distance(smooth_half(counts), q, "kl")
    return row


def _cells(cfg):
    return [(m, b, s) for m in cfg["methods"] for b in cfg["budgets"] for s in cfg["samples"]]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(rows, path=None, columns=None) -> str:
    """Render rows as CSV (floats in ``repr`` form); write to ``path`` atomically."""
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, "")) for k in columns})
    text = buf.getvalue()
    if path is not None:
        _atomic_write(path, text)
    return text


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-" + path.name)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell_job(args):
    cfg, index, out_dir = args
    try:
        row = run_cell(cfg, index)
    except WalkEstimateError as exc:
        return index, None, {"error": type(exc).__name__, "message": str(exc), "cell": index}
    write_csv([row], Path(out_dir) / "cells" / ("cell_%04d.csv" % index), REPORT_COLUMNS)
    return index, row, None


def _workers(workers):
    if workers is not None:
        return max(1, int(workers))
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError("%s must be an integer, got %r" % (WORKERS_ENV, raw)) from None


def run_config(cfg: dict, out_dir, workers: Optional[int] = None) -> dict:
    """Run every cell of a validated config and write the reports.

    Writes ``cells/cell_NNNN.csv`` per cell, then ``results.csv`` and
    ``summary.json`` under ``out_dir``. Cells can run in a process pool
    (``workers``, or the ``WALKESTIMATE_WORKERS`` environment variable).

    Returns
    -------
    dict
        The JSON summary; ``completed`` is false when any cell failed.
    """
    cfg = validate_config(cfg)
    from_spec(cfg["graph"])  # fail early on an unreadable graph
    out_dir = Path(out_dir)
    jobs = [(cfg, i, str(out_dir)) for i in range(len(_cells(cfg)))]
    nw = _workers(workers)
    if nw == 1 or len(jobs) == 1:
        results = [_cell_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(_cell_job, jobs))
    results.sort(key=lambda r: r[0])
    rows = [r for _, r, _ in results if r is not None]
    errors = [e for _, _, e in results if e is not None]
    write_csv(rows, out_dir / "results.csv", REPORT_COLUMNS)
    summary = {"name": cfg["name"], "config_hash": config_hash(cfg), "config": cfg,
               "cells": len(jobs), "completed": not errors, "errors": errors,
               "partial": any(r["exhausted_runs"] or r["empty_runs"] for r in rows),
               "rows": rows}
    _atomic_write(out_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
