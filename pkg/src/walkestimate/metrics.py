"""Aggregate estimates, relative error and sampling-distribution distances."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .errors import InvalidParameter
from .graph import Graph

__all__ = ["avg_estimate", "relative_error", "sampling_frequencies",
           "empirical_sampling_distribution", "smooth_half", "distribution_distance",
           "avg_degree", "avg_attribute", "local_clustering", "avg_clustering", "avg_shortest_path",
           "ground_truth"]


def avg_estimate(values, weighting: str = "arithmetic") -> float:
    """Mean of sampled attribute values.

    ``"harmonic"`` gives ``k / sum(1 / x_i)``, the estimator of the plain
    average when nodes were drawn proportionally to ``x`` itself (degree
    samples estimating average degree).
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InvalidParameter("no samples")
    if weighting == "arithmetic":
        return float(x.mean())
    if weighting == "harmonic":
        if np.any(x <= 0):
            raise InvalidParameter("harmonic mean needs positive values")
        return float(x.size / np.sum(1.0 / x))
    raise InvalidParameter("weighting must be 'arithmetic' or 'harmonic'")


def relative_error(estimate: float, truth: float) -> float:
    """``|estimate - truth| / |truth|``."""
    if truth == 0:
        raise InvalidParameter("relative error undefined for a zero truth")
    return abs(estimate - truth) / abs(truth)


def sampling_frequencies(nodes, node_count: int) -> np.ndarray:
    """Visit frequencies of sampled nodes, normalised to sum to 1."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        raise InvalidParameter("no samples")
    counts = np.bincount(nodes, minlength=node_count)
    if counts.size > node_count:
        raise InvalidParameter("node id out of range")
    return counts / counts.sum()


def empirical_sampling_distribution(sampler: Callable[[], object], graph: Graph,
                                    repetitions: Optional[int] = None) -> np.ndarray:
    """Run ``sampler`` repeatedly and return node visit frequencies.

    ``sampler()`` returns a node id or an iterable of node ids; repetitions
    default to ``100 * n``.
    """
    n = graph.node_count
    reps = 100 * n if repetitions is None else repetitions
    if reps < 1:
        raise InvalidParameter("repetitions must be >= 1")
    out = []
    for _ in range(reps):
        r = sampler()
        if np.ndim(r) == 0:
            out.append(int(r))
        else:
            out.extend(int(v) for v in r)
    return sampling_frequencies(out, n)


def smooth_half(counts) -> np.ndarray:
    """Add one half to every cell of a count vector and renormalise."""
    c = np.asarray(counts, dtype=float) + 0.5
    return c / c.sum()


def distribution_distance(p, q, measure: str = "l_inf") -> float:
    """``max |p - q|`` or ``KL(p || q) = sum p log(p / q)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InvalidParameter("distributions have different supports")
    if measure == "l_inf":
        return float(np.max(np.abs(p - q)))
    if measure == "kl":
        pos = p > 0
        if np.any(q[pos] <= 0):
            raise InvalidParameter("KL needs q > 0 wherever p > 0")
        return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))
    raise InvalidParameter("measure must be 'l_inf' or 'kl'")


def avg_degree(graph: Graph) -> float:
    return float(graph.degrees.mean())


def avg_attribute(graph: Graph, name: str) -> float:
    vals = graph.attributes[name]
    return float(np.nanmean(vals))


def local_clustering(graph: Graph) -> np.ndarray:
    """Per-node clustering coefficient; nodes of degree < 2 get 0."""
    A = graph.adjacency_matrix().astype(np.float64)
    tri = np.asarray((A @ A).multiply(A).sum(axis=1)).ravel() / 2.0
    d = graph.degrees.astype(float)
    pairs = d * (d - 1) / 2.0
    return np.where(pairs > 0, tri / np.where(pairs > 0, pairs, 1.0), 0.0)


def avg_clustering(graph: Graph) -> float:
    """Mean local clustering coefficient."""
    return float(local_clustering(graph).mean())


def avg_shortest_path(graph: Graph, limit: int = 2000) -> Optional[float]:
    """Mean hop distance over connected ordered pairs; ``None`` above ``limit`` nodes."""
    n = graph.node_count
    if n > limit:
        return None
    D = shortest_path(sp.csr_matrix(graph.adjacency_matrix()), unweighted=True, directed=False)
    off = ~np.eye(n, dtype=bool) & np.isfinite(D)
    return float(D[off].mean()) if off.any() else 0.0


def ground_truth(graph: Graph) -> dict:
    """Exact aggregates used as reference values."""
    out = {"avg_degree": avg_degree(graph), "avg_clustering": avg_clustering(graph)}
    asp = avg_shortest_path(graph)
    if asp is not None:
        out["avg_shortest_path"] = asp
    for name in sorted(graph.attributes or {}):
        out["avg_" + name] = avg_attribute(graph, name)
    return out
