"""Backward-walk estimation of step probabilities ``p_t(u)``.

A backward run starts at the candidate ``u`` at step ``t`` and repeatedly
moves to a predecessor ``u'`` chosen from ``C(u)``, the neighbours of ``u``
plus ``u`` itself when the design has a self-loop there. The running weight
is multiplied by ``T(u' -> u) / pi(u')`` where ``pi`` is the selection law, so
the final value has expectation ``p_t(u)`` whatever ``pi`` is (as long as it
covers ``C(u)``). For the plain simple random walk with uniform ``pi`` this is
the familiar ``|N(u)| / |N(u')|`` product.

The run stops at step 0 (value: weight if at the start node, else 0) or,
when an initial crawl of depth ``h`` is available, as soon as it reaches step
``h`` where ``p_h`` is known exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExhausted, DeadEnd, InvalidParameter
from .graph import AccessOracle
from .transition import Design

__all__ = ["ProbEstimate", "HistoricHits", "CrawlFrontier", "initial_crawl",
           "unbiased_estimate", "ws_bw", "backward_runs", "allocate_runs", "estimate",
           "write_diagnostics"]


@dataclass
class ProbEstimate:
    """Single-run values for one ``(node, t)`` pair."""

    node: int
    t: int
    estimates: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exact: bool = False
    low_confidence: bool = False

    @property
    def runs(self) -> int:
        return len(self.estimates)

    @property
    def mean(self) -> float:
        return float(self.estimates.mean()) if self.runs else float("nan")

    @property
    def variance(self) -> float:
        if self.exact or self.runs < 2:
            return 0.0
        return float(self.estimates.var(ddof=1))

    @property
    def std_error(self) -> float:
        return float(np.sqrt(self.variance / self.runs)) if self.runs else float("inf")

    def extend(self, values) -> None:
        self.estimates = np.concatenate([self.estimates, np.asarray(values, dtype=float)])


class HistoricHits:
    """Visit counts ``n[s, v]`` of completed forward walks, per step."""

    def __init__(self, node_count: int, length: int):
        self.counts = np.zeros((length + 1, node_count), dtype=np.int64)
        self.n_walks = 0

    @property
    def length(self) -> int:
        return self.counts.shape[0] - 1

    def add_walks(self, paths: np.ndarray) -> None:
        """Record completed walks; ``paths`` has shape ``(walks, length + 1)``."""
        paths = np.atleast_2d(np.asarray(paths, dtype=np.int64))
        if paths.shape[1] != self.length + 1:
            raise InvalidParameter("walk length does not match the hit table")
        n = self.counts.shape[1]
        for s in range(paths.shape[1]):
            self.counts[s] += np.bincount(paths[:, s], minlength=n)
        self.n_walks += paths.shape[0]

    def fraction(self, s: int, nodes) -> np.ndarray:
        if self.n_walks == 0:
            return np.zeros(np.shape(nodes))
        return self.counts[s, nodes] / self.n_walks


@dataclass
class CrawlFrontier:
    """Exact ``p_s`` for ``s <= depth`` around the start node.

    ``probs[s]`` is zero outside the radius-``s`` ball, so a lookup for any
    node is valid once ``s <= depth``.
    """

    start: int
    depth: int
    probs: np.ndarray
    queried: np.ndarray
    queries: int = 0

    @classmethod
    def trivial(cls, start: int, node_count: int) -> "CrawlFrontier":
        """Depth-0 frontier: only ``p_0 = e_start``, no queries."""
        probs = np.zeros((1, node_count))
        probs[0, start] = 1.0
        return cls(int(start), 0, probs, np.zeros(0, dtype=np.int64), 0)

    def exact(self, s: int, nodes):
        if s > self.depth:
            raise InvalidParameter("step %d is beyond the crawl depth %d" % (s, self.depth))
        return self.probs[s, nodes]


def initial_crawl(oracle: AccessOracle, design: Design, w: int, h: int) -> CrawlFrontier:
    """Query the ball around ``w`` and compute ``p_s`` exactly for ``s <= h``.

    SRW rows only need the neighbour lists of nodes within distance ``h - 1``;
    MHRW rows also need neighbour degrees, so the ball of radius ``h`` is
    queried.
    """
    if h < 0:
        raise InvalidParameter("crawl depth must be >= 0")
    n = oracle.graph.node_count
    w = oracle.graph.check_node(w)
    if h == 0:
        return CrawlFrontier.trivial(w, n)
    radius = h - 1 if design.kind == "srw" else h
    before = oracle.ledger.unique_nodes_queried
    adj = {}
    frontier = [w]
    seen = {w}
    for r in range(radius + 1):
        nxt = []
        for u in frontier:
            adj[u] = oracle.neighbors(u)
            if r < radius:
                for v in adj[u].tolist():
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
        frontier = nxt
    probs = np.zeros((h + 1, n))
    probs[0, w] = 1.0
    for s in range(1, h + 1):
        for x in np.flatnonzero(probs[s - 1]).tolist():
            nb = adj[x]
            nd = [len(adj[int(v)]) for v in nb] if design.kind == "mhrw" else None
            for y, p in design.row(x, nb, nd).items():
                probs[s, y] += probs[s - 1, x] * p
    queried = np.array(sorted(adj), dtype=np.int64)
    return CrawlFrontier(w, h, probs, queried, oracle.ledger.unique_nodes_queried - before)


# Scalar reference implementations.  They work with every restriction,
# including fresh random-k answers, at Python speed.

def _predecessors(oracle, design, u):
    """Candidate predecessors of ``u`` and ``T(c -> u)`` for each (billed)."""
    nb = oracle.neighbors(u)
    du = len(nb)
    if du == 0:
        raise DeadEnd("node %d has no neighbours" % u)
    nd = np.array([oracle.degree(int(v)) for v in nb], dtype=float)
    into = design.into(nd, du)
    if design.kind == "mhrw":
        self_mass = max(0.0, 1.0 - float(np.sum(1.0 / np.maximum(du, nd))))
    else:
        self_mass = 0.0
    if design.lazy:
        self_mass = 0.5 * self_mass + 0.5
    cand = nb.tolist()
    if self_mass > 1e-15:
        cand.append(int(u))
        into = np.append(into, self_mass)
    return np.array(cand, dtype=np.int64), into


def _scalar_run(oracle, design, u, w, t, rng, pick):
    if t < 0:
        raise InvalidParameter("t must be >= 0")
    weight = 1.0
    cur = int(u)
    for s in range(t, 0, -1):
        cand, into = _predecessors(oracle, design, cur)
        pi = pick(cand, s)
        j = rng.choice(len(cand), p=pi)
        weight *= into[j] / pi[j]
        cur = int(cand[j])
    return weight if cur == w else 0.0


def unbiased_estimate(oracle: AccessOracle, design: Design, u: int, w: int, t: int,
                      rng) -> float:
    """One backward run with the predecessor drawn uniformly from ``C(u)``."""
    return _scalar_run(oracle, design, u, w, t, rng,
                       lambda cand, s: np.full(len(cand), 1.0 / len(cand)))


def ws_bw(oracle: AccessOracle, design: Design, u: int, w: int, t: int, eps: float,
          hits: HistoricHits, rng) -> float:
    """One weighted backward run.

    ``pi(u') ~ eps / |C| + (1 - eps) * n[t-1, u'] / n_hw`` renormalised over
    ``C(u)``, with the importance weight ``T(u' -> u) / pi(u')``.
    """
    if not 0 < eps <= 1:
        raise InvalidParameter("eps must lie in (0, 1]")

    def pick(cand, s):
        raw = eps / len(cand) + (1 - eps) * hits.fraction(s - 1, cand)
        return raw / raw.sum()

    return _scalar_run(oracle, design, u, w, t, rng, pick)


# Vectorised engine.

def _flat_positions(starts, deg):
    total = int(deg.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.cumsum(deg) - deg
    return np.repeat(starts - offsets, deg) + np.arange(total)


def backward_runs(oracle: AccessOracle, design: Design, nodes, t: int, rng,
                  crawl: CrawlFrontier, hits: Optional[HistoricHits] = None,
                  eps: float = 1.0, counter: Optional[dict] = None) -> np.ndarray:
    """Run one backward estimate for every entry of ``nodes`` in lock-step.

    Runs standing on the same node at the same step share one selection
    table, so the per-step work is one table per distinct node plus a binary
    search per run. Billing is still per run.

    Parameters
    ----------
    nodes : array of int
        Candidate node per run (repeat a node for several runs).
    crawl : CrawlFrontier
        Exact probabilities that end the runs; use
        :meth:`CrawlFrontier.trivial` for the plain estimator.
    hits, eps
        Weighted selection when ``hits`` holds walks and ``eps < 1``.
    counter : dict, optional
        ``"steps"`` is incremented by the number of backward steps taken.

    Returns
    -------
    numpy.ndarray
        One single-run value per entry of ``nodes``.
    """
    if t < 0:
        raise InvalidParameter("t must be >= 0")
    if not 0 < eps <= 1:
        raise InvalidParameter("eps must lie in (0, 1]")
    x = np.asarray(nodes, dtype=np.int64).copy()
    R = len(x)
    floor = min(crawl.depth, t)
    if R == 0 or t <= floor:
        return crawl.probs[t, x].astype(float) if R else np.zeros(0)
    weighted = hits is not None and hits.n_walks > 0 and eps < 1
    w = np.ones(R)
    idx = oracle.indices
    ux, cnt = np.unique(x, return_counts=True)
    oracle.lookup(ux, cnt)
    steps = 0
    for s in range(t, floor, -1):
        steps += R
        ux, inv, cnt = np.unique(x, return_inverse=True, return_counts=True)
        ust, udeg = oracle._peek(ux)
        if (udeg == 0).any():
            raise DeadEnd("backward walk reached an isolated node")
        U = len(ux)
        flat = _flat_positions(ust, udeg)
        nbr = idx[flat]
        seg = np.repeat(np.arange(U), udeg)
        df = udeg.astype(float)
        if design.kind == "mhrw":
            nd = oracle.lookup_degrees(nbr, cnt[seg]).astype(float)
            self_mass = 1.0 - np.bincount(seg, 1.0 / np.maximum(df[seg], nd), minlength=U)
            self_mass[self_mass < 1e-15] = 0.0
        else:
            self_mass = np.zeros(U)
        if design.lazy:
            self_mass = 0.5 * self_mass + 0.5
        has_self = self_mass > 0
        csize = udeg + has_self
        # Table of node u occupies [begins[u], ends[u]): neighbours, then self.
        ends = np.cumsum(csize)
        begins = ends - csize
        cand = np.empty(int(ends[-1]), dtype=np.int64)
        cand[begins[seg] + np.arange(len(seg)) - (np.cumsum(udeg) - udeg)[seg]] = nbr
        srows = np.flatnonzero(has_self)
        cand[ends[srows] - 1] = ux[srows]
        u = rng.random(R)
        if weighted:
            cseg = np.repeat(np.arange(U), csize)
            raw = eps / csize[cseg] + (1 - eps) * hits.fraction(s - 1, cand)
            pi_tab = raw / np.add.reduceat(raw, begins)[cseg]
            cum = np.cumsum(pi_tab)
            base = np.where(begins > 0, cum[np.maximum(begins - 1, 0)], 0.0)
            tot = cum[ends - 1] - base
            pos = np.searchsorted(cum, base[inv] + u * tot[inv], side="right")
            pos = np.clip(pos, begins[inv], ends[inv] - 1)
            pi = pi_tab[pos]
        else:
            k = np.minimum((u * csize[inv]).astype(np.int64), csize[inv] - 1)
            pos = begins[inv] + k
            pi = 1.0 / csize[inv]
        chosen = cand[pos]
        is_self = has_self[inv] & (pos == ends[inv] - 1)
        # The predecessor's degree is needed for T(u' -> u); that query also
        # serves the next step. On the last step only scoring runs need it.
        need = crawl.probs[floor, chosen] > 0 if s - 1 == floor else np.ones(R, dtype=bool)
        if need.any():
            uc, cc = np.unique(chosen[need], return_counts=True)
            oracle.lookup(uc, cc)
        ndeg = oracle._peek(chosen)[1]
        into = np.where(is_self, self_mass[inv], design.into(np.maximum(ndeg, 1), df[inv]))
        w *= into / pi
        x = chosen
    if counter is not None:
        counter["steps"] = counter.get("steps", 0) + steps
    return w * crawl.probs[floor, x]


def allocate_runs(variances, runs: int, rng) -> np.ndarray:
    """Multinomial split of ``runs`` with cell probabilities proportional to
    ``variances`` (uniform when every variance is zero)."""
    var = np.asarray(variances, dtype=float)
    if runs < 0 or np.any(var < 0):
        raise InvalidParameter("runs and variances must be non-negative")
    tot = var.sum()
    p = var / tot if tot > 0 else np.full(len(var), 1.0 / len(var))
    return rng.multinomial(runs, p)


def estimate(oracle: AccessOracle, design: Design, w: int, t: int, candidates,
             budget: int, rng, crawl: Optional[CrawlFrontier] = None,
             hits: Optional[HistoricHits] = None, eps: float = 0.1,
             initial_runs: int = 5, report=None) -> dict:
    """Estimate ``p_t`` for every candidate with a shared run budget.

    Each candidate first receives ``initial_runs`` backward runs. The rest of
    ``budget`` (counted in runs) is split by a multinomial draw with cell
    probabilities proportional to the current sample variances. Candidates
    with ``t`` inside the crawl depth get the exact value and no runs.

    If the query budget runs out, the estimates gathered so far are returned
    with ``low_confidence`` set, and ``report.budget_exhausted`` is raised.
    """
    crawl = CrawlFrontier.trivial(w, oracle.graph.node_count) if crawl is None else crawl
    cands = np.unique(np.asarray(candidates, dtype=np.int64))
    out = {int(c): ProbEstimate(int(c), t) for c in cands}
    if len(cands) == 0:
        return out
    if t <= crawl.depth:
        for c in cands:
            e = out[int(c)]
            e.estimates = np.array([crawl.probs[t, c]])
            e.exact = True
        return out
    counter = {}

    def run(nodes):
        vals = backward_runs(oracle, design, nodes, t, rng, crawl, hits, eps, counter)
        order = np.argsort(nodes, kind="stable")
        sn, sv = nodes[order], vals[order]
        cut = np.flatnonzero(np.diff(sn)) + 1
        for grp_n, grp_v in zip(np.split(sn, cut), np.split(sv, cut)):
            out[int(grp_n[0])].extend(grp_v)
        if report is not None:
            report.backward_runs += len(nodes)

    try:
        first = min(initial_runs, max(1, budget // len(cands)))
        run(np.repeat(cands, first))
        rest = budget - first * len(cands)
        if rest > 0:
            extra = allocate_runs([out[int(c)].variance for c in cands], rest, rng)
            if extra.any():
                run(np.repeat(cands, extra))
    except BudgetExhausted:
        for e in out.values():
            e.low_confidence = True
        if report is not None:
            report.budget_exhausted = True
    if report is not None:
        report.backward_steps += counter.get("steps", 0)
    return out


def write_diagnostics(estimates, path) -> None:
    """CSV rows ``node, t, runs, mean, variance``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["node", "t", "runs", "mean", "variance"])
        for e in sorted(estimates.values() if isinstance(estimates, dict) else estimates,
                        key=lambda e: e.node):
            wr.writerow([e.node, e.t, e.runs, repr(e.mean), repr(e.variance)])
