"""Forward random walks through the access oracle and classic burn-in samplers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExhausted, DeadEnd, DegenerateChain, InvalidParameter
from .graph import AccessOracle
from .records import ExperimentReport, SampleRecord
from .transition import Design, SRW

__all__ = ["WalkTrace", "GewekeMonitor", "step", "walk", "forward_walks", "geweke_z",
           "many_short_runs", "many_short_runs_batch", "one_long_run",
           "autocorrelation", "effective_sample_size", "chain_effective_sample_size"]


@dataclass
class WalkTrace:
    start: int
    nodes: np.ndarray
    design: Design
    seed: Optional[int] = None

    @property
    def steps(self):
        return list(zip(self.nodes.tolist(), range(len(self.nodes))))


def step(oracle: AccessOracle, design: Design, current: int, rng) -> int:
    """Draw the next node of ``design`` from ``current``."""
    if design.lazy and rng.random() < 0.5:
        return int(current)
    nbrs = oracle.neighbors(current)
    if len(nbrs) == 0:
        raise DeadEnd("node %d has no neighbours" % current)
    v = int(nbrs[rng.integers(len(nbrs))])
    if design.kind == "srw":
        return v
    dv = oracle.degree(v)
    if rng.random() * dv < len(nbrs):
        return v
    return int(current)


def walk(oracle: AccessOracle, design: Design, start: int, length: int, rng=None,
         seed=None) -> WalkTrace:
    rng = np.random.default_rng(seed) if rng is None else rng
    nodes = [int(start)]
    for _ in range(length):
        nodes.append(step(oracle, design, nodes[-1], rng))
    return WalkTrace(int(start), np.array(nodes), design, seed)


def _advance(oracle, design, cur, rng, deg=None, starts=None):
    """One vectorised step for every walker in ``cur``."""
    if starts is None:
        starts, deg = oracle.lookup(cur)
    if (deg == 0).any():
        raise DeadEnd("walk reached an isolated node")
    prop = oracle.indices[starts + (rng.random(len(cur)) * deg).astype(np.int64)]
    if design.kind == "mhrw":
        dv = oracle.lookup_degrees(prop)
        prop = np.where(rng.random(len(cur)) * dv < deg, prop, cur)
    if design.lazy:
        prop = np.where(rng.random(len(cur)) < 0.5, cur, prop)
    return prop


def forward_walks(oracle: AccessOracle, design: Design, start, length: int,
                  n_walks: int, rng) -> np.ndarray:
    """``n_walks`` independent walks of ``length`` steps; shape ``(n_walks, length + 1)``."""
    if length < 0 or n_walks < 0:
        raise InvalidParameter("length and n_walks must be non-negative")
    paths = np.empty((n_walks, length + 1), dtype=np.int64)
    paths[:, 0] = start
    for s in range(length):
        paths[:, s + 1] = _advance(oracle, design, paths[:, s], rng)
    return paths


def _window_stats(s1, s2, n):
    mean = s1 / n
    var = np.where(n > 1, (s2 - s1 * s1 / n) / np.maximum(n - 1, 1), 0.0)
    return mean, np.maximum(var, 0.0)


def _geweke_from_sums(a1, a2, na, b1, b2, nb):
    ma, va = _window_stats(a1, a2, na)
    mb, vb = _window_stats(b1, b2, nb)
    diff = np.abs(ma - mb)
    denom = np.sqrt(va + vb)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(denom > 0, diff / np.where(denom > 0, denom, 1.0),
                     np.where(diff <= 1e-12 * np.maximum(1.0, np.abs(ma)), 0.0, np.inf))
    return z


def _windows(n):
    na = max(1, int(0.1 * n))
    nb = max(1, int(0.5 * n))
    return na, nb


def geweke_z(values, first: float = 0.1, last: float = 0.5) -> float:
    """Geweke statistic between the first 10% and the last 50% of a chain.

    Window variances are plain sample variances. When both are zero the
    statistic is 0 for equal means and infinity otherwise.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 10:
        raise InvalidParameter("Geweke needs a chain of length >= 10")
    na = max(1, int(first * n))
    nb = max(1, int(last * n))
    a, b = x[:na], x[n - nb:]
    return float(_geweke_from_sums(a.sum(), (a * a).sum(), na, b.sum(), (b * b).sum(), nb))


class GewekeMonitor:
    """Incremental Geweke statistic over a growing chain (prefix sums)."""

    def __init__(self):
        self._c1 = [0.0]
        self._c2 = [0.0]

    def __len__(self):
        return len(self._c1) - 1

    def push(self, x: float) -> None:
        self._c1.append(self._c1[-1] + x)
        self._c2.append(self._c2[-1] + x * x)

    @property
    def z(self) -> float:
        n = len(self)
        if n < 10:
            raise InvalidParameter("Geweke needs a chain of length >= 10")
        na, nb = _windows(n)
        c1, c2 = self._c1, self._c2
        return float(_geweke_from_sums(c1[na], c2[na], na, c1[n] - c1[n - nb],
                                       c2[n] - c2[n - nb], nb))


def _attr_values(oracle, attribute, nodes, deg):
    if attribute == "degree":
        return deg.astype(float)
    return oracle.graph.attributes[attribute][nodes]


def many_short_runs(oracle: AccessOracle, design: Design = SRW, start: int = 0,
                    geweke_threshold: float = 0.1, attribute: str = "degree", rng=None,
                    min_length: int = 50, check_every: int = 10,
                    max_length: int = 10**6) -> SampleRecord:
    """Walk until the Geweke monitor drops to ``geweke_threshold``; sample the last node.

    The monitor is consulted when the chain holds ``min_length`` nodes and
    every ``check_every`` nodes after that.
    """
    rng = np.random.default_rng() if rng is None else rng
    mon = GewekeMonitor()
    cur = int(start)
    while True:
        if attribute == "degree":
            mon.push(float(oracle.degree(cur)))
        else:
            mon.push(oracle.attribute(cur, attribute))
        n = len(mon)
        if n >= min_length and (n - min_length) % check_every == 0 and mon.z <= geweke_threshold:
            break
        if n >= max_length:
            break
        cur = step(oracle, design, cur, rng)
    led = oracle.ledger
    return SampleRecord(cur, True, n - 1, unique_queries=led.unique_nodes_queried,
                        total_queries=led.total_queries)


def many_short_runs_batch(oracle: AccessOracle, design: Design, start: int, n_samples: int,
                          rng, geweke_threshold: float = 0.1, attribute: str = "degree",
                          min_length: int = 50, check_every: int = 10,
                          max_length: int = 10**6, batch: int = 2048):
    """Vectorised :func:`many_short_runs` producing up to ``n_samples`` samples.

    Chains run in lock-step batches; a chain leaves the batch as soon as its
    monitor converges. Budget exhaustion ends the run early and is flagged on
    the returned :class:`ExperimentReport`.
    """
    report = ExperimentReport(method=design.name)
    records = []
    led = oracle.ledger
    try:
        while len(records) < n_samples:
            _run_batch(oracle, design, start, min(batch, n_samples - len(records)), rng,
                       geweke_threshold, attribute, min_length, check_every, max_length,
                       records, report)
    except BudgetExhausted:
        report.budget_exhausted = True
    report.samples = report.candidates = len(records)
    report.unique_queries = led.unique_nodes_queried
    report.total_queries = led.total_queries
    return records, report


def _run_batch(oracle, design, start, B, rng, threshold, attribute, min_length,
               check_every, max_length, records, report):
    led = oracle.ledger
    cur = np.full(B, int(start), dtype=np.int64)
    cap = max(2 * min_length, 64)
    c1 = np.zeros((B, cap + 1))
    c2 = np.zeros((B, cap + 1))
    n = 0
    while len(cur):
        starts, deg = oracle.lookup(cur)
        x = _attr_values(oracle, attribute, cur, deg)
        if n + 1 > cap:
            c1 = np.concatenate([c1, np.zeros_like(c1[:, 1:])], axis=1)
            c2 = np.concatenate([c2, np.zeros_like(c2[:, 1:])], axis=1)
            cap *= 2
        c1[:, n + 1] = c1[:, n] + x
        c2[:, n + 1] = c2[:, n] + x * x
        n += 1
        done = np.zeros(len(cur), dtype=bool)
        if n >= min_length and (n - min_length) % check_every == 0:
            na, nb = _windows(n)
            z = _geweke_from_sums(c1[:, na], c2[:, na], na, c1[:, n] - c1[:, n - nb],
                                  c2[:, n] - c2[:, n - nb], nb)
            done = z <= threshold
        if n >= max_length:
            done[:] = True
        for v in cur[done]:
            records.append(SampleRecord(int(v), True, n - 1,
                                        unique_queries=led.unique_nodes_queried,
                                        total_queries=led.total_queries))
        keep = ~done
        if not keep.all():
            cur, starts, deg = cur[keep], starts[keep], deg[keep]
            c1, c2 = c1[keep], c2[keep]
        if len(cur):
            report.forward_steps += len(cur)
            cur = _advance(oracle, design, cur, rng, deg=deg, starts=starts)


def one_long_run(oracle: AccessOracle, design: Design, start: int, burn_in: int,
                 n_samples: int, rng=None) -> list:
    """Discard ``burn_in`` steps, then record every one of the next ``n_samples`` nodes."""
    if burn_in < 0 or n_samples < 0:
        raise InvalidParameter("burn_in and n_samples must be non-negative")
    rng = np.random.default_rng() if rng is None else rng
    led = oracle.ledger
    cur = int(start)
    for _ in range(burn_in):
        cur = step(oracle, design, cur, rng)
    out = []
    for i in range(n_samples):
        cur = step(oracle, design, cur, rng)
        out.append(SampleRecord(cur, True, burn_in + i + 1,
                                unique_queries=led.unique_nodes_queried,
                                total_queries=led.total_queries))
    return out


def autocorrelation(x, max_lag: Optional[int] = None) -> np.ndarray:
    """Sample autocorrelations ``rho_1 .. rho_max_lag`` (FFT based)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        raise InvalidParameter("need at least two values")
    max_lag = n - 1 if max_lag is None else min(max_lag, n - 1)
    y = x - x.mean()
    size = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(y, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:n]
    if acov[0] <= 0:
        return np.zeros(max_lag)
    return acov[1:max_lag + 1] / acov[0]


def effective_sample_size(h: int, rho) -> float:
    """``h / (1 + 2 * sum(rho_k))`` summed up to the first non-positive ``rho_k``."""
    rho = np.asarray(rho, dtype=float)
    nonpos = np.flatnonzero(rho <= 0)
    upto = nonpos[0] if nonpos.size else len(rho)
    denom = 1.0 + 2.0 * rho[:upto].sum()
    if denom <= 0:
        raise DegenerateChain("non-positive effective-sample-size denominator")
    return h / denom


def chain_effective_sample_size(x, max_lag: Optional[int] = None) -> float:
    return effective_sample_size(len(x), autocorrelation(x, max_lag))
