"""WALK-ESTIMATE: short forward walks corrected by acceptance-rejection.

Each candidate is the end node of a forward walk of length ``t``. Its step
probability ``p_t`` is estimated by backward runs, and it is accepted with
probability ``beta = min(1, sigma * q(u) / p_t(u))`` where ``q`` is the
unnormalised target (1 for uniform, ``d(u)`` for degree-proportional) and
``sigma`` is a running low percentile of ``p / q`` over estimated nodes.

Candidates are processed in blocks: walk the block, estimate, refresh
``sigma``, then decide acceptance for the whole block. Forward walks enter the
hit table used for weighted backward selection only once their block is done.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExhausted, DegenerateTarget, InvalidParameter
from .estimate import CrawlFrontier, HistoricHits, estimate, initial_crawl
from .graph import AccessOracle
from .records import ExperimentReport, SampleRecord
from .transition import Design
from .walkers import forward_walks

__all__ = ["VARIANTS", "WEConfig", "walk_length_policy", "accept_probability",
           "ScalingFactor", "bootstrap_scaling_factor", "sample_one", "sample_batch"]

# variant -> (uses initial crawl, uses weighted backward selection)
VARIANTS = {
    "we": (True, True),
    "we-none": (False, False),
    "we-crawl": (True, False),
    "we-weighted": (False, True),
}


@dataclass
class WEConfig:
    """Settings of one WALK-ESTIMATE run.

    Attributes
    ----------
    variant : str
        ``we``, ``we-none``, ``we-crawl`` or ``we-weighted``.
    walk_length : int, optional
        Forward walk length; defaults to ``2 * diameter_bound + 1``.
    est_runs : int
        Average backward runs per candidate; a block of ``B`` candidates gets
        ``B * est_runs`` runs shared by variance-proportional allocation.
    reuse_estimates : bool
        Pool backward runs per node across blocks, so a node seen again is
        judged on all runs spent on it so far.
    block, max_block : int
        First block size and the cap; blocks double up to the cap.
    weight_warmup : int
        Weighted backward selection starts once the hit table holds this
        many completed walks; before that the selection is uniform.
    """

    variant: str = "we"
    walk_length: Optional[int] = None
    diameter_bound: Optional[int] = None
    epsilon: float = 0.1
    crawl_depth: int = 2
    percentile: float = 10.0
    est_runs: int = 10
    initial_runs: int = 5
    bootstrap: int = 10
    block: int = 32
    max_block: int = 4096
    target: Optional[str] = None
    reuse_estimates: bool = True
    weight_warmup: int = 0
    max_candidates: Optional[int] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameter("unknown variant %r" % self.variant)
        if not 0 < self.epsilon <= 1:
            raise InvalidParameter("epsilon must lie in (0, 1]")
        if not 0 <= self.percentile <= 100:
            raise InvalidParameter("percentile must lie in [0, 100]")
        if self.crawl_depth < 0 or self.est_runs < 1 or self.bootstrap < 1 or self.block < 1:
            raise InvalidParameter("crawl_depth >= 0, est_runs, bootstrap and block >= 1")
        if self.target not in (None, "uniform", "degree"):
            raise InvalidParameter("target must be 'uniform' or 'degree'")

    def length(self) -> int:
        if self.walk_length is not None:
            if self.walk_length < 1:
                raise InvalidParameter("walk_length must be >= 1")
            return int(self.walk_length)
        if self.diameter_bound is None:
            raise InvalidParameter("set walk_length or diameter_bound")
        return walk_length_policy(self.diameter_bound)

    def as_dict(self) -> dict:
        return asdict(self)


def walk_length_policy(diameter_bound: int) -> int:
    """Forward walk length ``2 * d + 1`` for a diameter bound ``d``."""
    if diameter_bound < 1:
        raise InvalidParameter("diameter bound must be >= 1")
    return 2 * int(diameter_bound) + 1


def accept_probability(p_est: float, q: float, sigma: float) -> float:
    """``min(1, sigma * q / p_est)``; 0 when the estimate is not positive."""
    if sigma <= 0:
        raise InvalidParameter("sigma must be positive")
    if p_est <= 0:
        return 0.0
    return min(1.0, sigma * q / p_est)


def bootstrap_scaling_factor(pool, percentile: float = 10.0) -> float:
    """Linear-interpolation percentile of the observed ``p / q`` ratios."""
    pool = np.asarray(pool, dtype=float)
    if pool.size == 0:
        raise DegenerateTarget("scaling factor is unset: empty pool")
    return float(np.percentile(pool, percentile))


class ScalingFactor:
    """Running scaling factor over distinct estimated nodes.

    Each node contributes its current (pooled) ``p / q`` estimate once;
    nodes whose estimate is zero are left out of the pool.
    """

    def __init__(self, percentile: float = 10.0):
        self.percentile = percentile
        self._ratio = {}

    def __len__(self):
        return len(self._ratio)

    def update(self, nodes, ratios) -> None:
        for v, r in zip(np.asarray(nodes).tolist(), np.asarray(ratios, dtype=float).tolist()):
            if r > 0:
                self._ratio[v] = r
            else:
                self._ratio.pop(v, None)

    @property
    def pool(self) -> np.ndarray:
        return np.fromiter(self._ratio.values(), dtype=float, count=len(self._ratio))

    @property
    def value(self) -> float:
        return bootstrap_scaling_factor(self.pool, self.percentile)


def _target_weight(oracle, target, nodes):
    if target == "uniform":
        return np.ones(len(nodes))
    return oracle.lookup_degrees(nodes).astype(float)


def sample_batch(oracle: AccessOracle, design: Design, start: int, n_samples: int, rng,
                 config: Optional[WEConfig] = None, exact_probs=None,
                 sigma: Optional[float] = None):
    """Draw ``n_samples`` accepted samples with WALK-ESTIMATE.

    Parameters
    ----------
    oracle : AccessOracle
        Bills forward walks, crawl and backward runs alike.
    design : Design
        Input walk. The target defaults to the walk's stationary law unless
        ``config.target`` is set.
    exact_probs : array, optional
        Oracle mode: exact ``p_t`` replaces the estimates and no crawl or
        backward run is made. ``sigma`` then stays fixed if given.

    Returns
    -------
    records : list of SampleRecord
        Every candidate decided, in order; accepted ones have ``accepted``.
    report : ExperimentReport
    """
    cfg = config or WEConfig()
    if n_samples < 0:
        raise InvalidParameter("n_samples must be >= 0")
    t = cfg.length()
    target = cfg.target or design.default_target
    use_crawl, use_weights = VARIANTS[cfg.variant]
    n = oracle.graph.node_count
    start = oracle.graph.check_node(start)
    led = oracle.ledger
    report = ExperimentReport(method=cfg.variant)
    report.extra.update(walk_length=t, target=target, design=design.name)
    records = []
    oracle_mode = exact_probs is not None
    if oracle_mode:
        exact_probs = np.asarray(exact_probs, dtype=float)
        if exact_probs.shape != (n,):
            raise InvalidParameter("exact_probs must have one entry per node")
    if sigma is not None and sigma <= 0:
        raise InvalidParameter("sigma must be positive")
    if oracle_mode and sigma is None:
        qall = np.ones(n) if target == "uniform" else oracle.graph.degrees.astype(float)
        oracle_sigma = float(np.min(exact_probs / qall))
        if oracle_sigma <= 0:
            raise DegenerateTarget("some node has zero probability at step %d" % t)

    crawl = CrawlFrontier.trivial(start, n)
    try:
        if use_crawl and not oracle_mode and cfg.crawl_depth > 0:
            crawl = initial_crawl(oracle, design, start, cfg.crawl_depth)
            report.crawl_queries = crawl.queries
    except BudgetExhausted:
        report.budget_exhausted = True
        return records, _finish(report, led, records)
    hits = HistoricHits(n, t) if use_weights and not oracle_mode else None
    eps = cfg.epsilon if use_weights else 1.0
    scale = ScalingFactor(cfg.percentile)
    run_sum = np.zeros(n)
    run_cnt = np.zeros(n, dtype=np.int64)

    accepted = 0
    size = cfg.bootstrap
    while accepted < n_samples:
        if cfg.max_candidates is not None:
            size = min(size, cfg.max_candidates - report.candidates)
            if size <= 0:
                break
        try:
            paths = forward_walks(oracle, design, start, t, size, rng)
        except BudgetExhausted:
            report.budget_exhausted = True
            break
        report.forward_steps += size * t
        cand = paths[:, -1]
        if oracle_mode:
            p_est = exact_probs[cand]
        else:
            warm = hits is not None and hits.n_walks >= cfg.weight_warmup
            ests = estimate(oracle, design, start, t, cand, cfg.est_runs * size, rng,
                            crawl=crawl, hits=hits if warm else None, eps=eps,
                            initial_runs=cfg.initial_runs, report=report)
            if report.budget_exhausted:
                break
            uniq = np.array(sorted(ests), dtype=np.int64)
            if cfg.reuse_estimates:
                for v in uniq.tolist():
                    e = ests[v]
                    run_sum[v] += e.estimates.sum()
                    run_cnt[v] += e.runs
                node_mean = run_sum[uniq] / run_cnt[uniq]
            else:
                node_mean = np.array([ests[v].mean for v in uniq.tolist()])
            p_est = node_mean[np.searchsorted(uniq, cand)]
        try:
            q = _target_weight(oracle, target, cand)
        except BudgetExhausted:
            report.budget_exhausted = True
            break
        if sigma is None and not oracle_mode:
            qu = _target_weight(oracle, target, uniq)
            scale.update(uniq, node_mean / qu)
        if sigma is not None:
            sig = sigma
        elif oracle_mode:
            sig = oracle_sigma
        elif len(scale):
            sig = scale.value
        else:
            sig = None
        report.sigma = sig
        if hits is not None:
            hits.add_walks(paths)
        report.candidates += size
        if sig is None:
            # Nothing estimated positive yet: every candidate is a failure.
            beta = np.zeros(size)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(p_est > 0, sig * q / np.where(p_est > 0, p_est, 1.0), 0.0)
            report.clipped += int(np.sum(ratio > 1))
            beta = np.minimum(1.0, ratio)
        fail = p_est <= 0
        report.estimation_failures += int(fail.sum())
        acc = rng.random(size) < beta
        for i in range(size):
            records.append(SampleRecord(int(cand[i]), bool(acc[i]), t, float(p_est[i]),
                                        float(beta[i]), led.unique_nodes_queried,
                                        led.total_queries))
            if acc[i]:
                accepted += 1
                if accepted >= n_samples:
                    # Candidates walked after the last needed acceptance are
                    # paid for but left undecided.
                    report.candidates -= size - i - 1
                    break
        size = min(cfg.max_block, max(cfg.block, report.candidates))
    return records, _finish(report, led, records)


def _finish(report, led, records):
    report.samples = sum(r.accepted for r in records)
    report.rejected = sum(not r.accepted for r in records)
    report.unique_queries = led.unique_nodes_queried
    report.total_queries = led.total_queries
    return report


def sample_one(oracle: AccessOracle, design: Design, start: int, rng,
               config: Optional[WEConfig] = None) -> SampleRecord:
    """Walk and estimate until one candidate is accepted; return it.

    If the budget runs out first, the last decided (rejected) candidate is
    returned, or ``None`` when nothing was decided.
    """
    cfg = config or WEConfig()
    cfg = WEConfig(**{**cfg.as_dict(), "max_block": max(1, cfg.bootstrap)})
    records, _ = sample_batch(oracle, design, start, 1, rng, cfg)
    for r in records:
        if r.accepted:
            return r
    return records[-1] if records else None
