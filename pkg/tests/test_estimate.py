import numpy as np
import pytest
from hypothesis import given, strategies as st

from walkestimate import (MHRW, SRW, AccessOracle, BudgetExhausted, CrawlFrontier, Design, Graph,
                          HistoricHits, InvalidParameter, backward_runs, barabasi_albert, cycle,
                          estimate, exact_step_distribution, forward_walks, hypercube,
                          initial_crawl, transition_matrix, unbiased_estimate, ws_bw)
from walkestimate.estimate import allocate_runs, write_diagnostics
from walkestimate.records import ExperimentReport

from conftest import graphs

DESIGNS = [SRW, MHRW, Design("srw", lazy=True), Design("mhrw", lazy=True)]


def exact_moments(T, t, base, floor, hits=None, eps=1.0):
    """Exact first and second moments of one backward run from every node.

    Independent of the sampling engine: the predecessor set is the support of
    column ``u`` of ``T`` and the selection law is rebuilt from the hit table.
    """
    mask = T > 0
    csize = mask.sum(axis=0)
    m1, m2 = base.copy(), base ** 2
    for s in range(floor + 1, t + 1):
        if hits is None or eps >= 1 or hits.n_walks == 0:
            pi = np.where(mask, 1.0 / csize[None, :], 0.0)
        else:
            frac = hits.counts[s - 1] / hits.n_walks
            raw = np.where(mask, eps / csize[None, :] + (1 - eps) * frac[:, None], 0.0)
            pi = raw / raw.sum(axis=0, keepdims=True)
        w2 = np.where(mask, T ** 2 / np.where(mask, pi, 1.0), 0.0)
        m1, m2 = T.T @ m1, w2.T @ m2
    return m1, m2


def test_base_cases(path3, rng):
    o = AccessOracle(path3)
    assert unbiased_estimate(o, SRW, 0, 0, 0, rng) == 1.0
    assert unbiased_estimate(o, SRW, 1, 0, 0, rng) == 0.0
    hits = HistoricHits(3, 2)
    assert ws_bw(o, SRW, 0, 0, 0, 0.1, hits, rng) == 1.0
    assert ws_bw(o, SRW, 2, 0, 0, 0.1, hits, rng) == 0.0
    with pytest.raises(InvalidParameter):
        unbiased_estimate(o, SRW, 0, 0, -1, rng)


def test_path_by_hand(path3, rng):
    # From b: via a the value is |N(b)| * T(a -> b) * 1 = 2, via c it is 0.
    o = AccessOracle(path3)
    vals = [unbiased_estimate(o, SRW, 1, 0, 1, rng) for _ in range(4000)]
    assert set(vals) == {0.0, 2.0}
    assert np.mean(vals) == pytest.approx(1.0, abs=4 * 1 / np.sqrt(4000))
    v = backward_runs(o, SRW, np.full(4000, 1), 1, rng, CrawlFrontier.trivial(0, 3))
    assert set(v.tolist()) == {0.0, 2.0}


def test_ws_bw_with_eps_one_is_the_plain_run(ba30):
    hits = HistoricHits(30, 5)
    hits.add_walks(forward_walks(AccessOracle(ba30), SRW, 0, 5, 200, np.random.default_rng(0)))
    o = AccessOracle(ba30)
    a = [ws_bw(o, SRW, 4, 0, 5, 1.0, hits, np.random.default_rng(s)) for s in range(200)]
    b = [unbiased_estimate(o, SRW, 4, 0, 5, np.random.default_rng(s)) for s in range(200)]
    assert np.allclose(a, b, rtol=1e-12, atol=0)
    empty = HistoricHits(30, 5)
    c = [ws_bw(o, SRW, 4, 0, 5, 0.3, empty, np.random.default_rng(s)) for s in range(200)]
    assert np.allclose(c, b, rtol=1e-12, atol=0)


@pytest.mark.parametrize("design", DESIGNS, ids=lambda d: d.name)
def test_scalar_runs_unbiased(design):
    g = barabasi_albert(20, 2, seed=3)
    p = exact_step_distribution(transition_matrix(g, design), 0, 4)
    o = AccessOracle(g)
    rng = np.random.default_rng(9)
    u = int(np.argsort(p)[-3])
    vals = np.array([unbiased_estimate(o, design, u, 0, 4, rng) for _ in range(8000)])
    assert abs(vals.mean() - p[u]) <= 4 * vals.std(ddof=1) / np.sqrt(len(vals))


@pytest.mark.parametrize("design", DESIGNS, ids=lambda d: d.name)
def test_weighted_runs_on_ba20_t4(design):
    g = barabasi_albert(20, 2, seed=1)
    p = exact_step_distribution(transition_matrix(g, design), 0, 4)
    rng = np.random.default_rng(2)
    hits = HistoricHits(20, 4)
    hits.add_walks(forward_walks(AccessOracle(g), design, 0, 4, 500, rng))
    o = AccessOracle(g)
    for u in np.flatnonzero(p > 0.02):
        v = backward_runs(o, design, np.full(100_000, u), 4, rng, CrawlFrontier.trivial(0, 20),
                          hits, 0.1)
        assert abs(v.mean() - p[u]) <= 3.5 * v.std(ddof=1) / np.sqrt(len(v))


@pytest.mark.parametrize("design", DESIGNS, ids=lambda d: d.name)
def test_engine_moments_match_exact_recursion(design):
    g = barabasi_albert(25, 2, seed=5)
    T = transition_matrix(g, design)
    rng = np.random.default_rng(4)
    hits = HistoricHits(25, 5)
    hits.add_walks(forward_walks(AccessOracle(g), design, 0, 5, 300, rng))
    crawl = initial_crawl(AccessOracle(g), design, 0, 2)
    m1, m2 = exact_moments(T, 5, crawl.probs[2], 2, hits, 0.1)
    assert np.allclose(m1, exact_step_distribution(T, 0, 5))
    u = int(np.argmax(m1))
    v = backward_runs(AccessOracle(g), design, np.full(200_000, u), 5, rng, crawl, hits, 0.1)
    se = np.sqrt((m2[u] - m1[u] ** 2) / len(v))
    assert abs(v.mean() - m1[u]) <= 4 * se + 1e-15
    assert np.mean(v ** 2) == pytest.approx(m2[u], rel=0.1)


def test_vectorised_and_scalar_agree_in_mean():
    g = barabasi_albert(20, 2, seed=1)
    o = AccessOracle(g)
    rng = np.random.default_rng(3)
    a = np.array([unbiased_estimate(o, MHRW, 5, 0, 3, rng) for _ in range(20000)])
    b = backward_runs(o, MHRW, np.full(20000, 5), 3, rng, CrawlFrontier.trivial(0, 20))
    se = np.sqrt(a.var() / len(a) + b.var() / len(b))
    assert abs(a.mean() - b.mean()) <= 4 * se


def test_regular_graph_values_are_zero_one():
    # Every product of degree ratios is 1 on a regular graph.
    g = hypercube(4)
    rng = np.random.default_rng(0)
    p = exact_step_distribution(transition_matrix(g, SRW), 0, 6)
    v = backward_runs(AccessOracle(g), SRW, np.full(100_000, 3), 6, rng, CrawlFrontier.trivial(0, 16))
    assert set(v.tolist()) <= {0.0, 1.0}
    rse = v.std(ddof=1) / v.mean()
    assert rse == pytest.approx(np.sqrt((1 - p[3]) / p[3]), rel=0.1)


def test_crawl_examples(path3):
    g = barabasi_albert(30, 3, seed=2)
    c = initial_crawl(AccessOracle(g), SRW, 4, 1)
    nb = g.neighbors(4)
    assert np.allclose(c.probs[1, nb], 1 / len(nb)) and c.probs[1].sum() == pytest.approx(1)
    c0 = initial_crawl(AccessOracle(g), SRW, 4, 0)
    assert c0.depth == 0 and c0.probs[0, 4] == 1 and c0.queries == 0
    c2 = initial_crawl(AccessOracle(path3), SRW, 0, 2)
    assert np.allclose(c2.probs[2], exact_step_distribution(transition_matrix(path3, SRW), 0, 2))


@pytest.mark.parametrize("design", DESIGNS, ids=lambda d: d.name)
@given(g=graphs(min_nodes=2, max_nodes=10, connected=True), h=st.integers(0, 4))
def test_crawl_matches_matrix_and_queries_ball(design, g, h):
    o = AccessOracle(g)
    c = initial_crawl(o, design, 0, h)
    T = transition_matrix(g, design)
    for s in range(h + 1):
        assert np.abs(c.probs[s] - exact_step_distribution(T, 0, s)).max() <= 1e-12
        assert c.probs[s].sum() == pytest.approx(1.0, abs=1e-12)
    d = g.bfs_distances(0)
    radius = (h - 1 if design.kind == "srw" else h) if h > 0 else -1
    assert set(c.queried.tolist()) == set(np.flatnonzero((d >= 0) & (d <= radius)).tolist())
    assert o.ledger.unique_nodes_queried == c.queries


@given(st.lists(st.lists(st.integers(0, 7), min_size=4, max_size=4), min_size=1, max_size=20))
def test_hit_table_invariants(walks):
    h = HistoricHits(8, 3)
    h.add_walks(np.array(walks))
    assert np.all(h.counts >= 0) and np.all(h.counts <= h.n_walks)
    assert np.all(h.counts.sum(axis=1) == h.n_walks)


def test_estimate_inside_crawl_is_exact():
    g = barabasi_albert(40, 3, seed=1)
    o = AccessOracle(g)
    crawl = initial_crawl(o, SRW, 0, 2)
    rep = ExperimentReport("x")
    out = estimate(o, SRW, 0, 2, [1, 2, 3], 100, np.random.default_rng(0), crawl=crawl, report=rep)
    for v, e in out.items():
        assert e.exact and e.variance == 0 and e.mean == crawl.probs[2, v]
    assert rep.backward_runs == 0


def test_allocation_follows_variance():
    rng = np.random.default_rng(0)
    draws = np.array([allocate_runs([3.0, 1.0], 4000, rng) for _ in range(50)])
    share = draws[:, 0].sum() / draws.sum()
    assert share == pytest.approx(0.75, abs=4 * np.sqrt(0.75 * 0.25 / draws.sum()))
    assert allocate_runs([0.0, 0.0], 10, rng).sum() == 10


def test_estimate_end_to_end_ba50_t7():
    g = barabasi_albert(50, 2, seed=8)
    rng = np.random.default_rng(1)
    T = transition_matrix(g, SRW)
    p = exact_step_distribution(T, 0, 7)
    o = AccessOracle(g)
    paths = forward_walks(o, SRW, 0, 7, 300, rng)
    hits = HistoricHits(50, 7)
    hits.add_walks(paths[:200])
    crawl = initial_crawl(o, SRW, 0, 2)
    cands = paths[200:, -1]
    out = estimate(o, SRW, 0, 7, cands, 200_000, rng, crawl=crawl, hits=hits, eps=0.1)
    assert set(out) == set(np.unique(cands).tolist())
    for v, e in out.items():
        assert e.runs >= 5
        assert abs(e.mean - p[v]) <= 3.5 * max(e.std_error, 1e-12)


def test_estimate_budget_flags_low_confidence():
    g = barabasi_albert(300, 3, seed=2)
    o = AccessOracle(g, budget=20)
    rep = ExperimentReport("x")
    out = estimate(o, SRW, 0, 9, [5, 6], 100, np.random.default_rng(0), report=rep)
    assert rep.budget_exhausted
    assert all(e.low_confidence for e in out.values())


@pytest.mark.parametrize("design", [SRW, MHRW], ids=lambda d: d.name)
def test_crawl_and_weighting_reduce_variance_on_ba1000(design):
    reduced = 0
    for seed in range(10):
        g = barabasi_albert(1000, 5, seed=seed)
        rng = np.random.default_rng(seed)
        w, t = int(rng.integers(1000)), 2 * g.diameter() + 1
        T = transition_matrix(g, design)
        o = AccessOracle(g)
        paths = forward_walks(o, design, w, t, 2000, rng)
        hits = HistoricHits(1000, t)
        hits.add_walks(paths[:1000])
        cands = paths[1000:, -1]
        crawl = initial_crawl(o, design, w, 2)
        e0 = np.zeros(1000)
        e0[w] = 1.0
        m1, plain = exact_moments(T, t, e0, 0)
        _, both = exact_moments(T, t, crawl.probs[2], 2, hits, 0.1)
        rv = lambda m2: np.mean(m2[cands] / m1[cands] ** 2 - 1)
        reduced += rv(both) < rv(plain)
    assert reduced >= 9


def test_diagnostics_csv(tmp_path, ba30):
    out = estimate(AccessOracle(ba30), SRW, 0, 4, [1, 2], 50, np.random.default_rng(0))
    p = tmp_path / "d.csv"
    write_diagnostics(out, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "node,t,runs,mean,variance" and len(lines) == 3
