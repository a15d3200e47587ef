import numpy as np
import pytest
from hypothesis import given, strategies as st

from walkestimate import (MHRW, SRW, AccessOracle, BudgetExhausted, Design, GewekeMonitor, Graph,
                          InvalidParameter, barabasi_albert, barbell, complete, cycle,
                          exact_step_distribution, forward_walks, geweke_z, hypercube,
                          many_short_runs, many_short_runs_batch, one_long_run, transition_matrix,
                          walk)
from walkestimate.walkers import (autocorrelation, chain_effective_sample_size,
                                  effective_sample_size, step)

from conftest import graphs


def test_step_degree_one_and_regular_mhrw(rng):
    g = Graph(2, [(0, 1)])
    assert step(AccessOracle(g), SRW, 0, rng) == 1
    o = AccessOracle(hypercube(3))
    for _ in range(50):
        assert step(o, MHRW, 0, rng) in hypercube(3).neighbors(0).tolist()


@pytest.mark.parametrize("design", [SRW, MHRW, Design("mhrw", lazy=True)])
def test_step_frequencies_match_row(design):
    g = barabasi_albert(15, 2, seed=2)
    T = transition_matrix(g, design)
    o = AccessOracle(g)
    rng = np.random.default_rng(5)
    u, reps = 3, 100_000
    counts = np.bincount([step(o, design, u, rng) for _ in range(reps)], minlength=15) / reps
    sd = np.sqrt(T[u] * (1 - T[u]) / reps)
    assert np.all(np.abs(counts - T[u]) <= 3 * sd + 1e-12)


@given(graphs(min_nodes=2, max_nodes=10, connected=True), st.integers(0, 2**31 - 1))
def test_trace_adjacency(g, seed):
    for design in (SRW, MHRW):
        tr = walk(AccessOracle(g), design, 0, 30, seed=seed)
        assert tr.steps[0] == (0, 0)
        for a, b in zip(tr.nodes[:-1], tr.nodes[1:]):
            if design.kind == "srw":
                assert b in g.neighbors(a)
            else:
                assert b == a or b in g.neighbors(a)


@pytest.mark.parametrize("design", [SRW, MHRW])
def test_forward_occupancy_matches_exact(design):
    g = barabasi_albert(20, 2, seed=7)
    paths = forward_walks(AccessOracle(g), design, 0, 6, 100_000, np.random.default_rng(1))
    p = exact_step_distribution(transition_matrix(g, design), 0, 6)
    freq = np.bincount(paths[:, -1], minlength=20) / len(paths)
    assert np.all(np.abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / len(paths)) + 1e-12)


def test_forward_walks_bill_like_scalar_walks():
    g = barabasi_albert(40, 3, seed=1)
    o = AccessOracle(g)
    paths = forward_walks(o, MHRW, 0, 5, 10, np.random.default_rng(0))
    # Each step bills the current node and the proposal's degree.
    assert o.ledger.total_queries == 2 * 5 * 10
    assert o.ledger.unique_nodes_queried <= len(np.unique(paths)) + 10 * 5


def test_geweke_formula():
    assert geweke_z(np.ones(20)) == 0.0
    # Window A (first 10% = 2 values) mean 1 var 0; window B (last 10 values) mean 2 var 1.
    b = np.array([1, 3] * 5, dtype=float)
    b = 2 + (b - 2) * np.sqrt(1 / np.var(b, ddof=1))
    x = np.concatenate([[1.0, 1.0], np.full(8, 5.0), b])
    assert geweke_z(x) == pytest.approx(1.0)
    assert geweke_z(np.r_[np.zeros(2), np.ones(18)]) == np.inf
    with pytest.raises(InvalidParameter):
        geweke_z(np.ones(9))


def test_geweke_iid_normal_is_small():
    zs = [geweke_z(np.random.default_rng(seed).standard_normal(10_000)) for seed in range(50)]
    # Plain window variances: Z is the mean gap over about sqrt(2), i.e. near 0.02.
    assert np.mean(np.array(zs) < 0.1) >= 0.9


@given(st.lists(st.floats(-100, 100), min_size=10, max_size=80))
def test_monitor_matches_batch_statistic(xs):
    m = GewekeMonitor()
    for x in xs:
        m.push(x)
    assert m.z == pytest.approx(geweke_z(xs), rel=1e-6, abs=1e-6) or (
        np.isinf(m.z) and np.isinf(geweke_z(xs)))
    assert m.z >= 0


def test_many_short_runs_complete_and_constant():
    rng = np.random.default_rng(2)
    r = many_short_runs(AccessOracle(cycle(9)), SRW, 0, rng=rng)
    # Constant degree: Z = 0 at the first check.
    assert r.walk_length == 49 and r.accepted
    r = many_short_runs(AccessOracle(complete(8)), SRW, 0, rng=rng)
    assert r.walk_length == 49


def test_many_short_runs_stops_when_threshold_met():
    g = barabasi_albert(50, 2, seed=3)
    rng = np.random.default_rng(8)
    o = AccessOracle(g)
    r = many_short_runs(o, SRW, 0, rng=np.random.default_rng(8))
    # Replay the same chain and check Z at the stopping length, and above threshold earlier.
    rng = np.random.default_rng(8)
    tr = walk(AccessOracle(g), SRW, 0, r.walk_length, rng=rng)
    deg = g.degrees[tr.nodes].astype(float)
    assert tr.nodes[-1] == r.node
    assert geweke_z(deg) <= 0.1
    for n in range(50, len(deg), 10):
        assert geweke_z(deg[:n]) > 0.1


def test_batch_matches_scalar_in_distribution():
    g = barabasi_albert(30, 2, seed=4)
    recs, rep = many_short_runs_batch(AccessOracle(g), SRW, 0, 3000, np.random.default_rng(1))
    assert len(recs) == 3000 and rep.samples == 3000
    lengths = np.array([r.walk_length for r in recs])
    ref = np.array([many_short_runs(AccessOracle(g), SRW, 0, rng=np.random.default_rng(s)).walk_length
                    for s in range(400)])
    assert abs(lengths.mean() - ref.mean()) < 4 * np.sqrt(lengths.var() / 3000 + ref.var() / 400)
    assert set(lengths % 10) == {9}


def test_batch_budget_flags_partial():
    g = barabasi_albert(200, 2, seed=4)
    recs, rep = many_short_runs_batch(AccessOracle(g, budget=30), SRW, 0, 100,
                                      np.random.default_rng(1), batch=1)
    assert rep.budget_exhausted and len(recs) < 100
    assert rep.unique_queries <= 30


def test_short_runs_independent_across_runs():
    g = barabasi_albert(30, 2, seed=5)
    recs, _ = many_short_runs_batch(AccessOracle(g), SRW, 0, 4000, np.random.default_rng(3))
    d = g.degrees[[r.node for r in recs]].astype(float)
    corr = np.corrcoef(d[:-1], d[1:])[0, 1]
    assert abs(corr) < 4 / np.sqrt(len(d))


def test_one_long_run():
    g = cycle(11)
    rng = np.random.default_rng(0)
    recs = one_long_run(AccessOracle(g), SRW, 0, 0, 3, rng)
    tr = walk(AccessOracle(g), SRW, 0, 3, rng=np.random.default_rng(0))
    assert [r.node for r in recs] == tr.nodes[1:].tolist()
    o = AccessOracle(g)
    one_long_run(o, SRW, 0, 100, 50, np.random.default_rng(1))
    assert o.ledger.total_queries == 150


def test_long_run_autocorrelated_on_barbell():
    g = barbell(21)
    recs = one_long_run(AccessOracle(g), MHRW, 0, 100, 20_000, np.random.default_rng(2))
    d = g.degrees[[r.node for r in recs]].astype(float)
    assert autocorrelation(d, 1)[0] > 0
    # The simple walk alternates bridge and interior degrees, so use the clique side.
    recs = one_long_run(AccessOracle(g), SRW, 0, 100, 20_000, np.random.default_rng(2))
    side = (np.array([r.node for r in recs]) < 10).astype(float)
    assert autocorrelation(side, 1)[0] > 0.5


def test_ess_formula():
    assert effective_sample_size(100, [0.0, 0.0]) == 100
    assert effective_sample_size(100, [0.5, 0.0, 0.3]) == 50
    # Negative first lag truncates immediately, leaving h.
    assert effective_sample_size(10, [-0.2, 0.4]) == 10


def test_ess_ar1():
    phi, n = 0.6, 200_000
    rng = np.random.default_rng(11)
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0]
    for i in range(1, n):
        x[i] = phi * x[i - 1] + e[i]
    closed = n * (1 - phi) / (1 + phi)
    assert chain_effective_sample_size(x, 200) == pytest.approx(closed, rel=0.1)


def test_autocorrelation_against_direct():
    x = np.random.default_rng(0).standard_normal(300)
    y = x - x.mean()
    direct = [np.sum(y[:-k] * y[k:]) / np.sum(y * y) for k in range(1, 6)]
    assert np.allclose(autocorrelation(x, 5), direct)
