import numpy as np
import pytest
from hypothesis import given, strategies as st

from walkestimate import (AccessOracle, BudgetExhausted, Graph, InvalidNode, InvalidParameter,
                          QueryLedger, Restriction, complete, star)
from walkestimate.graph import bidirectional_neighbors, degree, neighbors

from conftest import graphs


def test_path_neighbours_read_back(path3):
    o = AccessOracle(path3)
    assert neighbors(o, 1).tolist() == [0, 2]


def test_requery_bills_total_not_unique(path3):
    o = AccessOracle(path3)
    neighbors(o, 1)
    neighbors(o, 1)
    assert o.ledger.total_queries == 2
    assert o.ledger.unique_nodes_queried == 1


def test_degree_examples():
    assert degree(AccessOracle(complete(4)), 0) == 3
    assert degree(AccessOracle(Graph(2, [])), 1) == 0
    o = AccessOracle(star(9), restriction=Restriction.cap(5))
    assert degree(o, 0) == 5


def test_cap_answer_fixed_across_calls():
    o = AccessOracle(star(3), restriction=Restriction.cap(1))
    first = o.neighbors(0)
    assert len(first) == 1
    for _ in range(5):
        assert o.neighbors(0).tolist() == first.tolist()


def test_fixed_k_is_deterministic_and_subset():
    g = complete(12)
    o = AccessOracle(g, restriction=Restriction.fixed_k(4, seed=9))
    a = [o.neighbors(u).tobytes() for u in range(12)]
    b = [o.neighbors(u).tobytes() for u in range(12)]
    assert a == b
    for u in range(12):
        nb = o.neighbors(u)
        assert len(nb) == 4 and set(nb.tolist()) <= set(g.neighbors(u).tolist())


def test_random_k_subsets_are_uniform():
    # Each of the C(5, 2) = 10 pairs should show up about equally often.
    o = AccessOracle(star(5), restriction=Restriction.random_k(2), seed=1)
    counts = {}
    reps = 20000
    for _ in range(reps):
        key = tuple(o.neighbors(0).tolist())
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 10
    freq = np.array(list(counts.values())) / reps
    assert np.all(np.abs(freq - 0.1) < 4 * np.sqrt(0.1 * 0.9 / reps))


def test_random_k_returns_full_list_for_small_degree(path3):
    o = AccessOracle(path3, restriction=Restriction.random_k(5), seed=0)
    assert o.neighbors(1).tolist() == [0, 2]


def test_bidirectional_without_restriction_equals_neighbours(ba30):
    o = AccessOracle(ba30)
    for u in range(ba30.node_count):
        assert bidirectional_neighbors(o, u).tolist() == ba30.neighbors(u).tolist()


def test_bidirectional_drops_one_sided_edges():
    # Under cap(1) node 0 lists 1 and 2 lists 0, but 0's capped answer omits 2.
    g = Graph(3, [(0, 1), (0, 2)])
    o = AccessOracle(g, restriction=Restriction.cap(1))
    assert o.neighbors(2).tolist() == [0]
    assert bidirectional_neighbors(o, 2).tolist() == []
    assert bidirectional_neighbors(o, 0).tolist() == [1]


def test_star_centre_under_cap_two():
    g = star(6)
    o = AccessOracle(g, restriction=Restriction.cap(2))
    capped = set(o.neighbors(0).tolist())
    got = set(bidirectional_neighbors(o, 0).tolist())
    assert got <= capped
    # Independent enumeration: leaves list only the centre.
    assert got == {v for v in capped if 0 in g.neighbors(v)[:2].tolist()}


def test_bidirectional_checks_are_billed():
    g = star(4)
    o = AccessOracle(g)
    bidirectional_neighbors(o, 0)
    assert o.ledger.total_queries == 5
    assert o.ledger.unique_nodes_queried == 5


def test_invalid_node_and_budget(path3):
    o = AccessOracle(path3, budget=2)
    with pytest.raises(InvalidNode):
        o.neighbors(3)
    o.neighbors(0)
    o.neighbors(1)
    o.neighbors(1)  # cached: free under a unique budget
    with pytest.raises(BudgetExhausted):
        o.neighbors(2)
    assert o.ledger.unique_nodes_queried == 2


def test_total_budget_counts_repeats(path3):
    o = AccessOracle(path3, budget=2, budget_kind="total")
    o.neighbors(0)
    o.neighbors(0)
    with pytest.raises(BudgetExhausted):
        o.neighbors(0)


def test_vectorised_lookup_bills_like_scalar_calls(ba30, rng):
    nodes = rng.integers(0, 30, size=50)
    a, b = AccessOracle(ba30), AccessOracle(ba30)
    starts, deg = a.lookup(nodes)
    for u in nodes:
        b.neighbors(int(u))
    assert a.ledger.snapshot() == b.ledger.snapshot()
    for i, u in enumerate(nodes):
        assert a.indices[starts[i]:starts[i] + deg[i]].tolist() == ba30.neighbors(u).tolist()


def test_lookup_is_all_or_nothing(path3):
    o = AccessOracle(path3, budget=1)
    with pytest.raises(BudgetExhausted):
        o.lookup(np.array([0, 1]))
    assert o.ledger.total_queries == 0 and o.ledger.unique_nodes_queried == 0


def test_graph_rejects_out_of_range_and_drops_loops():
    with pytest.raises(InvalidNode):
        Graph(2, [(0, 2)])
    g = Graph(3, [(0, 0), (0, 1), (1, 0), (1, 2)])
    assert g.edge_count == 2
    with pytest.raises(InvalidParameter):
        Graph(-1)


def test_ledger_merge():
    g = complete(5)
    a, b = AccessOracle(g), AccessOracle(g)
    a.neighbors(0), a.neighbors(1), b.neighbors(1), b.neighbors(2)
    m = QueryLedger.merge([a.ledger, b.ledger])
    assert m.unique_nodes_queried == 3 and m.total_queries == 4


@given(graphs())
def test_degree_sum_is_twice_edges(g):
    o = AccessOracle(g)
    assert sum(degree(o, u) for u in range(g.node_count)) == 2 * g.edge_count


@given(graphs())
def test_adjacency_symmetric_sorted_simple(g):
    for u in range(g.node_count):
        nb = g.neighbors(u).tolist()
        assert nb == sorted(set(nb)) and u not in nb
        for v in nb:
            assert u in g.neighbors(v).tolist()


@given(graphs(), st.lists(st.integers(0, 11), max_size=40), st.integers(0, 15))
def test_ledger_invariants(g, queries, budget):
    o = AccessOracle(g, budget=budget)
    prev = (0, 0)
    seen = set()
    for u in queries:
        u = u % g.node_count
        before = o.ledger.unique_nodes_queried
        try:
            o.neighbors(u)
        except BudgetExhausted:
            assert u not in seen and before == budget
            continue
        if u in seen:
            assert o.ledger.unique_nodes_queried == before
        seen.add(u)
        cur = (o.ledger.unique_nodes_queried, o.ledger.total_queries)
        assert cur[0] >= prev[0] and cur[1] >= prev[1]
        assert cur[0] <= cur[1]
        assert cur[0] <= budget
        prev = cur
    assert o.ledger.unique_nodes_queried == len(seen)
