"""Undirected graph storage and the simulated local-neighbourhood interface.

A :class:`Graph` is immutable and may be shared freely.  Samplers never read
it directly; they go through an :class:`AccessOracle`, which answers one
neighbour query at a time (optionally restricted, as real social-network APIs
are) and bills every query to a :class:`QueryLedger`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BudgetExhausted, InvalidNode, InvalidParameter

__all__ = [
    "Graph",
    "Restriction",
    "QueryLedger",
    "AccessOracle",
    "neighbors",
    "bidirectional_neighbors",
    "degree",
    "segment_indices",
]


def segment_indices(indptr: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Flat positions of every CSR entry belonging to ``nodes``, in order."""
    nodes = np.asarray(nodes, dtype=np.int64)
    starts = indptr[nodes]
    lens = indptr[nodes + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.cumsum(lens) - lens
    return np.repeat(starts - offsets, lens) + np.arange(total)


class Graph:
    """Immutable simple undirected graph on dense integer ids ``0..n-1``.

    Parameters
    ----------
    node_count : int
        Number of nodes.
    edges : iterable of (int, int)
        Unordered pairs. Self-loops are dropped and duplicates collapsed.
    attributes : mapping of str to array-like, optional
        Per-node numeric attributes, each of length ``node_count``.
    labels : sequence of str, optional
        External identifiers, ``labels[i]`` naming node ``i``.
    """

    def __init__(self, node_count: int, edges: Iterable[Sequence[int]] = (),
                 attributes: Optional[Mapping[str, Sequence[float]]] = None,
                 labels: Optional[Sequence[str]] = None):
        n = int(node_count)
        if n < 0:
            raise InvalidParameter("node_count must be non-negative")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise InvalidNode("edge endpoint outside 0..%d" % (n - 1))
        arr = arr[arr[:, 0] != arr[:, 1]]
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0) if arr.size else arr
        self._edges = arr
        both = np.concatenate([arr, arr[:, ::-1]]) if arr.size else arr
        order = np.lexsort((both[:, 1], both[:, 0])) if both.size else np.zeros(0, int)
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n) if both.size else np.zeros(n, int)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._indices = both[:, 1].astype(np.int64) if both.size else np.zeros(0, np.int64)
        self._degrees = counts.astype(np.int64)
        self._n = n
        self.attributes = {}
        for name, values in (attributes or {}).items():
            values = np.asarray(values, dtype=float)
            if values.shape != (n,):
                raise InvalidParameter("attribute %r must have length %d" % (name, n))
            values.setflags(write=False)
            self.attributes[name] = values
        self.labels = list(labels) if labels is not None else None
        for a in (self._edges, self._indptr, self._indices, self._degrees):
            a.setflags(write=False)

    def __repr__(self):
        return "Graph(n=%d, |E|=%d)" % (self._n, self.edge_count)

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> np.ndarray:
        """``(|E|, 2)`` array of pairs with ``u < v``, lexicographically sorted."""
        return self._edges

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self._edges}

    @property
    def indptr(self) -> np.ndarray:
        return self._indptr

    @property
    def indices(self) -> np.ndarray:
        return self._indices

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    @property
    def d_max(self) -> int:
        return int(self._degrees.max()) if self._n else 0

    @property
    def d_min(self) -> int:
        return int(self._degrees.min()) if self._n else 0

    def check_node(self, u) -> int:
        try:
            ui = int(u)
        except (TypeError, ValueError):
            raise InvalidNode(u) from None
        if ui != u or not 0 <= ui < self._n:
            raise InvalidNode(u)
        return ui

    def neighbors(self, u) -> np.ndarray:
        u = self.check_node(u)
        return self._indices[self._indptr[u]:self._indptr[u + 1]]

    def degree(self, u) -> int:
        return int(self._degrees[self.check_node(u)])

    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(len(self._indices))
        return sp.csr_matrix((data, self._indices, self._indptr), shape=(self._n, self._n))

    def bfs_distances(self, source) -> np.ndarray:
        """Hop distances from ``source``; ``-1`` marks unreachable nodes."""
        s = self.check_node(source)
        dist = np.full(self._n, -1, dtype=np.int64)
        dist[s] = 0
        frontier = np.array([s])
        d = 0
        while frontier.size:
            d += 1
            nxt = self._indices[segment_indices(self._indptr, frontier)]
            nxt = np.unique(nxt[dist[nxt] < 0])
            dist[nxt] = d
            frontier = nxt
        return dist

    def is_connected(self) -> bool:
        return self._n == 0 or bool((self.bfs_distances(0) >= 0).all())

    def eccentricity(self, u) -> int:
        dist = self.bfs_distances(u)
        if (dist < 0).any():
            return -1
        return int(dist.max())

    def diameter(self, exact_limit: int = 10_000) -> int:
        """Exact diameter by all-pairs BFS up to ``exact_limit`` nodes.

        Larger graphs get the double-sweep lower bound. Disconnected graphs
        report ``-1``.
        """
        if self._n == 0:
            return 0
        if not self.is_connected():
            return -1
        if self._n <= exact_limit:
            from scipy.sparse.csgraph import shortest_path
            if self._n <= 2000:
                return int(shortest_path(self.adjacency_matrix(), unweighted=True,
                                         directed=False).max())
            return max(self.eccentricity(u) for u in range(self._n))
        far = int(np.argmax(self.bfs_distances(0)))
        return self.eccentricity(far)

    def peripheral_node(self) -> int:
        """A node of maximum eccentricity (smallest id among ties)."""
        ecc = [self.eccentricity(u) for u in range(self._n)]
        return int(np.argmax(ecc))


@dataclass(frozen=True)
class Restriction:
    """How the neighbour API truncates answers.

    ``kind`` is one of ``"none"``, ``"random-k"`` (fresh uniform k-subset per
    call), ``"fixed-k"`` (one seeded k-subset per node) or ``"cap"`` (first
    ``k`` entries of the sorted list).
    """

    kind: str = "none"
    k: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "random-k", "fixed-k", "cap"):
            raise InvalidParameter("unknown restriction %r" % self.kind)
        if self.kind != "none" and self.k < 1:
            raise InvalidParameter("restriction size must be >= 1")

    @classmethod
    def random_k(cls, k):
        return cls("random-k", k)

    @classmethod
    def fixed_k(cls, k, seed=0):
        return cls("fixed-k", k, seed)

    @classmethod
    def cap(cls, l):
        return cls("cap", l)

    @property
    def deterministic(self) -> bool:
        return self.kind != "random-k"


class QueryLedger:
    """Running query accounting.

    ``unique_nodes_queried`` is the rate-limit cost; ``total_queries`` also
    counts cache hits. With a ``budget`` the ledger refuses any charge that
    would take the spent count (unique or total, per ``budget_kind``) past it.
    """

    def __init__(self, node_count: int, budget: Optional[int] = None, budget_kind: str = "unique"):
        if budget is not None and budget < 0:
            raise InvalidParameter("budget must be non-negative")
        if budget_kind not in ("unique", "total"):
            raise InvalidParameter("budget_kind must be 'unique' or 'total'")
        self.budget = budget
        self.budget_kind = budget_kind
        self.total_queries = 0
        self.unique_nodes_queried = 0
        self._seen = np.zeros(node_count, dtype=bool)

    def __repr__(self):
        return "QueryLedger(unique=%d, total=%d, budget=%s)" % (
            self.unique_nodes_queried, self.total_queries, self.budget)

    def seen(self, u) -> bool:
        return bool(self._seen[u])

    @property
    def seen_mask(self) -> np.ndarray:
        view = self._seen.view()
        view.setflags(write=False)
        return view

    @property
    def spent(self) -> int:
        """Cost counted against the budget."""
        return self.unique_nodes_queried if self.budget_kind == "unique" else self.total_queries

    def remaining(self) -> Optional[int]:
        if self.budget is None:
            return None
        return self.budget - self.spent

    def _check(self, fresh: int, total: int) -> None:
        if self.budget is None:
            return
        extra = fresh if self.budget_kind == "unique" else total
        if self.spent + extra > self.budget:
            raise BudgetExhausted("%s-query budget %d exhausted" % (self.budget_kind, self.budget))

    def charge(self, u: int) -> None:
        fresh = not self._seen[u]
        self._check(int(fresh), 1)
        if fresh:
            self._seen[u] = True
            self.unique_nodes_queried += 1
        self.total_queries += 1

    def charge_many(self, nodes: np.ndarray, repeats: Optional[np.ndarray] = None) -> None:
        """Bill one query per element of ``nodes`` (all-or-nothing).

        ``repeats[i]`` bills ``nodes[i]`` that many times instead.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        if nodes.size == 0:
            return
        fresh = np.unique(nodes[~self._seen[nodes]])
        total = int(nodes.size if repeats is None else np.sum(repeats))
        self._check(int(fresh.size), total)
        self._seen[fresh] = True
        self.unique_nodes_queried += int(fresh.size)
        self.total_queries += total

    def snapshot(self) -> dict:
        return {"unique_nodes_queried": self.unique_nodes_queried,
                "total_queries": self.total_queries, "budget": self.budget,
                "budget_kind": self.budget_kind}

    @classmethod
    def merge(cls, ledgers: Sequence["QueryLedger"]) -> "QueryLedger":
        """Combine ledgers of independent chains over the same graph."""
        if not ledgers:
            raise InvalidParameter("nothing to merge")
        out = cls(len(ledgers[0]._seen))
        for led in ledgers:
            out._seen |= led._seen
            out.total_queries += led.total_queries
        out.unique_nodes_queried = int(out._seen.sum())
        return out


class AccessOracle:
    """Local-neighbourhood query interface over a :class:`Graph`.

    Every call to :meth:`neighbors` bills the ledger. Answers under the
    deterministic restrictions are fixed per node, so re-queries return
    identical lists and are counted as cache hits.

    Parameters
    ----------
    graph : Graph
    restriction : Restriction, optional
    budget : int, optional
        Query budget; exceeding it raises :class:`BudgetExhausted`.
    budget_kind : {"unique", "total"}
        Count the budget in distinct nodes queried (default) or in all
        queries including repeats.
    seed : int or numpy Generator, optional
        Stream for ``random-k`` answers.
    bidirectional : bool
        If true, every answer is filtered by the bidirectional check:
        ``v`` is kept only when ``u`` also appears in the answer for ``v``.
    """

    def __init__(self, graph: Graph, restriction: Optional[Restriction] = None,
                 budget: Optional[int] = None, seed=None, bidirectional: bool = False,
                 budget_kind: str = "unique"):
        self.graph = graph
        self.restriction = restriction or Restriction()
        self.bidirectional = bool(bidirectional)
        self.rng = np.random.default_rng(seed)
        self.ledger = QueryLedger(graph.node_count, budget, budget_kind)
        self._budget_kind = budget_kind
        self._budget = budget
        self._seed = seed
        self._raw_indptr, self._raw_indices = self._restricted_csr()
        if self.bidirectional and self.restriction.deterministic:
            self._indptr, self._indices = self._bidirectional_csr()
        else:
            self._indptr, self._indices = self._raw_indptr, self._raw_indices
        self._degrees = np.diff(self._indptr)

    def __repr__(self):
        return "AccessOracle(%r, %s, %r)" % (self.graph, self.restriction.kind, self.ledger)

    def _restricted_csr(self):
        g, r = self.graph, self.restriction
        if r.kind in ("none", "random-k"):
            return g.indptr, g.indices
        lists = []
        for u in range(g.node_count):
            nb = g.neighbors(u)
            if len(nb) > r.k:
                if r.kind == "cap":
                    nb = nb[:r.k]
                else:
                    pick = np.random.default_rng([r.seed, u]).choice(len(nb), r.k, replace=False)
                    nb = nb[np.sort(pick)]
            lists.append(nb)
        lens = np.array([len(x) for x in lists], dtype=np.int64)
        indptr = np.concatenate([[0], np.cumsum(lens)]).astype(np.int64)
        indices = np.concatenate(lists).astype(np.int64) if lists else np.zeros(0, np.int64)
        return indptr, indices

    def _raw_answer(self, u: int) -> np.ndarray:
        nb = self._raw_indices[self._raw_indptr[u]:self._raw_indptr[u + 1]]
        if self.restriction.kind == "random-k" and len(nb) > self.restriction.k:
            pick = self.rng.choice(len(nb), self.restriction.k, replace=False)
            nb = nb[np.sort(pick)]
        return nb

    def _bidirectional_csr(self):
        n = self.graph.node_count
        rows = np.repeat(np.arange(n), np.diff(self._raw_indptr))
        cols = self._raw_indices
        mat = sp.csr_matrix((np.ones(len(cols)), (rows, cols)), shape=(n, n))
        both = mat.multiply(mat.T).tocsr()
        both.sort_indices()
        return both.indptr.astype(np.int64), both.indices.astype(np.int64)

    def clone(self, seed=None) -> "AccessOracle":
        """A fresh oracle (new ledger) over the same graph and restriction."""
        return AccessOracle(self.graph, self.restriction, self._budget, budget_kind=self._budget_kind,
                            seed=self._seed if seed is None else seed,
                            bidirectional=self.bidirectional)

    def neighbors(self, u) -> np.ndarray:
        """Answer one neighbour query for ``u`` and bill it."""
        u = self.graph.check_node(u)
        if self.bidirectional:
            return self.bidirectional_neighbors(u)
        self.ledger.charge(u)
        return self._raw_answer(u).copy()

    def bidirectional_neighbors(self, u) -> np.ndarray:
        u = self.graph.check_node(u)
        self.ledger.charge(u)
        nb = self._raw_answer(u)
        keep = []
        for v in nb:
            self.ledger.charge(int(v))
            if u in self._raw_answer(int(v)):
                keep.append(int(v))
        return np.array(keep, dtype=np.int64)

    def degree(self, u) -> int:
        return len(self.neighbors(u))

    def attribute(self, u, name: str) -> float:
        """Read a node attribute; this is a node access and is billed."""
        if name == "degree":
            return float(self.degree(u))
        u = self.graph.check_node(u)
        self.ledger.charge(u)
        return float(self.graph.attributes[name][u])

    # Vectorised access.  These bill exactly as if neighbors() had been called
    # once per element of ``nodes``.

    def _require_vectorisable(self):
        if not self.restriction.deterministic:
            raise InvalidParameter("vectorised lookups need a deterministic restriction")

    def lookup(self, nodes: np.ndarray, repeats: Optional[np.ndarray] = None):
        """Bill one neighbour query per element; return ``(starts, degrees)``.

        Neighbour ``j`` of ``nodes[i]`` is then ``oracle.indices[starts[i] + j]``.
        ``repeats[i]`` bills ``nodes[i]`` as if it had been asked that many times.
        """
        self._require_vectorisable()
        nodes = np.asarray(nodes, dtype=np.int64)
        if self.bidirectional:
            pos = segment_indices(self._raw_indptr, nodes)
            raw = self._raw_indices[pos]
            rep = None
            if repeats is not None:
                lens = np.diff(self._raw_indptr)[nodes]
                rep = np.concatenate([repeats, np.repeat(repeats, lens)])
            self.ledger.charge_many(np.concatenate([nodes, raw]), rep)
        else:
            self.ledger.charge_many(nodes, repeats)
        return self._indptr[nodes], self._degrees[nodes]

    def lookup_degrees(self, nodes: np.ndarray, repeats: Optional[np.ndarray] = None) -> np.ndarray:
        return self.lookup(nodes, repeats)[1]

    def _peek(self, nodes: np.ndarray):
        """Unbilled ``(starts, degrees)`` for nodes whose query was already paid."""
        return self._indptr[nodes], self._degrees[nodes]

    @property
    def indices(self) -> np.ndarray:
        return self._indices

    @property
    def indptr(self) -> np.ndarray:
        return self._indptr


def neighbors(oracle: AccessOracle, u) -> np.ndarray:
    return oracle.neighbors(u)


def bidirectional_neighbors(oracle: AccessOracle, u) -> np.ndarray:
    return oracle.bidirectional_neighbors(u)


def degree(oracle: AccessOracle, u) -> int:
    return oracle.degree(u)
