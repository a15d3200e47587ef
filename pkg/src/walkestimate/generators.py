"""Case-study graph families, Barabasi-Albert graphs and edge-list I/O."""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from .errors import InvalidParameter, ParseError
from .graph import Graph

__all__ = ["cycle", "hypercube", "barbell", "balanced_tree", "complete",
           "path", "star", "barabasi_albert", "load_edge_list", "write_edge_list",
           "from_spec"]


def cycle(n: int) -> Graph:
    """Ring on ``n`` nodes; diameter ``n // 2``."""
    if n < 3:
        raise InvalidParameter("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    if n < 1:
        raise InvalidParameter("path needs n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> Graph:
    if n < 1:
        raise InvalidParameter("complete graph needs n >= 1")
    return Graph(n, itertools.combinations(range(n), 2))


def star(leaves: int) -> Graph:
    """Centre 0 joined to ``leaves`` leaves."""
    if leaves < 1:
        raise InvalidParameter("star needs at least one leaf")
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def hypercube(k: int) -> Graph:
    """``k``-dimensional hypercube; node ids are the k-bit labels."""
    if k < 1:
        raise InvalidParameter("hypercube needs k >= 1")
    n = 1 << k
    edges = [(u, u ^ (1 << b)) for u in range(n) for b in range(k) if u < u ^ (1 << b)]
    return Graph(n, edges)


def barbell(n: int) -> Graph:
    """Two cliques of ``(n - 1) / 2`` nodes joined through one centre node.

    Clique A is ``0..c-1``, clique B is ``c..2c-1`` and the centre is ``2c``;
    the centre is adjacent to node ``0`` and node ``c`` only.
    """
    if n < 5 or n % 2 == 0:
        raise InvalidParameter("barbell needs odd n >= 5")
    c = (n - 1) // 2
    edges = list(itertools.combinations(range(c), 2))
    edges += list(itertools.combinations(range(c, 2 * c), 2))
    edges += [(0, 2 * c), (c, 2 * c)]
    return Graph(n, edges)


def balanced_tree(height: int) -> Graph:
    """Complete binary tree with ``2**(height+1) - 1`` nodes, root 0."""
    if height < 1:
        raise InvalidParameter("tree height must be >= 1")
    n = (1 << (height + 1)) - 1
    return Graph(n, [((i - 1) // 2, i) for i in range(1, n)])


def barabasi_albert(n: int, m: int, seed=None) -> Graph:
    """Preferential-attachment graph grown from a star on ``m + 1`` nodes.

    Each new node attaches ``m`` edges to distinct existing nodes chosen with
    probability proportional to degree, giving ``m * (n - m)`` edges.
    """
    if m < 1 or n <= m:
        raise InvalidParameter("barabasi_albert needs n > m >= 1")
    rng = np.random.default_rng(seed)
    edges = [(0, i) for i in range(1, m + 1)]
    # One entry per edge endpoint, so uniform draws are degree-proportional.
    repeated = [0] * m + list(range(1, m + 1))
    for source in range(m + 1, n):
        targets = set()
        while len(targets) < m:
            targets.add(repeated[rng.integers(len(repeated))])
        targets = sorted(targets)
        edges.extend((source, t) for t in targets)
        repeated.extend(targets)
        repeated.extend([source] * m)
    return Graph(n, edges)


def load_edge_list(path, symmetrize: str = "intersection", attributes=None) -> Graph:
    """Read a whitespace-separated edge list.

    Tokens are arbitrary strings mapped to dense ids in order of first
    appearance (``Graph.labels`` keeps the mapping). Lines starting with ``#``
    and blank lines are ignored, self-loops dropped, duplicates collapsed.

    Parameters
    ----------
    path : path-like
    symmetrize : {"intersection", "union"}
        With ``"intersection"`` an undirected edge is kept only if both
        directions appear in the file; ``"union"`` keeps every pair.
    attributes : path-like, optional
        File of ``node attribute value`` lines.
    """
    if symmetrize not in ("intersection", "union"):
        raise InvalidParameter("symmetrize must be 'intersection' or 'union'")
    ids: dict = {}
    directed = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise ParseError("expected two node tokens, got %d" % len(parts), lineno)
        a, b = (ids.setdefault(tok, len(ids)) for tok in parts)
        if a != b:
            directed.add((a, b))
    if not ids:
        raise ParseError("edge list is empty")
    if symmetrize == "union":
        pairs = {(min(a, b), max(a, b)) for a, b in directed}
    else:
        pairs = {(min(a, b), max(a, b)) for a, b in directed if (b, a) in directed}
    labels = [None] * len(ids)
    for tok, i in ids.items():
        labels[i] = tok
    attrs = None
    if attributes is not None:
        attrs = _load_attributes(attributes, ids)
    return Graph(len(ids), sorted(pairs), attributes=attrs, labels=labels)


def _load_attributes(path, ids):
    table: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise ParseError("expected 'node attribute value'", lineno)
        tok, name, value = parts
        try:
            val = float(value)
        except ValueError:
            raise ParseError("attribute value %r is not numeric" % value, lineno) from None
        if tok not in ids:
            continue
        table.setdefault(name, np.full(len(ids), np.nan))[ids[tok]] = val
    return table


def write_edge_list(graph: Graph, path=None) -> str:
    """Serialise ``graph`` in the edge-list format; optionally write it.

    Each undirected edge is written in both directions so that the default
    intersection rule of :func:`load_edge_list` reads the same graph back.
    """
    lines = ["# nodes %d edges %d (each edge listed both ways)" % (graph.node_count,
                                                                  graph.edge_count)]
    lab = graph.labels if graph.labels is not None else [str(i) for i in range(graph.node_count)]
    for u, v in graph.edges:
        lines.append("%s %s" % (lab[u], lab[v]))
        lines.append("%s %s" % (lab[v], lab[u]))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def from_spec(spec: dict) -> Graph:
    """Build a graph from a small dict such as ``{"model": "ba", "n": 100, "m": 3}``."""
    spec = dict(spec)
    model = spec.pop("model", None)
    if model is None and "edge_list" in spec:
        return load_edge_list(spec["edge_list"], spec.get("symmetrize", "intersection"),
                              spec.get("attributes"))
    builders = {
        "cycle": lambda: cycle(spec["n"]),
        "hypercube": lambda: hypercube(spec["k"]),
        "barbell": lambda: barbell(spec["n"]),
        "tree": lambda: balanced_tree(spec["height"]),
        "ba": lambda: barabasi_albert(spec["n"], spec.get("m", 5), spec.get("seed")),
        "complete": lambda: complete(spec["n"]),
        "path": lambda: path(spec["n"]),
    }
    if model not in builders:
        raise InvalidParameter("unknown graph model %r" % model)
    try:
        return builders[model]()
    except KeyError as exc:
        raise InvalidParameter("graph model %r needs parameter %s" % (model, exc)) from None
