"""Transition designs and exact analysis of small chains.

A :class:`Design` describes one of the input random walks (simple or
Metropolis-Hastings, optionally lazy).  The same object drives forward walks,
backward probability estimation and the explicit-matrix analysis below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (DeadEnd, DegenerateTarget, InvalidParameter, NoConvergence,
                     NotIrreducible, WalkEstimateError)
from .graph import Graph

__all__ = ["Design", "SRW", "MHRW", "SpectralSummary", "srw_row", "mhrw_row",
           "transition_matrix", "exact_step_distribution", "step_distributions",
           "stationary_distribution", "stationary_for", "relative_pointwise_distance",
           "spectral_summary", "burn_in_length"]


@dataclass(frozen=True)
class Design:
    """Transition rule of an input random walk.

    ``kind`` is ``"srw"`` or ``"mhrw"``.  A lazy design stays put with
    probability 1/2 before applying the base rule, which removes periodicity
    on bipartite graphs.
    """

    kind: str = "srw"
    lazy: bool = False

    def __post_init__(self):
        if self.kind not in ("srw", "mhrw"):
            raise InvalidParameter("unknown design %r" % self.kind)

    @property
    def name(self) -> str:
        return self.kind + ("-lazy" if self.lazy else "")

    @property
    def default_target(self) -> str:
        """Stationary law of the design: degree-proportional or uniform."""
        return "degree" if self.kind == "srw" else "uniform"

    def row(self, u, nbrs, nbr_degrees=None) -> dict:
        """Distribution over ``{u} | N(u)`` as a ``{node: probability}`` dict."""
        if self.kind == "srw":
            r = srw_row(u, nbrs)
        else:
            r = mhrw_row(u, nbrs, nbr_degrees)
        if self.lazy:
            r = {v: 0.5 * p for v, p in r.items()}
            r[u] = r.get(u, 0.0) + 0.5
        return r

    def into(self, deg_from, deg_to):
        """``T(u' -> u)`` for neighbours ``u' != u`` given both degrees (vectorised)."""
        deg_from = np.asarray(deg_from, dtype=float)
        if self.kind == "srw":
            p = 1.0 / deg_from
        else:
            p = 1.0 / np.maximum(deg_from, np.asarray(deg_to, dtype=float))
        return 0.5 * p if self.lazy else p


SRW = Design("srw")
MHRW = Design("mhrw")


def srw_row(u, nbrs) -> dict:
    nbrs = [int(v) for v in nbrs]
    if not nbrs:
        raise DeadEnd("node %s has no neighbours" % (u,))
    p = 1.0 / len(nbrs)
    row = {int(u): 0.0}
    for v in nbrs:
        row[v] = p
    return row


def mhrw_row(u, nbrs, nbr_degrees) -> dict:
    """Metropolis-Hastings row with uniform target.

    ``T(u, v) = min(1, d(u)/d(v)) / d(u)`` for each neighbour and the rest of
    the mass on the self-loop.
    """
    nbrs = [int(v) for v in nbrs]
    if not nbrs:
        raise DeadEnd("node %s has no neighbours" % (u,))
    if nbr_degrees is None or len(nbr_degrees) != len(nbrs):
        raise InvalidParameter("MHRW needs the degree of every neighbour")
    du = len(nbrs)
    row = {}
    total = 0.0
    for v, dv in zip(nbrs, nbr_degrees):
        p = min(1.0, du / dv) / du
        row[v] = p
        total += p
    row[int(u)] = max(0.0, 1.0 - total)
    return row


def transition_matrix(graph: Graph, design: Design = SRW, sparse: bool = False):
    """Explicit ``n x n`` transition matrix of ``design`` on ``graph``."""
    n = graph.node_count
    deg = graph.degrees.astype(float)
    if n and (deg == 0).any():
        raise DeadEnd("graph has isolated nodes")
    rows = np.repeat(np.arange(n), graph.degrees)
    cols = graph.indices
    if design.kind == "srw":
        vals = 1.0 / deg[rows]
    else:
        vals = 1.0 / np.maximum(deg[rows], deg[cols])
    T = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    diag = 1.0 - np.asarray(T.sum(axis=1)).ravel()
    diag[np.abs(diag) < 1e-15] = 0.0
    T = T + sp.diags(diag)
    if design.lazy:
        T = 0.5 * (T + sp.identity(n))
    T = sp.csr_matrix(T)
    return T if sparse else T.toarray()


def _check_t(t):
    if t < 0:
        raise InvalidParameter("t must be >= 0")


def exact_step_distribution(T, start: int, t: int) -> np.ndarray:
    """``p_t = e_start T^t`` by repeated vector-matrix products."""
    _check_t(t)
    n = T.shape[0]
    p = np.zeros(n)
    p[start] = 1.0
    Tt = T.T
    for _ in range(t):
        p = Tt @ p
    return np.asarray(p).ravel()


def step_distributions(T, start: int, t_max: int) -> np.ndarray:
    """Stack of ``p_0 .. p_t_max``; shape ``(t_max + 1, n)``."""
    _check_t(t_max)
    n = T.shape[0]
    out = np.zeros((t_max + 1, n))
    out[0, start] = 1.0
    Tt = T.T
    for s in range(1, t_max + 1):
        out[s] = Tt @ out[s - 1]
    return out


def _irreducible(T) -> bool:
    M = sp.csr_matrix(T)
    ncomp, _ = connected_components(M, directed=True, connection="strong")
    return ncomp == 1


def stationary_distribution(T) -> np.ndarray:
    """Solve ``pi T = pi``, ``sum(pi) = 1`` for an irreducible chain."""
    if not _irreducible(T):
        raise NotIrreducible("transition matrix is not irreducible")
    n = T.shape[0]
    if sp.issparse(T) and n > 3000:
        A = (sp.csr_matrix(T).T - sp.identity(n)).tolil()
        A[0, :] = np.ones(n)
        b = np.zeros(n)
        b[0] = 1.0
        pi = sp.linalg.spsolve(A.tocsc(), b)
    else:
        Td = T.toarray() if sp.issparse(T) else np.asarray(T)
        A = Td.T - np.eye(n)
        A[0, :] = 1.0
        b = np.zeros(n)
        b[0] = 1.0
        pi = scipy.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_for(graph: Graph, design: Design) -> np.ndarray:
    """Closed-form stationary law: ``d(v) / 2|E|`` for SRW, uniform for MHRW."""
    if design.kind == "srw":
        return graph.degrees / (2.0 * graph.edge_count)
    return np.full(graph.node_count, 1.0 / graph.node_count)


def _dense(T):
    return T.toarray() if sp.issparse(T) else np.asarray(T, dtype=float)


def _adjacent_mask(T):
    M = _dense(T) > 0
    np.fill_diagonal(M, False)
    return M


def relative_pointwise_distance(T, t: int, pi: Optional[np.ndarray] = None) -> float:
    """``max |T^t[u, v] - pi(v)| / pi(v)`` over adjacent ``(u, v)``."""
    _check_t(t)
    Td = _dense(T)
    if pi is None:
        pi = stationary_distribution(Td)
    if (pi <= 0).any():
        raise DegenerateTarget("stationary probability vanishes")
    Tt = np.linalg.matrix_power(Td, t)
    return _rpd(Tt, pi, _adjacent_mask(Td))


def _rpd(Tt, pi, mask):
    rel = np.abs(Tt - pi[None, :]) / pi[None, :]
    return float(rel[mask].max()) if mask.any() else 0.0


@dataclass(frozen=True)
class SpectralSummary:
    second_eigenvalue: float
    spectral_gap: float
    stationary: np.ndarray


def spectral_summary(T, pi: Optional[np.ndarray] = None, tol: float = 1e-9) -> SpectralSummary:
    """Second-largest eigenvalue ``s_2`` and gap ``1 - s_2``.

    For a reversible chain, ``diag(sqrt(pi)) T diag(1/sqrt(pi))`` is symmetric
    and has the same spectrum.  Dense symmetric solve up to 2000 states,
    Lanczos (``eigsh``) above.
    """
    n = T.shape[0]
    if pi is None:
        pi = stationary_distribution(T)
    r = np.sqrt(pi)
    if n <= 2000:
        S = _dense(T) * r[:, None] / r[None, :]
        asym = np.abs(S - S.T).max()
        if asym > 1e-8:
            ev = np.sort(np.linalg.eigvals(_dense(T)).real)[::-1]
        else:
            ev = np.sort(scipy.linalg.eigvalsh(0.5 * (S + S.T)))[::-1]
        s2 = float(ev[1]) if n > 1 else 0.0
    else:
        from scipy.sparse.linalg import ArpackNoConvergence, eigsh
        Ts = sp.csr_matrix(T)
        S = sp.diags(r) @ Ts @ sp.diags(1.0 / r)
        S = 0.5 * (S + S.T)
        try:
            ev = eigsh(S, k=2, which="LA", tol=tol, return_eigenvectors=False)
        except ArpackNoConvergence as exc:
            raise WalkEstimateError("eigensolver did not converge") from exc
        s2 = float(np.sort(ev)[0])
    return SpectralSummary(s2, 1.0 - s2, pi)


def burn_in_length(T, eps: float, cap: int = 10**6, pi: Optional[np.ndarray] = None) -> int:
    """Smallest ``t`` with relative point-wise distance at most ``eps``."""
    if eps <= 0:
        raise InvalidParameter("eps must be positive")
    Td = _dense(T)
    if pi is None:
        pi = stationary_distribution(Td)
    mask = _adjacent_mask(Td)
    M = Td.copy()
    for t in range(1, cap + 1):
        if _rpd(M, pi, mask) <= eps:
            return t
        M = M @ Td
    raise NoConvergence("relative point-wise distance above %g after %d steps" % (eps, cap))
