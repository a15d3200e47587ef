"""Analytics for an idealised walk-then-reject sampler.

Two views are provided. The bound view works from the spectral gap
``lam``, the maximum degree ``d_max``, a scale ``gamma`` and the accuracy
target ``delta``::

    f(t)  = t * (gamma - delta) / (gamma - (1 - lam)**t * d_max)
    t_opt = -log(-W(-gamma / (e * d_max)) * d_max / gamma) / log(1 - lam)
    c_RW  = log(delta / d_max) / log(1 - lam)

with ``W`` the lower real branch of the Lambert function. The exact view
walks an explicit transition matrix and prices acceptance-rejection with the
true minimum probability ratio, ``c(t) = t / min_v (p_t(v) / pi(v))``.

The odd-cycle helpers give the same exact cost for a simple walk on a cycle
of odd length ``l`` in closed binomial form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError, InvalidParameter
from .graph import Graph
from .transition import (Design, spectral_summary, stationary_for,
                         step_distributions, transition_matrix)

__all__ = ["lambert_w_lower", "IdealParams", "ideal_cost", "ideal_cost_curve", "t_opt",
           "f_at_t_opt", "integer_minimum", "rw_cost", "improvement_ratio",
           "exact_ideal_cost_curve", "exact_ideal_minimum", "case_study_ratio",
           "cycle_min_probability", "cycle_cost_AR", "cycle_optimal_k",
           "cycle_optimal_k_bruteforce", "minmax_probability_curve"]

_INV_E = math.exp(-1.0)


def lambert_w_lower(x: float, tol: float = 1e-15, maxiter: int = 100) -> float:
    """Lower real branch ``W_{-1}(x)`` for ``-1/e <= x < 0`` (Halley iteration).

    Examples
    --------
    >>> round(lambert_w_lower(-math.exp(-1)), 12)
    -1.0
    """
    x = float(x)
    if not (-_INV_E - 1e-16 <= x < 0):
        raise DomainError("lower Lambert branch needs -1/e <= x < 0, got %r" % x)
    if x <= -_INV_E:
        return -1.0
    if x < -0.25:
        # Series around the branch point, on the p < 0 side.
        p = -math.sqrt(max(0.0, 2.0 * (1.0 + math.e * x)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    for _ in range(maxiter):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            break
    return min(w, -1.0)


@dataclass(frozen=True)
class IdealParams:
    """Inputs of the bound view.

    Attributes
    ----------
    lam : float
        Spectral gap, ``0 < lam < 1``.
    d_max : float
        Maximum degree, ``>= 1``.
    gamma : float
        Scale parameter, ``delta < gamma``.
    delta : float
        Required l-infinity distance, ``0 < delta``.
    """

    lam: float
    d_max: float
    gamma: float
    delta: float

    def __post_init__(self):
        if not 0 < self.lam < 1:
            raise InvalidParameter("spectral gap must lie in (0, 1)")
        if self.d_max < 1:
            raise InvalidParameter("d_max must be >= 1")
        if not 0 < self.delta < self.gamma:
            raise InvalidParameter("need 0 < delta < gamma")

    @property
    def rate(self) -> float:
        return 1.0 - self.lam


def ideal_cost(params: IdealParams, t) -> np.ndarray:
    """``f(t)``; ``inf`` where ``(1 - lam)**t * d_max >= gamma``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParameter("t must be >= 0")
    denom = params.gamma - params.rate ** t * params.d_max
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0, t * (params.gamma - params.delta) / np.where(denom > 0, denom, 1.0),
                       np.inf)
    return out if out.ndim else float(out)


def ideal_cost_curve(params: IdealParams, ts) -> list:
    """``[(t, f(t)), ...]`` for the given walk lengths."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 1):
        raise InvalidParameter("walk lengths must be >= 1")
    return list(zip(ts.tolist(), np.atleast_1d(ideal_cost(params, ts)).tolist()))


def _check_tdomain(params):
    if params.gamma > params.d_max:
        raise DomainError("t_opt needs gamma <= d_max")


def t_opt(params: IdealParams) -> float:
    """Walk length minimising ``f`` over real ``t`` (independent of ``delta``)."""
    _check_tdomain(params)
    w = lambert_w_lower(-params.gamma / (math.e * params.d_max))
    arg = -w * params.d_max / params.gamma
    return max(0.0, -math.log(arg) / math.log(params.rate))


def f_at_t_opt(params: IdealParams) -> float:
    """``f(t_opt)``, using the ``t -> 0`` limit when ``t_opt`` is 0."""
    t = t_opt(params)
    if t <= 1e-12:
        return (params.gamma - params.delta) / (-params.d_max * math.log(params.rate))
    return float(ideal_cost(params, t))


def integer_minimum(params: IdealParams) -> tuple:
    """Scan integer ``t`` in ``[1, 10 * t_opt]`` and return ``(t, f(t))``."""
    hi = max(10, int(math.ceil(10 * t_opt(params))))
    ts = np.arange(1, hi + 1)
    f = ideal_cost(params, ts)
    i = int(np.argmin(f))
    return int(ts[i]), float(f[i])


def rw_cost(params: IdealParams) -> float:
    """Walk length the input walk needs to reach ``delta``: ``log(delta/d_max)/log(1-lam)``."""
    if params.delta >= params.d_max:
        raise DomainError("delta >= d_max gives a non-positive walk cost")
    return math.log(params.delta / params.d_max) / math.log(params.rate)


def improvement_ratio(c=None, c_rw=None, params: Optional[IdealParams] = None) -> float:
    """``1 - c / c_RW``.

    Pass the two costs, or ``params`` to use the integer minimum of ``f``
    against :func:`rw_cost`.
    """
    if params is not None:
        c = integer_minimum(params)[1]
        c_rw = rw_cost(params)
    if c is None or c_rw is None:
        raise InvalidParameter("need both costs or params")
    if c_rw <= 0:
        raise DomainError("c_RW must be positive")
    return 1.0 - c / c_rw


def _target(graph, design, target):
    if target is None:
        target = design.default_target
    if isinstance(target, str):
        if target == "uniform":
            return np.full(graph.node_count, 1.0 / graph.node_count)
        if target == "degree":
            return graph.degrees / (2.0 * graph.edge_count)
        raise InvalidParameter("unknown target %r" % target)
    pi = np.asarray(target, dtype=float)
    return pi / pi.sum()


def exact_ideal_cost_curve(graph: Graph, design: Design, start: int, t_max: int,
                           target=None) -> np.ndarray:
    """Exact expected steps per accepted sample for ``t = 0..t_max``.

    Entry ``t`` is ``t / min_v (p_t(v) / pi(v))``; it is ``inf`` while some
    node is still unreachable. Entry 0 is ``inf`` unless the graph is a
    single node.
    """
    T = transition_matrix(graph, design, sparse=True)
    P = step_distributions(T, start, t_max)
    pi = _target(graph, design, target)
    ratio = (P / pi[None, :]).min(axis=1)
    ts = np.arange(t_max + 1, dtype=float)
    with np.errstate(divide="ignore"):
        c = np.where(ratio > 1e-300, ts / np.where(ratio > 1e-300, ratio, 1.0), np.inf)
    c[0] = np.inf if graph.node_count > 1 else 0.0
    return c


def exact_ideal_minimum(graph: Graph, design: Design, start: int, t_max: int,
                        target=None) -> tuple:
    """``(t, c(t))`` at the minimum of :func:`exact_ideal_cost_curve`."""
    c = exact_ideal_cost_curve(graph, design, start, t_max, target)
    t = int(np.argmin(c))
    if not np.isfinite(c[t]):
        raise DomainError("no finite cost up to t_max=%d" % t_max)
    return t, float(c[t])


def case_study_ratio(graph: Graph, design: Design = Design("mhrw", lazy=True),
                     start: Optional[int] = None, delta: float = 1e-3,
                     t_max: Optional[int] = None) -> dict:
    """Improvement of the exact ideal sampler over the walk-only cost bound.

    ``c_RW`` comes from :func:`rw_cost` with the chain's own spectral gap and
    the graph's maximum degree; ``c`` is the exact minimum of
    :func:`exact_ideal_cost_curve` from ``start`` (default: a peripheral
    node).
    """
    if start is None:
        start = graph.peripheral_node()
    T = transition_matrix(graph, design, sparse=False)
    summ = spectral_summary(T, stationary_for(graph, design))
    lam = summ.spectral_gap
    params = IdealParams(lam, graph.d_max, graph.d_max, delta)
    c_rw = rw_cost(params)
    if t_max is None:
        t_max = int(max(4 * graph.diameter(), math.ceil(2 * c_rw))) + 1
    t, c = exact_ideal_minimum(graph, design, start, t_max)
    return {"lam": lam, "d_max": graph.d_max, "c_rw": c_rw, "t_best": t, "c": c,
            "ratio": 1.0 - c / c_rw}


# Odd cycles.

def _check_cycle(l):
    if l < 3 or l % 2 == 0:
        raise InvalidParameter("cycle length must be odd and >= 3")


def cycle_min_probability(l: int, k: int) -> Fraction:
    """Minimum landing probability after ``k`` simple-walk steps on an odd cycle.

    Even ``k`` uses ``m = (k - l + 1) / 2``::

        V = (C(k+1, m) + sum_{i=0}^{floor(m/l)-1} C(k+1, i*l + m mod l)) / 2**k

    odd ``k`` reuses the value at ``k - 1``; ``m < 0`` means some node is
    out of reach and the minimum is 0.
    """
    _check_cycle(l)
    if k < 0:
        raise InvalidParameter("k must be >= 0")
    if k % 2:
        return cycle_min_probability(l, k - 1) if k > 0 else Fraction(0)
    m = (k - l + 1) // 2
    if m < 0:
        return Fraction(0)
    tot = math.comb(k + 1, m)
    for i in range(m // l):
        tot += math.comb(k + 1, i * l + m % l)
    return Fraction(tot, 2 ** k)


def _cycle_min_matrix(l, k):
    from .generators import cycle
    T = transition_matrix(cycle(l), Design("srw"))
    p = np.zeros(l)
    p[0] = 1.0
    for _ in range(k):
        p = p @ T
    return float(p.min())


def cycle_cost_AR(l: int, k: int, method: str = "closed") -> float:
    """Expected steps per accepted sample, ``k / (l * V_min)``; ``inf`` if ``V_min = 0``.

    ``method="matrix"`` computes ``V_min`` from explicit matrix powers instead.
    """
    _check_cycle(l)
    if method == "closed":
        v = cycle_min_probability(l, k)
        return float(Fraction(k) / (l * v)) if v > 0 else math.inf
    if method == "matrix":
        v = _cycle_min_matrix(l, k)
        return k / (l * v) if v > 1e-300 else math.inf
    raise InvalidParameter("method must be 'closed' or 'matrix'")


def cycle_optimal_k(l: int) -> float:
    """Approximate optimal walk length ``l**2 / 3 - 1``."""
    _check_cycle(l)
    return l * l / 3.0 - 1.0


def cycle_optimal_k_bruteforce(l: int, k_max: Optional[int] = None) -> int:
    """``argmin_k cycle_cost_AR(l, k)`` over ``1 <= k <= k_max`` (default ``l**2``)."""
    _check_cycle(l)
    k_max = l * l if k_max is None else k_max
    costs = [cycle_cost_AR(l, k) for k in range(1, k_max + 1)]
    return int(np.argmin(costs)) + 1


def minmax_probability_curve(graph: Graph, design: Design, start: int, ts) -> tuple:
    """``(min_v p_t(v), max_v p_t(v))`` arrays for each ``t`` in ``ts``."""
    ts = np.asarray(ts, dtype=np.int64)
    if ts.size == 0:
        return np.zeros(0), np.zeros(0)
    if ts.min() < 0:
        raise InvalidParameter("t must be >= 0")
    P = step_distributions(transition_matrix(graph, design, sparse=True), start, int(ts.max()))
    return P[ts].min(axis=1), P[ts].max(axis=1)
