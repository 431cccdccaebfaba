"""Brute-force ground truth on tiny instances: the full 2^n-state chain.

States are integer bitmasks.  Everything here favours being unquestionably
correct over being fast; the hard size cap keeps dense solves immediate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._catalog_data import CONNECTED_GRAPH_MASKS
from .birth_death import ReducibleChainError, _poisson_window
from .graphs import Graph, complete_graph

__all__ = [
    "FullChain",
    "SizeCapError",
    "build_full_chain",
    "full_stationary",
    "full_transient",
    "full_worst_case_tv",
    "full_mixing_time",
    "count_marginal",
    "per_state_count_rates",
    "is_count_lumpable",
    "mask_to_graph",
    "catalog_graphs",
    "cycle_graph",
    "petersen_graph",
]

SIZE_CAP = 12


class SizeCapError(ValueError):
    """Refused to build a full chain beyond 2^12 states."""


@dataclass(frozen=True, eq=False)
class FullChain:
    """Transition structure of the full dynamics on a graph with n <= 12.

    flip_rates[x, v] is the rate of flipping bit v in state x, which is
    alpha/2 + (1-alpha)(d_v^S(x)/d_v)^2 with S the side opposite to v's
    current opinion.  Only Hamming-distance-1 transitions exist.
    """

    graph: Graph
    alpha: float
    flip_rates: np.ndarray  # (2^n, n)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_states(self) -> int:
        return 1 << self.graph.n

    def total_out(self) -> np.ndarray:
        return self.flip_rates.sum(axis=1)


def build_full_chain(g: Graph, alpha: float) -> FullChain:
    if g.n > SIZE_CAP:
        raise SizeCapError(f"full chain capped at n <= {SIZE_CAP}, got n = {g.n}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"need alpha in [0,1], got {alpha}")
    states = np.arange(1 << g.n, dtype=np.uint64)
    flip = np.empty((states.shape[0], g.n))
    for v in range(g.n):
        nbr_mask = np.uint64(sum(1 << int(u) for u in g.neighbors(v)))
        ones_in_nbr = np.bitwise_count(states & nbr_mask).astype(float)
        d_v = float(g.degrees[v])
        x_v = (states >> np.uint64(v)) & np.uint64(1)
        d_opposite = np.where(x_v == 0, ones_in_nbr, d_v - ones_in_nbr)
        flip[:, v] = alpha / 2.0 + (1.0 - alpha) * (d_opposite / d_v) ** 2
    return FullChain(graph=g, alpha=alpha, flip_rates=flip)


def _dense_generator(chain: FullChain) -> np.ndarray:
    size = chain.num_states
    q = np.zeros((size, size))
    states = np.arange(size)
    for v in range(chain.n):
        q[states, states ^ (1 << v)] = chain.flip_rates[:, v]
    q[states, states] = -chain.total_out()
    return q


def full_stationary(chain: FullChain) -> np.ndarray:
    """Solve the global balance equations pi Q = 0 with sum(pi) = 1, densely."""
    if chain.alpha <= 0.0:
        raise ReducibleChainError("alpha = 0 has absorbing consensus states")
    q = _dense_generator(chain)
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(chain.num_states)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _flip_step(vec, p_flip, p_stay, n):
    # one uniformized DTMC step; works on a vector or on rows of a matrix
    states = np.arange(vec.shape[-1])
    out = vec * p_stay
    for v in range(n):
        out[..., states ^ (1 << v)] += vec * p_flip[:, v]
    return out


def full_transient(chain: FullChain, x0: int, t: float) -> np.ndarray:
    """Law at time t started from state x0, by uniformization."""
    if not 0 <= x0 < chain.num_states:
        raise ValueError(f"state {x0} out of range")
    if t < 0:
        raise ValueError(f"need t >= 0, got {t}")
    vec = np.zeros(chain.num_states)
    vec[x0] = 1.0
    return _uniformize(chain, vec, t)


def _uniformize(chain: FullChain, vec: np.ndarray, t: float) -> np.ndarray:
    total = chain.total_out()
    lam = float(total.max())
    if t == 0.0 or lam == 0.0:
        return vec
    p_flip = chain.flip_rates / lam
    p_stay = 1.0 - total / lam
    k_lo, k_hi, w = _poisson_window(lam * t)
    acc = w[0] * vec if k_lo == 0 else np.zeros_like(vec)
    for k in range(1, k_hi + 1):
        vec = _flip_step(vec, p_flip, p_stay, chain.n)
        if k >= k_lo:
            acc = acc + w[k - k_lo] * vec
    return acc / acc.sum(axis=-1, keepdims=True) if acc.ndim > 1 else acc / acc.sum()


def full_worst_case_tv(chain: FullChain, t: float, pi: np.ndarray | None = None) -> float:
    """Exact d(t) over the full state space (practical up to n ~ 8)."""
    if pi is None:
        pi = full_stationary(chain)
    rows = _uniformize(chain, np.eye(chain.num_states), t)
    return 0.5 * float(np.abs(rows - pi).sum(axis=1).max())


def full_mixing_time(
    chain: FullChain, epsilon: float = 0.25, rel_tol: float = 1e-3, t_cap: float = 1e12
) -> float:
    """Exact full-chain mixing time by doubling and bisection on d(t)."""
    pi = full_stationary(chain)
    if 1.0 - pi.min() <= epsilon:
        return 0.0
    t_lo, t_hi = 0.0, 1.0
    while full_worst_case_tv(chain, t_hi, pi) > epsilon:
        t_lo = t_hi
        t_hi *= 2.0
        if t_hi > t_cap:
            raise RuntimeError(f"full-chain mixing beyond cap {t_cap}")
    while t_hi - t_lo > rel_tol * t_hi:
        mid = 0.5 * (t_lo + t_hi)
        if full_worst_case_tv(chain, mid, pi) <= epsilon:
            t_hi = mid
        else:
            t_lo = mid
    return t_hi


def count_marginal(dist: np.ndarray, n: int) -> np.ndarray:
    """Push a law over bitmask states down to the count of ones."""
    counts = np.bitwise_count(np.arange(dist.shape[0], dtype=np.uint64)).astype(np.int64)
    return np.bincount(counts, weights=dist, minlength=n + 1)


def per_state_count_rates(chain: FullChain):
    """(q_plus(x), q_minus(x)) per state: total up-flip and down-flip rates."""
    states = np.arange(chain.num_states, dtype=np.uint64)
    up = np.zeros(chain.num_states)
    down = np.zeros(chain.num_states)
    for v in range(chain.n):
        x_v = ((states >> np.uint64(v)) & np.uint64(1)).astype(bool)
        up += np.where(~x_v, chain.flip_rates[:, v], 0.0)
        down += np.where(x_v, chain.flip_rates[:, v], 0.0)
    return up, down


def is_count_lumpable(chain: FullChain, tol: float = 1e-12) -> bool:
    """True when the count-level rates depend on a state only through its count."""
    up, down = per_state_count_rates(chain)
    counts = np.bitwise_count(np.arange(chain.num_states, dtype=np.uint64)).astype(np.int64)
    for a in range(chain.n + 1):
        sel = counts == a
        if np.ptp(up[sel]) > tol or np.ptp(down[sel]) > tol:
            return False
    return True


# -- graph catalog ----------------------------------------------------------------


def mask_to_graph(n: int, mask: int) -> Graph:
    pairs = list(itertools.combinations(range(n), 2))
    edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
    return Graph.from_edges(n, edges)


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])


def petersen_graph() -> Graph:
    edges = [(v, (v + 1) % 5) for v in range(5)]
    edges += [(5 + v, 5 + (v + 2) % 5) for v in range(5)]
    edges += [(v, 5 + v) for v in range(5)]
    return Graph.from_edges(10, edges)


def catalog_graphs(max_n: int = 10):
    """(name, Graph) pairs: every connected graph up to 6 vertices (one per
    isomorphism class) plus K_7, K_8, C_7 and the Petersen graph."""
    out = []
    for n, masks in CONNECTED_GRAPH_MASKS.items():
        if n > max_n:
            continue
        for mask in masks:
            out.append((f"n{n}_m{mask}", mask_to_graph(n, mask)))
    named = [
        ("K7", lambda: complete_graph(7)),
        ("K8", lambda: complete_graph(8)),
        ("C7", lambda: cycle_graph(7)),
        ("petersen", petersen_graph),
    ]
    for name, make in named:
        g = make()
        if g.n <= max_n:
            out.append((name, g))
    return out
