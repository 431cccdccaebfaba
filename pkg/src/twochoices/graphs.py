"""Immutable undirected graphs and the three generator families used in experiments."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "GenerationError",
    "complete_graph",
    "erdos_renyi",
    "random_regular",
    "write_edge_list",
    "read_edge_list",
    "parse_edge_list",
]

RETRY_CAP = 1000


class GenerationError(RuntimeError):
    """A random graph generator exhausted its retry budget."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple, undirected, connected graph in CSR form.

    Attributes
    ----------
    n : int
        Number of vertices (labelled 0..n-1).
    indptr : ndarray, shape (n+1,)
        CSR offsets; the neighbours of v are ``indices[indptr[v]:indptr[v+1]]``,
        sorted ascending.
    indices : ndarray, shape (2m,)
        Flat neighbour lists.
    degrees : ndarray, shape (n,)
        degrees[v] == number of neighbours of v, always >= 1.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build and validate a graph from an iterable of (u, v) pairs."""
        if n < 2:
            raise ValueError(f"graph needs at least 2 vertices, got n={n}")
        edges = list(edges)
        adj = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        degrees = np.array([len(a) for a in adj], dtype=np.int64)
        if degrees.min() < 1:
            raise ValueError("isolated vertex: graph must be connected")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.empty(indptr[-1], dtype=np.int64)
        for v in range(n):
            indices[indptr[v]:indptr[v + 1]] = sorted(adj[v])
        g = cls(n=n, indptr=indptr, indices=indices, degrees=degrees)
        if not g.is_connected():
            raise ValueError("graph is not connected")
        return g

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def edges(self):
        """Iterate edges as (u, v) with u < v, in sorted order."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield (u, int(v))

    def is_connected(self) -> bool:
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            v = stack.pop()
            for u in self.indices[self.indptr[v]:self.indptr[v + 1]]:
                if not seen[u]:
                    seen[u] = True
                    count += 1
                    stack.append(int(u))
        return count == self.n

    def validate(self) -> None:
        """Re-check all structural invariants; raises AssertionError on breakage."""
        assert self.degrees.shape == (self.n,)
        assert np.array_equal(np.diff(self.indptr), self.degrees)
        nbr_sets = [set(map(int, self.neighbors(v))) for v in range(self.n)]
        for v in range(self.n):
            nbrs = self.neighbors(v)
            assert v not in nbr_sets[v], "self-loop"
            assert len(nbr_sets[v]) == len(nbrs), "duplicate neighbour"
            assert np.all(np.diff(nbrs) > 0), "neighbours not sorted"
            for u in nbrs:
                assert v in nbr_sets[u], "asymmetric adjacency"
        assert self.is_connected()

    def same_edges(self, other: "Graph") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )


def complete_graph(n: int) -> Graph:
    """K_n: every vertex adjacent to every other."""
    if n < 2:
        raise ValueError(f"complete graph needs n >= 2, got {n}")
    indptr = np.arange(n + 1, dtype=np.int64) * (n - 1)
    indices = np.empty(n * (n - 1), dtype=np.int64)
    row = np.arange(n, dtype=np.int64)
    for v in range(n):
        indices[indptr[v]:indptr[v + 1]] = np.concatenate([row[:v], row[v + 1:]])
    degrees = np.full(n, n - 1, dtype=np.int64)
    return Graph(n=n, indptr=indptr, indices=indices, degrees=degrees)


def erdos_renyi(n: int, mean_degree: float, seed: int) -> Graph:
    """G(n, p) with p = mean_degree/(n-1), resampled until connected.

    p is clamped to 1, so mean_degree >= n-1 yields the complete graph.
    Deterministic for a given seed; raises GenerationError after
    RETRY_CAP consecutive disconnected draws (mean_degree too small).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if mean_degree <= 0:
        raise ValueError(f"mean_degree must be positive, got {mean_degree}")
    p = min(1.0, mean_degree / (n - 1))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(RETRY_CAP):
        mask = rng.random(iu.shape[0]) < p
        try:
            return Graph.from_edges(n, zip(iu[mask], ju[mask]))
        except ValueError:
            continue
    raise GenerationError(
        f"no connected G({n}, p={p:.4g}) in {RETRY_CAP} draws; mean_degree too small"
    )


def random_regular(n: int, d: int, seed: int) -> Graph:
    """Random d-regular simple connected graph via the pairing model.

    Stubs are shuffled and paired; clashing pairs (self-loops /
    multi-edges) put their stubs back for re-pairing, and the whole
    attempt is rejected when no clash-free completion exists.  Attempts
    repeat until the result is simple and connected.
    """
    if n * d % 2 != 0:
        raise ValueError(f"n*d must be even, got n={n}, d={d}")
    if d >= n:
        raise ValueError(f"need d < n, got d={d}, n={n}")
    if d < 3:
        raise ValueError(f"need d >= 3 for connectivity, got d={d}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    for _ in range(RETRY_CAP):
        edges = _pair_stubs(n, d, rng)
        if edges is None:
            continue
        g = Graph(
            n=n,
            **_csr_from_edge_set(n, edges),
        )
        if g.is_connected():
            return g
    raise GenerationError(f"no simple connected {d}-regular graph on {n} vertices in {RETRY_CAP} attempts")


def _pair_stubs(n, d, rng):
    # One pairing attempt: returns an edge set or None if stuck.
    edges = set()
    stubs = list(range(n)) * d
    while stubs:
        rng.shuffle(stubs)
        leftover = []
        it = iter(stubs)
        for s1, s2 in zip(it, it):
            if s1 > s2:
                s1, s2 = s2, s1
            if s1 != s2 and (s1, s2) not in edges:
                edges.add((s1, s2))
            else:
                leftover.extend((s1, s2))
        if leftover and not _has_suitable_pair(edges, leftover):
            return None
        stubs = leftover
    return edges


def _has_suitable_pair(edges, stubs):
    distinct = sorted(set(stubs))
    for i, s1 in enumerate(distinct):
        for s2 in distinct[i + 1:]:
            if (s1, s2) not in edges:
                return True
    return False


def _csr_from_edge_set(n, edges):
    degrees = np.zeros(n, dtype=np.int64)
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
        degrees[u] += 1
        degrees[v] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for v in range(n):
        indices[indptr[v]:indptr[v + 1]] = sorted(adj[v])
    return {"indptr": indptr, "indices": indices, "degrees": degrees}


# -- edge-list serialization: header "n m", one "u v" line per edge, 0-indexed --

def write_edge_list(g: Graph, path) -> None:
    with open(path, "w") as f:
        f.write(f"{g.n} {g.num_edges}\n")
        for u, v in g.edges():
            f.write(f"{u} {v}\n")


def parse_edge_list(text: str) -> Graph:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty edge-list input")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"bad header {lines[0]!r}, expected 'n m'")
    n, m = int(header[0]), int(header[1])
    if len(lines) - 1 != m:
        raise ValueError(f"header says m={m} edges but found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph.from_edges(n, edges)


def read_edge_list(path) -> Graph:
    with open(path) as f:
        return parse_edge_list(f.read())
