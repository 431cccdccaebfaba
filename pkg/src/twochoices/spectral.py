"""Spectrum of the degree-scaled adjacency operator and derived expansion constants.

The walk operator D^-1 M is similar to the symmetric D^-1/2 M D^-1/2, so its
spectrum is real and is computed here on the symmetrized matrix.  The summary
carries the second-largest absolute eigenvalue together with the degree-ratio
constants that bound the count-level transition rates on general graphs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph

__all__ = [
    "SpectralSummary",
    "EigensolverError",
    "spectral_summary",
    "summary_from_lambda",
    "verify_expander_mixing",
    "verify_sandwich",
    "all_bipartitions",
]

DENSE_EIG_LIMIT = 2000
_LAMBDA1_TOL = 1e-8
_BIPARTITE_TOL = 1e-9


class EigensolverError(RuntimeError):
    """Eigenvalue computation failed to converge; message carries the residual."""


@dataclass(frozen=True)
class SpectralSummary:
    """Top eigenvalue, second-largest absolute eigenvalue, and derived constants.

    L_max = (1+lam)^2 (d_max/d_min)^3 and L_min = (1-lam)^2 (d_min/d_max)^3;
    Sigma_L and Delta_L are their sum and difference, K_L = 27 Delta_L^2 / (4 Sigma_L^2).
    Bipartite graphs have lam = 1, hence L_min = 0, and are flagged.
    """

    lambda1: float
    lam: float
    d_min: int
    d_max: int
    L_min: float
    L_max: float
    Sigma_L: float
    Delta_L: float
    K_L: float
    bipartite: bool

    def to_json_dict(self) -> dict:
        # 15 significant digits per the report format
        def f15(x):
            return float(f"{x:.15g}")

        return {
            "lambda1": f15(self.lambda1),
            "lambda": f15(self.lam),
            "d_min": self.d_min,
            "d_max": self.d_max,
            "L_min": f15(self.L_min),
            "L_max": f15(self.L_max),
            "Sigma_L": f15(self.Sigma_L),
            "Delta_L": f15(self.Delta_L),
            "K_L": f15(self.K_L),
        }


def summary_from_lambda(
    lam: float, d_min: int, d_max: int, lambda1: float = 1.0
) -> SpectralSummary:
    """Build a summary from a known eigenvalue (e.g. 2 sqrt(d-1)/d for random d-regular)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"need 0 <= lam <= 1, got {lam}")
    ratio = d_max / d_min
    L_max = (1.0 + lam) ** 2 * ratio**3
    L_min = (1.0 - lam) ** 2 / ratio**3
    Sigma_L = L_max + L_min
    Delta_L = L_max - L_min
    K_L = 27.0 * Delta_L**2 / (4.0 * Sigma_L**2)
    return SpectralSummary(
        lambda1=float(lambda1),
        lam=float(lam),
        d_min=int(d_min),
        d_max=int(d_max),
        L_min=L_min,
        L_max=L_max,
        Sigma_L=Sigma_L,
        Delta_L=Delta_L,
        K_L=K_L,
        bipartite=bool(lam >= 1.0 - _BIPARTITE_TOL),
    )


def _symmetrized_dense(g: Graph) -> np.ndarray:
    inv_sqrt_d = 1.0 / np.sqrt(g.degrees.astype(float))
    s = np.zeros((g.n, g.n))
    for v in range(g.n):
        nbrs = g.neighbors(v)
        s[v, nbrs] = inv_sqrt_d[v] * inv_sqrt_d[nbrs]
    return s


def spectral_summary(g: Graph, tol: float = 1e-8) -> SpectralSummary:
    """Eigenvalues of D^-1/2 M D^-1/2 (same spectrum as D^-1 M) plus derived constants.

    Dense solve for n <= 2000; iterative extreme-eigenvalue solve above that,
    where only the top of the spectrum and its largest-magnitude competitor
    are needed.
    """
    if g.n <= DENSE_EIG_LIMIT:
        w = np.linalg.eigvalsh(_symmetrized_dense(g))
        lambda1 = float(w[-1])
        lam = float(max(abs(w[0]), abs(w[-2])))
    else:
        lambda1, lam = _iterative_extremes(g, tol)
    if abs(lambda1 - 1.0) > _LAMBDA1_TOL:
        raise EigensolverError(
            f"top eigenvalue residual |lambda1 - 1| = {abs(lambda1 - 1.0):.3e} exceeds {_LAMBDA1_TOL}"
        )
    lam = min(lam, 1.0)
    return summary_from_lambda(
        lam, int(g.degrees.min()), int(g.degrees.max()), lambda1=lambda1
    )


def _iterative_extremes(g: Graph, tol: float):
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    inv_sqrt_d = 1.0 / np.sqrt(g.degrees.astype(float))
    rows = np.repeat(np.arange(g.n), g.degrees)
    data = inv_sqrt_d[rows] * inv_sqrt_d[g.indices]
    s = sp.csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))
    try:
        top = spla.eigsh(s, k=2, which="LA", tol=tol, return_eigenvectors=False)
        bot = spla.eigsh(s, k=1, which="SA", tol=tol, return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:  # pragma: no cover - rare
        raise EigensolverError(f"ARPACK did not converge: {exc}") from exc
    top = np.sort(top)
    return float(top[-1]), float(max(abs(top[0]), abs(bot[0])))


# -- bipartition checks ---------------------------------------------------------


def _check_partition(g: Graph, partition) -> np.ndarray:
    s_nodes, t_nodes = partition
    s = np.zeros(g.n, dtype=bool)
    t = np.zeros(g.n, dtype=bool)
    s[list(map(int, s_nodes))] = True
    t[list(map(int, t_nodes))] = True
    if not s.any() or not t.any():
        raise ValueError("both sides of the partition must be nonempty")
    if (s & t).any() or not (s | t).all():
        raise ValueError("partition sides must be disjoint and cover all vertices")
    return s


def all_bipartitions(n: int):
    """All unordered bipartitions (S, T) of {0..n-1} with both sides nonempty.

    Yields index tuples with 0 always in S, so each split appears once.
    """
    rest = n - 1
    for mask in range(2**rest):
        s = [0] + [v + 1 for v in range(rest) if mask >> v & 1]
        t = [v + 1 for v in range(rest) if not mask >> v & 1]
        if t:
            yield s, t


def _neighbors_in_s(g: Graph, s: np.ndarray) -> np.ndarray:
    # d_v^S for every v at once; segments are nonempty since degrees >= 1
    return np.add.reduceat(s[g.indices].astype(np.int64), g.indptr[:-1])


def verify_expander_mixing(g: Graph, partitions) -> dict:
    """Check |E(S,T) - vol(S)vol(T)/vol(V)| <= lam * vol(S)vol(T)/vol(V) per partition.

    Returns {"violations": int, "reports": [...]}, where each report carries
    the crossing-edge count, the expected value, the deviation and the bound.
    """
    lam = spectral_summary(g).lam
    vol_total = float(g.degrees.sum())
    reports = []
    violations = 0
    for partition in partitions:
        s = _check_partition(g, partition)
        vol_s = float(g.degrees[s].sum())
        vol_t = vol_total - vol_s
        d_in_s = _neighbors_in_s(g, s)
        crossing = int((g.degrees[s] - d_in_s[s]).sum())
        expected = vol_s * vol_t / vol_total
        deviation = abs(crossing - expected)
        bound = lam * expected
        ok = deviation <= bound + 1e-9 * max(1.0, bound)
        if not ok:
            violations += 1
        reports.append(
            {
                "size_S": int(s.sum()),
                "crossing_edges": crossing,
                "expected": expected,
                "deviation": deviation,
                "bound": bound,
                "slack": bound - deviation,
                "ok": ok,
            }
        )
    return {"violations": violations, "reports": reports}


def verify_sandwich(g: Graph, partitions) -> dict:
    """Check L_min |S|^2 |T| / n^2 <= sum_{v in T} (d_v^S / d_v)^2 <= L_max |S|^2 |T| / n^2.

    The bounds are tight (equalities) on complete graphs, so a small relative
    slack absorbs roundoff.
    """
    summary = spectral_summary(g)
    n2 = float(g.n) ** 2
    reports = []
    violations = 0
    for partition in partitions:
        s = _check_partition(g, partition)
        d_in_s = _neighbors_in_s(g, s)
        middle = float((((d_in_s / g.degrees) ** 2)[~s]).sum())
        size_s = float(s.sum())
        size_t = float(g.n - size_s)
        lower = summary.L_min * size_s**2 * size_t / n2
        upper = summary.L_max * size_s**2 * size_t / n2
        tol = 1e-9 * max(1.0, upper)
        ok = (lower - tol) <= middle <= (upper + tol)
        if not ok:
            violations += 1
        reports.append(
            {
                "size_S": int(size_s),
                "middle": middle,
                "lower": lower,
                "upper": upper,
                "ok": ok,
            }
        )
    return {"violations": violations, "reports": reports}
