"""Drift functions of the count process, their roots, and the phase thresholds.

Three families are covered: the complete-graph drift (finite n and its limit),
the cubic bound-chain drift parameterized by the expansion constants
(Sigma_L, Delta_L), and the 2k-sample generalization.  Roots are located by
bracketed bisection; brackets come from the analytic factorizations, which is
robust near the degenerate boundary where the off-center roots merge into 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .spectral import SpectralSummary

__all__ = [
    "DriftProfile",
    "GeneralThresholds",
    "f_complete",
    "f_complete_limit",
    "roots_complete",
    "complete_threshold",
    "F_general",
    "roots_general",
    "thresholds_general",
    "f_2k",
    "alpha_2k",
    "roots_2k",
]

_BISECT_TOL = 1e-12
_DEGENERATE_TOL = 1e-9


@dataclass(frozen=True)
class DriftProfile:
    """Roots of a drift function in [0,1] with stability flags.

    kind is one of "complete", "choices_2k", "limit_general"; params echoes the
    defining parameters.  stability[i] is "attracting" if the drift derivative
    at roots[i] is negative, else "repelling".  contraction is c(n, alpha),
    c(2k, alpha) or c(alpha, L) as appropriate for the kind (positive exactly
    in the fast-mixing regime).  degenerate marks parameters at the
    three-roots/one-root boundary, where the profile collapses to the
    repeated root 1/2.
    """

    kind: str
    params: dict = field(compare=False)
    roots: tuple
    stability: tuple
    contraction: float
    degenerate: bool = False


@dataclass(frozen=True)
class GeneralThresholds:
    """Regime classification for the bound-chain drift of a given graph family.

    alpha_meta_threshold is None when K_L >= 1 (no metastability guarantee is
    available for such heterogeneous graphs).  r_lower is filled only in the
    metastable regime, epsilon_L only in the fast regime.
    """

    K_L: float
    alpha_meta_threshold: float | None
    c_alpha_L: float
    epsilon_L: float | None
    r_lower: float | None
    regime: str  # "metastable" | "fast" | "indeterminate"


def _bisect(f, lo, hi, tol=_BISECT_TOL):
    # f(lo) > 0 > f(hi) or f(lo) < 0 < f(hi); plain bisection to abs tol.
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _stability(f, root, h=1e-7):
    slope = (f(min(root + h, 1.0)) - f(max(root - h, 0.0))) / (
        min(root + h, 1.0) - max(root - h, 0.0)
    )
    return "attracting" if slope < 0 else "repelling"


# -- complete graphs -------------------------------------------------------------


def _b_n(n):
    return (n / (n - 1)) ** 2 if n is not None else 1.0


def f_complete(y: float, n: int, alpha: float) -> float:
    """Count drift per node on K_n at fraction y: (1-2y) alpha/2 - (1-alpha) b_n y(1-y)(1-2y)."""
    b = _b_n(n)
    return (1.0 - 2.0 * y) * (alpha / 2.0) - (1.0 - alpha) * b * y * (1.0 - y) * (1.0 - 2.0 * y)


def f_complete_limit(y: float, alpha: float) -> float:
    """n -> infinity limit of the complete-graph drift."""
    return f_complete(y, None, alpha)


def complete_threshold(n: int | None) -> float:
    """Failure probability above which the complete-graph drift has 1/2 as its only root."""
    if n is None:
        return 1.0 / 3.0
    return 1.0 / (1.0 + 2.0 * (1.0 - 1.0 / n) ** 2)


def roots_complete(n: int | None, alpha: float) -> DriftProfile:
    """Roots of the complete-graph drift; n=None gives the large-n limit.

    Below the threshold the roots are {r, 1/2, 1-r} with r found by bisection
    on [0, y*], where y* just inside (r, 1/2) comes from scanning toward 1/2
    (the drift is strictly negative on the whole interval (r, 1/2)).
    """
    if n is not None and n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"need alpha in (0,1), got {alpha}")
    b = _b_n(n)
    c = (3.0 * alpha - 1.0) / 2.0 - (1.0 - alpha) * (b - 1.0) / 2.0
    params = {"n": n, "alpha": alpha}
    thr = complete_threshold(n)
    f = lambda y: f_complete(y, n, alpha)
    if abs(alpha - thr) <= _DEGENERATE_TOL:
        return DriftProfile("complete", params, (0.5,), ("attracting",), c, degenerate=True)
    if alpha > thr:
        return DriftProfile("complete", params, (0.5,), (_stability(f, 0.5),), c)
    lo, hi = _bracket_inner_negative(f)
    r = _bisect(f, lo, hi)
    roots = (r, 0.5, 1.0 - r)
    stability = tuple(_stability(f, x) for x in roots)
    return DriftProfile("complete", params, roots, stability, c)


def _bracket_inner_negative(f):
    # Find y in (r, 1/2) with f(y) < 0 by scanning toward 1/2; f(0) > 0 anchors the left end.
    for j in range(1, 80):
        y = 0.5 - 4.0**-j
        if y <= 0:
            break
        if f(y) < 0:
            return 0.0, y
    raise ValueError("no negative drift found left of 1/2; parameters at or above threshold")


# -- general graphs (bound-chain cubic) ------------------------------------------


def F_general(y: float, alpha: float, Sigma_L: float, Delta_L: float) -> float:
    """Cubic upper bound on the scaled bound-chain drift:
    (1-2y)(y^2 - y + alpha/(Sigma_L(1-alpha))) + Delta_L/(4 Sigma_L)."""
    if Sigma_L <= 0:
        raise ValueError(f"need Sigma_L > 0, got {Sigma_L}")
    if not 0.0 <= Delta_L < Sigma_L:
        raise ValueError(f"need 0 <= Delta_L < Sigma_L, got Delta_L={Delta_L}")
    beta = alpha / (Sigma_L * (1.0 - alpha))
    return (1.0 - 2.0 * y) * (y * y - y + beta) + Delta_L / (4.0 * Sigma_L)


def meta_threshold(Sigma_L: float, K_L: float) -> float:
    """alpha below which the cubic dips negative on (0, 1/2): Sigma(1-K^(1/3))/(4+Sigma(1-K^(1/3)))."""
    s = Sigma_L * (1.0 - K_L ** (1.0 / 3.0))
    return s / (4.0 + s)


def roots_general(alpha: float, Sigma_L: float, Delta_L: float) -> DriftProfile:
    """The two roots of the cubic in (0, 1/2], bracketed around its local minimum.

    The local minimum sits at y_min = 1/2 - sqrt(1 - 4 alpha/(Sigma_L(1-alpha)))/(2 sqrt 3);
    the cubic is positive at 0 and at 1/2 (strictly, when Delta_L > 0) and
    negative at y_min whenever alpha is below the metastability threshold.
    """
    K_L = 27.0 * Delta_L**2 / (4.0 * Sigma_L**2)
    if K_L >= 1.0:
        raise ValueError(f"K_L = {K_L:.4g} >= 1: no negative-drift window exists")
    thr = meta_threshold(Sigma_L, K_L)
    if alpha >= thr:
        raise ValueError(f"alpha = {alpha} >= threshold {thr:.6g}: cubic has no roots in (0, 1/2)")
    disc = 1.0 - 4.0 * alpha / (Sigma_L * (1.0 - alpha))
    y_min = 0.5 - math.sqrt(disc) / (2.0 * math.sqrt(3.0))
    f = lambda y: F_general(y, alpha, Sigma_L, Delta_L)
    r1 = _bisect(f, 0.0, y_min)
    r2 = _bisect(f, y_min, 0.5)
    c = alpha * (4.0 + Sigma_L) - Sigma_L
    params = {"alpha": alpha, "Sigma_L": Sigma_L, "Delta_L": Delta_L}
    roots = (r1, r2)
    return DriftProfile("limit_general", params, roots, tuple(_stability(f, x) for x in roots), c)


def thresholds_general(summary: SpectralSummary, alpha: float) -> GeneralThresholds:
    """Regime classification of a graph family at failure probability alpha.

    metastable: K_L < 1 and alpha below the metastability threshold (returns
    the larger root r_lower of the cubic in (0, 1/2)); fast: c(alpha, L) > 0
    (returns the half-width epsilon_L of the attracting band around n/2);
    indeterminate otherwise.  Rejects bipartite/degenerate inputs (L_min = 0).
    """
    if summary.L_min <= 0.0:
        raise ValueError("L_min <= 0 (bipartite or degenerate graph): thresholds undefined")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"need alpha in (0,1), got {alpha}")
    Sigma_L, Delta_L, K_L = summary.Sigma_L, summary.Delta_L, summary.K_L
    alpha_meta = meta_threshold(Sigma_L, K_L) if K_L < 1.0 else None
    c = alpha * (4.0 + Sigma_L) - Sigma_L
    if alpha_meta is not None and alpha < alpha_meta:
        r_lower = roots_general(alpha, Sigma_L, Delta_L).roots[1]
        return GeneralThresholds(K_L, alpha_meta, c, None, r_lower, "metastable")
    if c > 0.0:
        epsilon_L = (1.0 - alpha) * Delta_L / c
        return GeneralThresholds(K_L, alpha_meta, c, epsilon_L, None, "fast")
    return GeneralThresholds(K_L, alpha_meta, c, None, None, "indeterminate")


# -- 2k-choices ------------------------------------------------------------------

_MAX_K = 30


def _binomials(k):
    if not 1 <= k <= _MAX_K:
        raise ValueError(f"need 1 <= k <= {_MAX_K}, got {k}")
    return [math.comb(2 * k, r) for r in range(2 * k + 1)]


def f_2k(y: float, k: int, alpha: float) -> float:
    """Limit drift of the 2k-sample rule, by direct binomial summation."""
    comb = _binomials(k)
    s = 0.0
    for r in range(k + 1, 2 * k + 1):
        s += comb[r] * (y**r * (1.0 - y) ** (2 * k - r + 1) - (1.0 - y) ** r * y ** (2 * k - r + 1))
    return (alpha / 2.0) * (1.0 - 2.0 * y) + (1.0 - alpha) * s


def alpha_2k(k: int) -> float:
    """Phase-transition threshold for the 2k-sample rule: 1 - 4^k / ((2k+1) C(2k,k)).

    Exact rational arithmetic, so alpha_2k(1) == 1/3 to the last bit.
    """
    _binomials(k)
    return float(1 - Fraction(4**k, (2 * k + 1) * math.comb(2 * k, k)))


def roots_2k(k: int, alpha: float) -> DriftProfile:
    """Roots of the 2k-sample limit drift.

    Below alpha_2k the roots are {r-, 1/2, 1-r-}; r- is bisected on [0, y-]
    where y- is the smaller stationary point of the drift, obtained from the
    closed-form derivative -1 + (1-alpha)(2k+1) C(2k,k) (y(1-y))^k.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"need alpha in (0,1), got {alpha}")
    thr = alpha_2k(k)
    # c(2k, alpha) = -f'(1/2); positive iff alpha above the threshold
    c = 1.0 - (1.0 - alpha) * (2 * k + 1) * math.comb(2 * k, k) * 0.25**k
    params = {"k": k, "alpha": alpha}
    f = lambda y: f_2k(y, k, alpha)
    if abs(alpha - thr) <= _DEGENERATE_TOL:
        return DriftProfile("choices_2k", params, (0.5,), ("attracting",), c, degenerate=True)
    if alpha > thr:
        return DriftProfile("choices_2k", params, (0.5,), (_stability(f, 0.5),), c)
    m = (1.0 / ((1.0 - alpha) * (2 * k + 1) * math.comb(2 * k, k))) ** (1.0 / k)
    y_minus = 2.0 * m / (1.0 + math.sqrt(1.0 - 4.0 * m))  # smaller root of y(1-y) = m
    r = _bisect(f, 0.0, y_minus)
    roots = (r, 0.5, 1.0 - r)
    return DriftProfile("choices_2k", params, roots, tuple(_stability(f, x) for x in roots), c)
