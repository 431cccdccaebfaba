"""Exact analysis of continuous-time birth-death chains on {0,...,n}.

Stationary laws come from detailed balance in log-space (the rate-ratio
products overflow doubles for n of a few hundred in the metastable regime),
transient laws from uniformization with certified Poisson-tail truncation,
hitting times from banded first-step solves, and boundary-exit probabilities
from the scale-function martingale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import gammaln
from scipy.stats import poisson

__all__ = [
    "BirthDeathSpec",
    "DistributionVector",
    "ReducibleChainError",
    "CapExceededError",
    "DivergenceError",
    "complete_rates",
    "rates_2k",
    "sandwich_rates",
    "stationary",
    "transient",
    "tv_distance",
    "worst_case_tv",
    "mixing_time",
    "expected_hitting_time",
    "hitting_time_cdf",
    "exit_probability",
]

_TAIL = 1e-13  # Poisson truncation per transient evaluation, inside the 1e-12 mass contract


class ReducibleChainError(ValueError):
    """An interior transition rate is zero where irreducibility is required."""


class CapExceededError(RuntimeError):
    """Mixing-time search exceeded the time cap (expected deep in the metastable regime)."""

    def __init__(self, t_cap: float, d_at_cap: float):
        super().__init__(f"d(t) = {d_at_cap:.4g} > epsilon at t_cap = {t_cap:.4g}")
        self.t_cap = t_cap
        self.d_at_cap = d_at_cap


class DivergenceError(ValueError):
    """Requested expectation is infinite (target unreachable from the start state)."""


@dataclass(frozen=True, eq=False)
class BirthDeathSpec:
    """Tabulated birth/death rates q_plus[0..n], q_minus[0..n] (events per unit time)."""

    n: int
    q_plus: np.ndarray
    q_minus: np.ndarray

    def __post_init__(self):
        qp = np.asarray(self.q_plus, dtype=float)
        qm = np.asarray(self.q_minus, dtype=float)
        object.__setattr__(self, "q_plus", qp)
        object.__setattr__(self, "q_minus", qm)
        if qp.shape != (self.n + 1,) or qm.shape != (self.n + 1,):
            raise ValueError(f"rate arrays must have length n+1 = {self.n + 1}")
        if (qp < 0).any() or (qm < 0).any():
            raise ValueError("rates must be nonnegative")
        if qp[self.n] != 0.0 or qm[0] != 0.0:
            raise ValueError("boundary rates q_plus[n] and q_minus[0] must be zero")

    def is_irreducible(self) -> bool:
        return bool((self.q_plus[:-1] > 0).all() and (self.q_minus[1:] > 0).all())


@dataclass(frozen=True, eq=False)
class DistributionVector:
    """Probability vector over {0,...,n}; sums to 1 within 1e-12."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if (p < 0).any():
            raise ValueError("negative probability entry")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")

    @property
    def n(self) -> int:
        return self.probs.shape[0] - 1

    def mean(self) -> float:
        return float(self.probs @ np.arange(self.probs.shape[0]))


# -- rate constructors -----------------------------------------------------------


def complete_rates(n: int, alpha: float) -> BirthDeathSpec:
    """Count-chain rates on K_n:
    q_plus(a) = (n-a)[alpha/2 + (1-alpha)(a/(n-1))^2],
    q_minus(a) = a[alpha/2 + (1-alpha)((n-a)/(n-1))^2]."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"need alpha in [0,1], got {alpha}")
    a = np.arange(n + 1, dtype=float)
    qp = (n - a) * (alpha / 2.0 + (1.0 - alpha) * (a / (n - 1)) ** 2)
    qm = a * (alpha / 2.0 + (1.0 - alpha) * ((n - a) / (n - 1)) ** 2)
    return BirthDeathSpec(n=n, q_plus=qp, q_minus=qm)


def rates_2k(n: int, alpha: float, k: int) -> BirthDeathSpec:
    """Count-chain rates on K_n under the 2k-sample rule (finite-n form)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    a = np.arange(n + 1, dtype=float)
    up = np.zeros(n + 1)
    dn = np.zeros(n + 1)
    for r in range(k + 1, 2 * k + 1):
        c = math.comb(2 * k, r)
        up += c * (a / (n - 1)) ** r * (np.maximum(n - a - 1, 0) / (n - 1)) ** (2 * k - r)
        dn += c * ((n - a) / (n - 1)) ** r * (np.maximum(a - 1, 0) / (n - 1)) ** (2 * k - r)
    qp = (n - a) * (alpha / 2.0 + (1.0 - alpha) * up)
    qm = a * (alpha / 2.0 + (1.0 - alpha) * dn)
    return BirthDeathSpec(n=n, q_plus=qp, q_minus=qm)


def sandwich_rates(
    n: int, alpha: float, L_min: float, L_max: float, side: str
) -> BirthDeathSpec:
    """Count-only rate bounds enclosing the true transition rates on any graph.

    side="upper" returns the dominating pair (qbar_plus, qunder_minus); the
    chain they define stays above the true count.  side="lower" returns
    (qunder_plus, qbar_minus), whose chain stays below.
    """
    if L_min <= 0:
        raise ValueError(f"degenerate bounds: need L_min > 0, got {L_min}")
    if L_max < L_min:
        raise ValueError(f"need L_min <= L_max, got {L_min} > {L_max}")
    a = np.arange(n + 1, dtype=float)
    up = a**2 * (n - a) / n**2
    dn = a * (n - a) ** 2 / n**2
    if side == "upper":
        qp = alpha / 2.0 * (n - a) + (1.0 - alpha) * L_max * up
        qm = alpha / 2.0 * a + (1.0 - alpha) * L_min * dn
    elif side == "lower":
        qp = alpha / 2.0 * (n - a) + (1.0 - alpha) * L_min * up
        qm = alpha / 2.0 * a + (1.0 - alpha) * L_max * dn
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    return BirthDeathSpec(n=n, q_plus=qp, q_minus=qm)


# -- stationary and transient laws -----------------------------------------------


def stationary(spec: BirthDeathSpec) -> DistributionVector:
    """Detailed-balance stationary law pi[a+1]/pi[a] = q_plus[a]/q_minus[a+1], in log-space."""
    if not spec.is_irreducible():
        raise ReducibleChainError("zero interior rate: chain is reducible")
    log_pi = np.zeros(spec.n + 1)
    log_pi[1:] = np.cumsum(np.log(spec.q_plus[:-1]) - np.log(spec.q_minus[1:]))
    log_pi -= log_pi.max()
    pi = np.exp(log_pi)
    return DistributionVector(pi / pi.sum())


def _uniformized(spec: BirthDeathSpec):
    lam = float((spec.q_plus + spec.q_minus).max())
    if lam == 0.0:
        return 0.0, None, None, None
    pu = spec.q_plus / lam
    pl = spec.q_minus / lam
    pd = 1.0 - pu - pl
    return lam, pu, pl, pd


def _poisson_window(m: float, tail: float = _TAIL):
    """[k_lo, k_hi] window holding all but `tail` of a Poisson(m), with its weights.

    The quantile bounds certify the truncation; the log-space weights carry
    ~1e-11 relative roundoff at large m, so they are normalized over the
    window (conditioning there costs at most `tail` in total variation).
    """
    if m <= 0.0:
        return 0, 0, np.array([1.0])
    k_lo = int(poisson.ppf(tail / 2, m))
    k_hi = int(poisson.isf(tail / 2, m)) + 1
    k_lo = max(k_lo - 1, 0)
    ks = np.arange(k_lo, k_hi + 1)
    w = np.exp(ks * np.log(m) - m - gammaln(ks + 1))
    total = w.sum()
    assert total > 0.999999
    return k_lo, k_hi, w / total


def _step_vec(v, pu, pl, pd):
    out = v * pd
    out[1:] += v[:-1] * pu[:-1]
    out[:-1] += v[1:] * pl[1:]
    return out


def _step_rows(m, pu, pl, pd):
    out = m * pd
    out[:, 1:] += m[:, :-1] * pu[:-1]
    out[:, :-1] += m[:, 1:] * pl[1:]
    return out


def transient(spec: BirthDeathSpec, a0: int, t: float) -> DistributionVector:
    """Law of the chain at time t started from a0, by uniformization.

    The uniform rate is max_a(q_plus + q_minus); the Poisson mixture is
    truncated to a window carrying all but 1e-13 of its mass, so the result
    conserves probability to well within 1e-12.
    """
    if not 0 <= a0 <= spec.n:
        raise ValueError(f"a0 must be in [0, {spec.n}], got {a0}")
    if t < 0:
        raise ValueError(f"need t >= 0, got {t}")
    lam, pu, pl, pd = _uniformized(spec)
    v = np.zeros(spec.n + 1)
    v[a0] = 1.0
    if t == 0.0 or lam == 0.0:
        return DistributionVector(v)
    k_lo, k_hi, w = _poisson_window(lam * t)
    acc = w[0] * v if k_lo == 0 else np.zeros_like(v)
    for k in range(1, k_hi + 1):
        v = _step_vec(v, pu, pl, pd)
        if k >= k_lo:
            acc = acc + w[k - k_lo] * v
    # conditioning on the truncation window costs at most the 1e-13 tail in TV
    return DistributionVector(acc / acc.sum())


def _transient_all(spec: BirthDeathSpec, t: float) -> np.ndarray:
    # Row a0 is the time-t law started from a0 (all starts propagated at once).
    lam, pu, pl, pd = _uniformized(spec)
    m = np.eye(spec.n + 1)
    if t == 0.0 or lam == 0.0:
        return m
    k_lo, k_hi, w = _poisson_window(lam * t)
    acc = w[0] * m if k_lo == 0 else np.zeros_like(m)
    for k in range(1, k_hi + 1):
        m = _step_rows(m, pu, pl, pd)
        if k >= k_lo:
            acc += w[k - k_lo] * m
    return acc / acc.sum(axis=1, keepdims=True)


# -- distances and mixing --------------------------------------------------------


def tv_distance(p: DistributionVector, q: DistributionVector) -> float:
    """Total variation distance (1/2) sum |p - q|."""
    if p.probs.shape != q.probs.shape:
        raise ValueError("length mismatch between distributions")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def worst_case_tv(spec: BirthDeathSpec, t: float, pi: np.ndarray | None = None) -> float:
    """d(t): max over all start states of the TV distance to stationarity at time t."""
    if pi is None:
        pi = stationary(spec).probs
    rows = _transient_all(spec, t)
    return 0.5 * float(np.abs(rows - pi).sum(axis=1).max())


def mixing_time(
    spec: BirthDeathSpec,
    epsilon: float = 0.25,
    rel_tol: float = 1e-3,
    t_cap: float = 1e12,
) -> float:
    """Smallest t with d(t) <= epsilon, to relative precision rel_tol.

    d(t) is non-increasing, so the search brackets by doubling and then
    bisects.  Raises CapExceededError when d(t_cap) is still above epsilon,
    which is the expected outcome deep in the metastable regime; callers can
    raise the cap.
    """
    if not spec.is_irreducible():
        raise ReducibleChainError("zero interior rate: chain is reducible")
    if epsilon <= 0:
        raise ValueError(f"need epsilon > 0, got {epsilon}")
    pi = stationary(spec).probs
    if 1.0 - pi.min() <= epsilon:
        return 0.0
    t_lo, t_hi = 0.0, 1.0
    while True:
        d = worst_case_tv(spec, t_hi, pi)
        if d <= epsilon:
            break
        t_lo = t_hi
        t_hi *= 2.0
        if t_hi > t_cap:
            raise CapExceededError(t_cap, d)
    while t_hi - t_lo > rel_tol * t_hi:
        mid = 0.5 * (t_lo + t_hi)
        if worst_case_tv(spec, mid, pi) <= epsilon:
            t_hi = mid
        else:
            t_lo = mid
    return t_hi


# -- hitting times and exit probabilities ----------------------------------------


def _segment(spec: BirthDeathSpec, a0: int, targets: frozenset):
    lo = a0
    while lo > 0 and (lo - 1) not in targets:
        lo -= 1
    hi = a0
    while hi < spec.n and (hi + 1) not in targets:
        hi += 1
    return lo, hi


def expected_hitting_time(spec: BirthDeathSpec, a0: int, targets) -> float:
    """Expected time to reach any target state from a0, by a banded first-step solve."""
    targets = frozenset(int(s) for s in targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    if not all(0 <= s <= spec.n for s in targets):
        raise ValueError(f"targets must lie in [0, {spec.n}]")
    if not 0 <= a0 <= spec.n:
        raise ValueError(f"a0 must be in [0, {spec.n}], got {a0}")
    if a0 in targets:
        return 0.0
    lo, hi = _segment(spec, a0, targets)
    # targets are reachable only through the segment ends
    if lo == 0 and hi == spec.n:
        raise DivergenceError("no target adjacent to the start state's segment")
    size = hi - lo + 1
    qp = spec.q_plus[lo : hi + 1].copy()
    qm = spec.q_minus[lo : hi + 1].copy()
    # exits across segment ends that are walls (0 or n) cannot happen; rates there are 0 already
    ab = np.zeros((3, size))
    ab[0, 1:] = -qp[:-1]  # superdiagonal: rate up from s to s+1
    ab[1, :] = qp + qm
    ab[2, :-1] = -qm[1:]  # subdiagonal: rate down from s to s-1
    rhs = np.ones(size)
    try:
        h = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise DivergenceError(f"singular first-step system: {exc}") from exc
    if not np.all(np.isfinite(h)) or (h < -1e-9).any():
        raise DivergenceError("first-step solve diverged: target unreachable in expectation")
    # residual guards near-singular systems (interior trap regions)
    resid = ab[1] * h - rhs
    resid[:-1] += ab[0, 1:] * h[1:]
    resid[1:] += ab[2, :-1] * h[:-1]
    if np.abs(resid).max() > 1e-6 * max(1.0, np.abs(h).max()):
        raise DivergenceError("ill-conditioned first-step system: target effectively unreachable")
    return float(h[a0 - lo])


def hitting_time_cdf(spec: BirthDeathSpec, a0: int, targets, t: float) -> float:
    """P(T_targets <= t) from a0, via the transient law of the chain with targets made absorbing."""
    targets = sorted(int(s) for s in targets)
    if not targets:
        raise ValueError("targets must be nonempty")
    if targets[0] < 0 or targets[-1] > spec.n:
        raise ValueError(f"targets must lie in [0, {spec.n}]")
    qp = spec.q_plus.copy()
    qm = spec.q_minus.copy()
    for s in targets:
        qp[s] = 0.0
        qm[s] = 0.0
    absorbed = BirthDeathSpec(n=spec.n, q_plus=qp, q_minus=qm)
    law = transient(absorbed, a0, t)
    return float(law.probs[targets].sum())


def exit_probability(spec: BirthDeathSpec, a0: int, low: int, high: int) -> float:
    """P(hit high before low | start a0), from the scale-function martingale.

    phi(k) = sum_{t=low+1}^{k} prod_{j=low+1}^{t-1} q_minus(j)/q_plus(j) is
    harmonic for the stopped chain, so the answer is phi(a0)/phi(high).  All
    products run in log-space; in the metastable regime they overflow doubles
    already for n of a few hundred.
    """
    if low >= high:
        raise ValueError(f"need low < high, got [{low}, {high}]")
    if not low <= a0 <= high:
        raise ValueError(f"need low <= a0 <= high, got a0={a0}")
    if not (0 <= low and high <= spec.n):
        raise ValueError(f"interval [{low}, {high}] outside state space")
    if a0 == low:
        return 0.0
    if a0 == high:
        return 1.0
    interior = np.arange(low + 1, high)
    if (spec.q_plus[interior] <= 0).any() or (spec.q_minus[interior] <= 0).any():
        raise ReducibleChainError("interior rates must be positive on (low, high)")
    log_ratio = np.log(spec.q_minus[interior]) - np.log(spec.q_plus[interior])
    # log rho_t for t = low+1 .. high; rho_{low+1} = empty product = 1
    log_rho = np.concatenate([[0.0], np.cumsum(log_ratio)])
    log_phi = np.logaddexp.accumulate(log_rho)
    return float(np.exp(log_phi[a0 - low - 1] - log_phi[high - low - 1]))
