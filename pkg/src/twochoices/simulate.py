"""Event-driven simulation of the failure-prone 2-choices dynamics on arbitrary graphs.

Updates arrive on a global exponential clock of rate n with a uniformly chosen
node per event, which is distributionally identical to n per-node unit-rate
clocks but needs no scheduler.  The inner loops are JIT kernels; replicate
streams derive from (seed, replicate_index) through SeedSequence, so batches
are reproducible independent of execution order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graphs import Graph

__all__ = [
    "OpinionState",
    "SimConfig",
    "RunRecord",
    "BatchSummary",
    "CoupledRecord",
    "StepEvent",
    "SandwichViolationError",
    "half_levels",
    "step",
    "run",
    "run_batch",
    "run_coupled",
]

TRAJECTORY_CAP = 1_000_000


class SandwichViolationError(RuntimeError):
    """Observed per-state rates escaped the count-level bounds supplied to the coupling."""


def half_levels(n: int) -> frozenset:
    """The stop set {ceil(n/2), floor(n/2)} used by the majority-loss time."""
    return frozenset({math.ceil(n / 2), math.floor(n / 2)})


@dataclass
class OpinionState:
    """Binary opinion vector with a cached count of opinion-1 holders."""

    opinions: np.ndarray
    count_ones: int

    @classmethod
    def from_vector(cls, vec) -> "OpinionState":
        v = np.asarray(vec, dtype=np.uint8)
        if not np.isin(v, (0, 1)).all():
            raise ValueError("opinions must be 0/1")
        return cls(opinions=v, count_ones=int(v.sum()))

    @classmethod
    def zeros(cls, n: int) -> "OpinionState":
        return cls(opinions=np.zeros(n, dtype=np.uint8), count_ones=0)

    @classmethod
    def ones(cls, n: int) -> "OpinionState":
        return cls(opinions=np.ones(n, dtype=np.uint8), count_ones=n)

    @classmethod
    def random_fraction(cls, n: int, p: float, seed: int) -> "OpinionState":
        """ceil(p*n) ones at uniformly random positions (seeded)."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"need p in [0,1], got {p}")
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        v = np.zeros(n, dtype=np.uint8)
        v[rng.choice(n, size=math.ceil(p * n), replace=False)] = 1
        return cls(opinions=v, count_ones=int(v.sum()))

    def verify_count(self) -> None:
        actual = int(self.opinions.sum())
        if actual != self.count_ones:
            raise AssertionError(f"count cache {self.count_ones} != recount {actual}")

    def copy(self) -> "OpinionState":
        return OpinionState(opinions=self.opinions.copy(), count_ones=self.count_ones)


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; k=1 is the base 2-choices model."""

    alpha: float
    seed: int
    t_max: float
    k: int = 1
    stop: frozenset | None = None
    record_stride: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"need alpha in [0,1], got {self.alpha}")
        if self.k < 1:
            raise ValueError(f"need k >= 1, got {self.k}")
        if not self.t_max > 0:
            raise ValueError(f"need t_max > 0, got {self.t_max}")
        if self.record_stride < 0:
            raise ValueError("record_stride must be >= 0")


@dataclass
class RunRecord:
    """Outcome of one run; hit_time is None when censored at t_max (or no stop set)."""

    hit_time: float | None
    censored: bool
    t_end: float
    events: int
    seed: int
    final_count: int
    trajectory: tuple | None = None  # (times, counts) arrays when recording


@dataclass
class BatchSummary:
    replicates: int
    completed: int
    censored_count: int
    mean: float | None
    stderr: float | None


@dataclass
class CoupledRecord:
    violations: int
    max_gap: int
    events: int
    t_end: float
    final_count: int
    final_bound: int
    gap_trajectory: tuple  # (times, gaps) at gap changes, capped


@dataclass
class StepEvent:
    node: int
    failed: bool
    sampled: tuple
    new_opinion: int
    changed: bool
    dt: float


def _seed_words(seed: int, index: int):
    ss = np.random.SeedSequence(seed & (2**64 - 1), spawn_key=(index,))
    w = ss.generate_state(2, np.uint32)
    return int(w[0]), int(w[1]) >> 16


def _stop_mask(n: int, stop: frozenset | None) -> np.ndarray:
    mask = np.zeros(n + 1, dtype=bool)
    if stop:
        levels = sorted(int(s) for s in stop)
        if levels[0] < 0 or levels[-1] > n:
            raise ValueError(f"stop levels must lie in [0, {n}]")
        mask[levels] = True
    return mask


def step(
    state: OpinionState,
    g: Graph,
    alpha: float,
    k: int,
    rng: np.random.Generator,
    node: int | None = None,
) -> StepEvent:
    """Reference implementation of one update event (mutates state in place).

    With probability alpha the node adopts a uniform random bit; otherwise it
    samples 2k neighbours uniformly with replacement and adopts the strict
    majority among those samples and itself.  The 2k+1 votes are odd, so a
    majority always exists; for k=1 this reduces to adopting the common
    opinion of two sampled neighbours only when they agree.
    """
    v = int(rng.integers(g.n)) if node is None else node
    dt = float(rng.exponential(1.0 / g.n))
    failed = bool(rng.random() < alpha)
    sampled = ()
    if failed:
        new = int(rng.integers(2))
    else:
        nbrs = g.neighbors(v)
        sampled = tuple(int(nbrs[rng.integers(len(nbrs))]) for _ in range(2 * k))
        votes = sum(int(state.opinions[u]) for u in sampled) + int(state.opinions[v])
        new = 1 if votes >= k + 1 else 0
    changed = new != int(state.opinions[v])
    if changed:
        state.opinions[v] = new
        state.count_ones += 1 if new == 1 else -1
    return StepEvent(node=v, failed=failed, sampled=sampled, new_opinion=new, changed=changed, dt=dt)


def run(
    g: Graph,
    initial: OpinionState,
    cfg: SimConfig,
    _replicate_index: int = 0,
    _invert_failure_bits: bool = False,
) -> RunRecord:
    """Simulate until a stop level is hit or t_max elapses; deterministic in cfg.seed."""
    if initial.opinions.shape[0] != g.n:
        raise ValueError(f"initial state has length {initial.opinions.shape[0]}, graph has n={g.n}")
    initial.verify_count()
    opinions = initial.opinions.copy()
    mask = _stop_mask(g.n, cfg.stop)
    w0, warmup = _seed_words(cfg.seed, _replicate_index)
    if cfg.record_stride > 0:
        cap = TRAJECTORY_CAP
        rec_t = np.empty(cap, dtype=np.float64)
        rec_a = np.empty(cap, dtype=np.int64)
    else:
        rec_t = np.empty(0, dtype=np.float64)
        rec_a = np.empty(0, dtype=np.int64)
    t_end, events, hit, count, nrec = _kernels.update_events(
        g.indptr,
        g.indices,
        opinions,
        initial.count_ones,
        float(cfg.alpha),
        cfg.k,
        mask,
        cfg.stop is not None and len(cfg.stop) > 0,
        float(cfg.t_max),
        cfg.record_stride,
        rec_t,
        rec_a,
        w0,
        warmup,
        _invert_failure_bits,
    )
    if count != int(opinions.sum()):
        raise AssertionError("count cache diverged from recount after run")
    trajectory = (rec_t[:nrec].copy(), rec_a[:nrec].copy()) if cfg.record_stride > 0 else None
    hit_time = None if hit < 0 else float(hit)
    censored = cfg.stop is not None and len(cfg.stop) > 0 and hit_time is None
    return RunRecord(
        hit_time=hit_time,
        censored=censored,
        t_end=float(t_end),
        events=int(events),
        seed=cfg.seed,
        final_count=int(count),
        trajectory=trajectory,
    )


def run_batch(g: Graph, initial: OpinionState, cfg: SimConfig, replicates: int):
    """Independent replicates with seeds derived from (cfg.seed, index).

    Censored runs are counted separately and never enter the mean.
    Returns (records, BatchSummary).
    """
    if replicates < 1:
        raise ValueError(f"need replicates >= 1, got {replicates}")
    records = [run(g, initial, cfg, _replicate_index=i) for i in range(replicates)]
    return records, summarize(records)


def summarize(records) -> BatchSummary:
    hits = np.array([r.hit_time for r in records if r.hit_time is not None])
    censored = sum(1 for r in records if r.censored)
    mean = float(hits.mean()) if hits.size else None
    stderr = float(hits.std(ddof=1) / math.sqrt(hits.size)) if hits.size > 1 else None
    return BatchSummary(
        replicates=len(records),
        completed=int(hits.size),
        censored_count=censored,
        mean=mean,
        stderr=stderr,
    )


def run_coupled(
    g: Graph,
    initial: OpinionState,
    alpha: float,
    L_min: float,
    L_max: float,
    seed: int,
    t_max: float,
    record_cap: int = 4096,
    _replicate_index: int = 0,
) -> CoupledRecord:
    """Co-evolve the dynamics with its dominating count chain and report ordering breaks.

    The bound chain starts level with the true count and uses the dominating
    rate pair (birth qbar_plus, death qunder_minus) built from L_min/L_max;
    take those from the graph's spectral summary.  A violations count above 0
    falsifies the pathwise dominance; a SandwichViolationError means the rate
    bounds themselves failed at some visited state, falsifying their inputs.
    """
    if initial.opinions.shape[0] != g.n:
        raise ValueError("initial state length mismatch")
    if L_min <= 0 or L_max < L_min:
        raise ValueError(f"need 0 < L_min <= L_max, got {L_min}, {L_max}")
    initial.verify_count()
    opinions = initial.opinions.copy()
    w0, warmup = _seed_words(seed, _replicate_index)
    rec_t = np.empty(record_cap, dtype=np.float64)
    rec_gap = np.empty(record_cap, dtype=np.int64)
    status, violations, max_gap, events, t_end, count, bound, nrec = _kernels.coupled_events(
        g.indptr,
        g.indices,
        opinions,
        float(alpha),
        float(L_min),
        float(L_max),
        float(t_max),
        rec_t,
        rec_gap,
        w0,
        warmup,
    )
    if status == 1:
        raise SandwichViolationError(
            "per-state rate escaped [qunder, qbar] bounds; L_min/L_max do not hold for this graph"
        )
    return CoupledRecord(
        violations=int(violations),
        max_gap=int(max_gap),
        events=int(events),
        t_end=float(t_end),
        final_count=int(count),
        final_bound=int(bound),
        gap_trajectory=(rec_t[:nrec].copy(), rec_gap[:nrec].copy()),
    )
