"""Hot event loops, JIT-compiled.

Kernels use numba's Mersenne-Twister state, seeded per call from a 32-bit
word plus a short warm-up spin derived from a second word, so replicate
streams are decorrelated well beyond the 2^32 seed space.  Set
NUMBA_DISABLE_JIT=1 to run them as plain Python for debugging.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _seed_stream(seed_w0, warmup):
    np.random.seed(seed_w0)
    for _ in range(warmup):
        np.random.random()


@njit(cache=True)
def update_events(
    indptr,
    indices,
    opinions,
    count0,
    alpha,
    k,
    stop_mask,
    use_stop,
    t_max,
    record_stride,
    rec_t,
    rec_a,
    seed_w0,
    warmup,
    invert_failure_bits,
):
    """Run update events until a stop level is hit or t_max elapses.

    One event: a uniformly random node updates; with probability alpha it
    adopts a uniform random bit, otherwise it samples 2k neighbours with
    replacement and adopts the strict majority among the samples and itself
    (2k+1 votes, odd, so no ties).  Event times are exponential at rate n.

    Returns (t_end, events, hit_time, count, n_recorded); hit_time is -1.0
    when no stop level was reached.
    """
    _seed_stream(seed_w0, warmup)
    n = opinions.shape[0]
    inv_n = 1.0 / n
    draws = 2 * k
    majority = k + 1
    t = 0.0
    events = 0
    count = count0
    nrec = 0
    hit = -1.0
    cap = rec_t.shape[0]
    if record_stride > 0 and cap > 0:
        rec_t[0] = 0.0
        rec_a[0] = count
        nrec = 1
    if use_stop and stop_mask[count]:
        return 0.0, events, 0.0, count, nrec
    while True:
        dt = np.random.exponential(inv_n)
        if t + dt > t_max:
            t = t_max
            break
        t = t + dt
        events += 1
        v = np.random.randint(0, n)
        if np.random.random() < alpha:
            bit = 1 if np.random.random() < 0.5 else 0
            if invert_failure_bits:
                bit = 1 - bit
            new = bit
        else:
            base = indptr[v]
            deg = indptr[v + 1] - base
            ones = 0
            for _ in range(draws):
                ones += opinions[indices[base + np.random.randint(0, deg)]]
            new = 1 if ones + opinions[v] >= majority else 0
        old = opinions[v]
        changed = new != old
        if changed:
            opinions[v] = new
            if new == 1:
                count += 1
            else:
                count -= 1
        if record_stride > 0 and nrec < cap and events % record_stride == 0:
            rec_t[nrec] = t
            rec_a[nrec] = count
            nrec += 1
        if changed and use_stop and stop_mask[count]:
            hit = t
            break
    return t, events, hit, count, nrec


@njit(cache=True)
def stationary_histogram(
    indptr, indices, opinions, alpha, k, t_burn, t_max, seed_w0, warmup
):
    """Time-at-count histogram over (t_burn, t_max]; exact time weighting."""
    _seed_stream(seed_w0, warmup)
    n = opinions.shape[0]
    hist = np.zeros(n + 1)
    count = 0
    for v in range(n):
        count += opinions[v]
    t = 0.0
    while t < t_max:
        dt = np.random.exponential(1.0 / n)
        lo = t if t > t_burn else t_burn
        hi = t + dt if t + dt < t_max else t_max
        if hi > lo:
            hist[count] += hi - lo
        t += dt
        if t >= t_max:
            break
        v = np.random.randint(0, n)
        if np.random.random() < alpha:
            new = 1 if np.random.random() < 0.5 else 0
        else:
            base = indptr[v]
            deg = indptr[v + 1] - base
            ones = 0
            for _ in range(2 * k):
                ones += opinions[indices[base + np.random.randint(0, deg)]]
            new = 1 if ones + opinions[v] >= k + 1 else 0
        if new != opinions[v]:
            opinions[v] = new
            count += 1 if new == 1 else -1
    return hist


@njit(cache=True)
def coupled_events(
    indptr,
    indices,
    opinions,
    alpha,
    L_min,
    L_max,
    t_max,
    rec_t,
    rec_gap,
    seed_w0,
    warmup,
):
    """Co-evolve the full dynamics with its dominating count chain.

    The bound chain has birth rate qbar_plus and death rate qunder_minus.
    While the chains agree at count a, transitions are synthesized so that a
    true-chain birth always carries a simultaneous bound-chain birth (extra
    bound births fire alone at rate qbar_plus(a) - q_plus(x)), and a
    bound-chain death always carries a simultaneous true-chain death (extra
    true deaths fire alone at rate q_minus(x) - qunder_minus(a)); this keeps
    the bound chain's birth no later, and its death no earlier, than the true
    chain's.  Once the bound chain is strictly ahead the two evolve
    independently.  Negative synthesized rates mean the rate sandwich itself
    fails; status 1 reports that.

    Returns (status, violations, max_gap, events, t_end, count, bound, n_recorded).
    """
    _seed_stream(seed_w0, warmup)
    n = opinions.shape[0]
    nf = float(n)
    d1 = np.zeros(n, dtype=np.int64)
    for v in range(n):
        s = 0
        for j in range(indptr[v], indptr[v + 1]):
            s += opinions[indices[j]]
        d1[v] = s
    a = 0
    for v in range(n):
        a += opinions[v]
    abar = a
    t = 0.0
    events = 0
    violations = 0
    max_gap = 0
    nrec = 0
    cap = rec_t.shape[0]
    if cap > 0:
        rec_t[0] = 0.0
        rec_gap[0] = 0
        nrec = 1
    status = 0
    half = 0.5 * alpha
    one_m = 1.0 - alpha
    while t < t_max:
        s_up = 0.0
        s_dn = 0.0
        for v in range(n):
            deg = indptr[v + 1] - indptr[v]
            frac = d1[v] / deg
            if opinions[v] == 0:
                s_up += half + one_m * frac * frac
            else:
                fb = 1.0 - frac
                s_dn += half + one_m * fb * fb
        ab = float(abar)
        qb_up = half * (nf - ab) + one_m * L_max * ab * ab * (nf - ab) / (nf * nf)
        qb_dn = half * ab + one_m * L_min * ab * (nf - ab) * (nf - ab) / (nf * nf)
        if abar == a:
            # [joint birth, bound-only birth, joint death, true-only death]
            e0 = s_up
            e1 = qb_up - s_up
            e2 = qb_dn
            e3 = s_dn - qb_dn
            if e1 < -1e-9 * (1.0 + qb_up) or e3 < -1e-9 * (1.0 + s_dn):
                status = 1
                break
            if e1 < 0.0:
                e1 = 0.0
            if e3 < 0.0:
                e3 = 0.0
        else:
            # [true birth, bound birth, bound death, true death]
            e0 = s_up
            e1 = qb_up
            e2 = qb_dn
            e3 = s_dn
        total = e0 + e1 + e2 + e3
        if total <= 0.0:
            t = t_max
            break
        dt = np.random.exponential(1.0 / total)
        if t + dt > t_max:
            t = t_max
            break
        t += dt
        events += 1
        u = np.random.random() * total
        if abar == a:
            if u < e0:
                _flip_weighted(indptr, indices, opinions, d1, half, one_m, 0, s_up)
                a += 1
                abar += 1
            elif u < e0 + e1:
                abar += 1
            elif u < e0 + e1 + e2:
                _flip_weighted(indptr, indices, opinions, d1, half, one_m, 1, s_dn)
                a -= 1
                abar -= 1
            else:
                _flip_weighted(indptr, indices, opinions, d1, half, one_m, 1, s_dn)
                a -= 1
        else:
            if u < e0:
                _flip_weighted(indptr, indices, opinions, d1, half, one_m, 0, s_up)
                a += 1
            elif u < e0 + e1:
                abar += 1
            elif u < e0 + e1 + e2:
                abar -= 1
            else:
                _flip_weighted(indptr, indices, opinions, d1, half, one_m, 1, s_dn)
                a -= 1
        gap = abar - a
        if gap < 0:
            violations += 1
        if gap > max_gap:
            max_gap = gap
        if nrec < cap and (nrec == 0 or rec_gap[nrec - 1] != gap):
            rec_t[nrec] = t
            rec_gap[nrec] = gap
            nrec += 1
    return status, violations, max_gap, events, t, a, abar, nrec


@njit(cache=True)
def _flip_weighted(indptr, indices, opinions, d1, half, one_m, side, total):
    """Flip one node of the given side (0: up-move, 1: down-move), weighted by its rate."""
    n = opinions.shape[0]
    target = np.random.random() * total
    acc = 0.0
    chosen = -1
    for v in range(n):
        if opinions[v] != side:
            continue
        deg = indptr[v + 1] - indptr[v]
        frac = d1[v] / deg
        if side == 0:
            acc += half + one_m * frac * frac
        else:
            fb = 1.0 - frac
            acc += half + one_m * fb * fb
        if acc >= target:
            chosen = v
            break
    if chosen < 0:  # roundoff fallback: last eligible node
        for v in range(n - 1, -1, -1):
            if opinions[v] == side:
                chosen = v
                break
    if side == 0:
        opinions[chosen] = 1
        for j in range(indptr[chosen], indptr[chosen + 1]):
            d1[indices[j]] += 1
    else:
        opinions[chosen] = 0
        for j in range(indptr[chosen], indptr[chosen + 1]):
            d1[indices[j]] -= 1


@njit(cache=True)
def bd_exit_mc(p_up, low, high, a0, n_runs, seed_w0, warmup):
    """Embedded jump chain of a birth-death spec: count hits of high before low."""
    _seed_stream(seed_w0, warmup)
    hits = 0
    for _ in range(n_runs):
        s = a0
        while s != low and s != high:
            if np.random.random() < p_up[s]:
                s += 1
            else:
                s -= 1
        if s == high:
            hits += 1
    return hits
