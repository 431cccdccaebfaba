"""Monte Carlo oracles used by the tests; independent of the analytic paths they check."""
import numpy as np

from twochoices._kernels import bd_exit_mc


def jump_up_probabilities(spec):
    tot = spec.q_plus + spec.q_minus
    p_up = np.zeros_like(spec.q_plus)
    inner = tot > 0
    p_up[inner] = spec.q_plus[inner] / tot[inner]
    return p_up


def mc_exit_probability(spec, a0, low, high, runs, seed):
    """Plain embedded-jump-chain estimate of P(hit high before low)."""
    p_up = jump_up_probabilities(spec)
    ss = np.random.SeedSequence(seed)
    w = ss.generate_state(2, np.uint32)
    hits = bd_exit_mc(p_up, low, high, a0, runs, int(w[0]), int(w[1]) >> 16)
    p_hat = hits / runs
    stderr = np.sqrt(max(p_hat * (1 - p_hat), 1e-12) / runs)
    return p_hat, stderr


def mc_exit_probability_splitting(spec, a0, low, high, runs_per_level, seed):
    """Level-splitting estimate for rare upward exits.

    For a birth-death path, hitting `high` before `low` from a0 decomposes
    exactly into consecutive stages s -> s+1 before low (strong Markov plus
    skip-free upward moves), so the product of per-stage estimates is an
    unbiased-in-log estimator with controlled relative error per stage.
    """
    p_up = jump_up_probabilities(spec)
    log_p = 0.0
    for stage, s in enumerate(range(a0, high)):
        ss = np.random.SeedSequence(seed, spawn_key=(stage,))
        w = ss.generate_state(2, np.uint32)
        hits = bd_exit_mc(p_up, low, s + 1, s, runs_per_level, int(w[0]), int(w[1]) >> 16)
        if hits == 0:
            return 0.0
        log_p += np.log(hits / runs_per_level)
    return float(np.exp(log_p))
