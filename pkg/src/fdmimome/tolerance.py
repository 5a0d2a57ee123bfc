"""Maximum tolerable number of Eve antennas, under three CSI assumptions.

All three metrics search for the largest n_e keeping the relevant secrecy
margin positive: the instantaneous one uses exact rates with fresh Eve
draws per candidate (median over draws), the fixed-allocation one is fully
deterministic through the asymptotic forms, and the optimized one re-runs
the power optimizer on every channel draw. The crossing is observed
monotone on tested configurations; each result stores a re-checkable
certificate with the margins at the returned value and at value + 1.
"""

from dataclasses import dataclass, replace

import numpy as np

from ._rng import complex_normal, substream
from .asymptotics import asymptotic_rate_bob, asymptotic_rate_eve_equal_power
from .channel import (
    PowerAllocation,
    exact_rate_bob,
    exact_rate_eve,
    path_loss,
)
from .sca import ScaSettings, optimize_powers

SEARCH_CAP = 4096


@dataclass(frozen=True)
class ToleranceResult:
    kind: str          # "instantaneous" | "fixed" | "optimized"
    n_a: int
    n_b: int
    value: int
    trials: int        # Eve draws or optimizer realizations per candidate
    at_cap: bool
    certificate: dict  # margins at value and value + 1
    allocation: str = ""


def _bracket_search(margin, cap=SEARCH_CAP):
    """Largest n_e >= 1 with margin(n_e) > 0; 0 if already negative at 1.

    Exponential bracketing then bisection on the observed sign change.
    Returns (value, at_cap, certificate).
    """
    m1 = margin(1)
    if m1 <= 0:
        return 0, False, {"margin_at_1": m1}
    lo, m_lo = 1, m1
    hi = 2
    while hi <= cap:
        m_hi = margin(hi)
        if m_hi <= 0:
            break
        lo, m_lo = hi, m_hi
        hi *= 2
    else:
        return cap, True, {"margin_at_value": m_lo, "cap": cap}
    while hi - lo > 1:
        mid = (lo + hi) // 2
        m_mid = margin(mid)
        if m_mid > 0:
            lo, m_lo = mid, m_mid
        else:
            hi, m_hi = mid, m_mid
    return lo, False, {"margin_at_value": m_lo, "margin_above": m_hi}


def linear_scan(margin, cap=SEARCH_CAP):
    """Reference search: walk n_e upward until the margin goes nonpositive."""
    last_positive = 0
    for n_e in range(1, cap + 1):
        if margin(n_e) > 0:
            last_positive = n_e
        else:
            return last_positive
    return cap


def max_tolerable_ne_instantaneous(ch, alloc, cfg, pos, eve_draws=25, seed=0, cap=SEARCH_CAP):
    """Instantaneous-CSI metric; median of Eve's exact rate over fresh draws.

    The crossing depends on which Eve draw one conditions on; the median
    over ``eve_draws`` redraws of (A, B) per candidate n_e is used and the
    choice is recorded in the result certificate.
    """
    a, b = path_loss(pos, cfg)
    r_bob = exact_rate_bob(ch, alloc, cfg)
    if alloc.p_s <= 0:
        return ToleranceResult("instantaneous", cfg.n_a, cfg.n_b, 0, eve_draws, False,
                               {"reason": "no signal power"}, "given")

    def margin(n_e):
        rates = np.empty(eve_draws)
        for d in range(eve_draws):
            rng = substream(seed, n_e, d)
            eve_ch = replace(
                ch,
                a_mat=complex_normal(rng, (n_e, cfg.n_a)),
                b_mat=complex_normal(rng, (n_e, cfg.n_b)),
            )
            rates[d] = exact_rate_eve(eve_ch, alloc, a, b)
        return r_bob - float(np.median(rates))

    value, at_cap, cert = _bracket_search(margin, cap)
    cert["eve_statistic"] = "median"
    return ToleranceResult("instantaneous", cfg.n_a, cfg.n_b, value, eve_draws, at_cap, cert, "given")


def fixed_rule_margin(cfg, pos, p_s_fraction=0.5):
    """Deterministic margin function for the fixed allocation rule.

    Rule: r = n_b, uniform streams, p_s = p_n = p_a_max/2, p_b = p_a_max
    (full caps, equal powers at both users).
    """
    a, b = path_loss(pos, cfg)
    p_a = cfg.p_a_max
    p_s = p_s_fraction * p_a
    p_n = p_a - p_s
    p_b = min(p_a, cfg.p_b_max)
    rate_bob = asymptotic_rate_bob(cfg, p_s, p_b)

    def margin(n_e):
        trial = replace(cfg, n_e=n_e)
        return rate_bob - asymptotic_rate_eve_equal_power(trial, p_s, p_n, p_b, a, b)

    return margin


def max_tolerable_ne_fixed(cfg, pos, p_s_fraction=0.5, cap=SEARCH_CAP):
    """Fixed-allocation metric from the two asymptotic forms; seed-free."""
    if cfg.p_a_max <= 0:
        return ToleranceResult("fixed", cfg.n_a, cfg.n_b, 0, 0, False,
                               {"reason": "no power"}, "fixed-rule")
    margin = fixed_rule_margin(cfg, pos, p_s_fraction)
    value, at_cap, cert = _bracket_search(margin, cap)
    return ToleranceResult("fixed", cfg.n_a, cfg.n_b, value, 0, at_cap, cert, "fixed-rule")


def max_tolerable_ne_opt(cfg, pos, draws=100, seed=0, cap=SEARCH_CAP, settings=None):
    """Optimized metric: mean of (exact Bob rate - asymptotic Eve rate) at the
    per-draw optimum must stay positive.

    Channel draws are shared across candidate n_e values (one realization set
    per seed); optimizer non-convergence on a draw excludes it and is counted.
    """
    from .channel import sample_channels

    settings = settings or ScaSettings()
    a, b = path_loss(pos, cfg)
    if cfg.p_a_max <= 0:
        return ToleranceResult("optimized", cfg.n_a, cfg.n_b, 0, draws, False,
                               {"reason": "no power"}, "optimized")
    excluded = {"count": 0}

    def margin(n_e):
        trial = replace(cfg, n_e=n_e)
        margins = []
        for l in range(draws):
            ch = sample_channels(trial, trial.n_b, substream(seed, l))
            res = optimize_powers(ch, trial, a, b, settings)
            if not res.best_converged:
                excluded["count"] += 1
                continue
            margins.append(-res.g)
        if not margins:
            return float("-inf")
        return float(np.mean(margins))

    value, at_cap, cert = _bracket_search(margin, cap)
    cert["excluded_draws"] = excluded["count"]
    return ToleranceResult("optimized", cfg.n_a, cfg.n_b, value, draws, at_cap, cert, "optimized")
