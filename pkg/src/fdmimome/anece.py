"""Two-phase anti-eavesdropping channel estimation: pilots, MMSE error
variances, mutual-information bounds and secure-degrees-of-freedom limits.

Phase 1 sends concurrent pilots whose nested row spans let both users
estimate the reciprocal channel while Eve's estimate stays ambiguous in an
n_b-dimensional subspace. Phase 2 transmits data; the secrecy rate is
bracketed by Monte Carlo lower/upper bound pairs whose gap is a closed
form, so it carries no Monte Carlo noise. Self-interference is idealized
to zero in both phases.
"""

from dataclasses import dataclass

import numpy as np

from ._rng import complex_normal, substream

_EULER_GAMMA = float(np.euler_gamma)


@dataclass(frozen=True)
class AneceConfig:
    """Two-phase scenario: pilot/data lengths, common power, path-loss factors."""

    n_a: int
    n_b: int
    n_e: int
    k1: int               # pilot samples
    k2: int               # data samples
    p: float              # common power P_A = P_B (linear)
    a: float = 1.0
    b: float = 1.0
    mc_trials: int = 2000
    seed: int = 0

    def __post_init__(self):
        if not (self.k1 >= self.n_a >= self.n_b >= 1):
            raise ValueError("need k1 >= n_a >= n_b >= 1")
        if self.k2 < 1:
            raise ValueError("k2 must be >= 1")
        if self.p < 0:
            raise ValueError("power must be nonnegative")


def db_to_linear(p_db):
    return 10.0 ** (p_db / 10.0)


@dataclass(frozen=True)
class PilotPair:
    p_a_mat: np.ndarray   # n_a x k1
    p_b_mat: np.ndarray   # n_b x k1
    gamma: np.ndarray     # k1 x k1 unitary


def design_pilots(cfg, gamma=None):
    """Orthogonal pilots with Bob's row span nested inside Alice's."""
    k1 = cfg.k1
    if gamma is None:
        gamma = np.eye(k1, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.shape != (k1, k1) or not np.allclose(gamma @ gamma.conj().T, np.eye(k1), atol=1e-10):
        raise ValueError("gamma must be a k1 x k1 unitary matrix")
    p_a = np.sqrt(cfg.k1 * cfg.p / cfg.n_a) * gamma[: cfg.n_a, :]
    p_b = np.sqrt(cfg.k1 * cfg.p / cfg.n_b) * gamma[: cfg.n_b, :]
    return PilotPair(p_a_mat=p_a, p_b_mat=p_b, gamma=gamma)


@dataclass(frozen=True)
class EstimationErrorVariances:
    sigma2_a: float     # Alice's error on the reciprocal channel
    sigma2_b: float     # Bob's error
    sigma2_ea: float    # Eve's error on the Alice-side channel
    sigma2_eb: float    # Eve's error on the Bob-side channel


def mmse_error_variances(cfg):
    """Closed-form per-entry MMSE error variances after phase 1.

    Eve's two variances share a denominator; their numerators sum to the
    denominator plus one, so sigma2_ea + sigma2_eb >= 1 always.
    """
    ga = cfg.k1 * cfg.p / cfg.n_a     # pilot gram gain at Alice's side
    gb = cfg.k1 * cfg.p / cfg.n_b
    denom = cfg.a * ga + cfg.b * gb + 1.0
    return EstimationErrorVariances(
        sigma2_a=1.0 / (1.0 + gb),
        sigma2_b=1.0 / (1.0 + ga),
        sigma2_ea=(cfg.b * gb + 1.0) / denom,
        sigma2_eb=(cfg.a * ga + 1.0) / denom,
    )


def mmse_estimate_mc(cfg, trials, seed, gamma=None):
    """Simulate phase 1 and measure per-entry estimation error variances.

    Returns a dict with the four empirical variances plus the error variance
    inside Eve's ambiguous (pilot-null) subspace, which stays at the prior.
    For n_a > n_b the closed form sigma2_ea describes the n_b columns of A
    that overlap Bob's pilots; the remaining columns are estimated better,
    so ``sigma2_ea_mixed`` isolates the overlapping block.
    """
    pil = design_pilots(cfg, gamma)
    p_a, p_b = pil.p_a_mat, pil.p_b_mat
    k1 = cfg.k1
    eye = np.eye(k1)
    w_bob = np.linalg.solve(p_a.conj().T @ p_a + eye, p_a.conj().T)          # k1 x n_a
    w_alice = np.linalg.solve(p_b.conj().T @ p_b + eye, p_b.conj().T)        # k1 x n_b
    m_joint = cfg.a * p_a.conj().T @ p_a + cfg.b * p_b.conj().T @ p_b + eye
    w_ea = np.sqrt(cfg.a) * np.linalg.solve(m_joint, p_a.conj().T)           # k1 x n_a
    w_eb = np.sqrt(cfg.b) * np.linalg.solve(m_joint, p_b.conj().T)           # k1 x n_b

    k_stack = np.concatenate([np.sqrt(cfg.a) * p_a, np.sqrt(cfg.b) * p_b])   # (n_a+n_b) x k1
    _, s, vh = np.linalg.svd(k_stack.T)
    rank = int(np.sum(s > 1e-10 * s[0]))
    null_basis = vh.conj().T[:, rank:]                                       # (n_a+n_b) x n_b

    acc = {"a": 0.0, "b": 0.0, "ea": 0.0, "eb": 0.0, "ea_mixed": 0.0, "null": 0.0}
    for t in range(trials):
        rng = substream(seed, t)
        h = complex_normal(rng, (cfg.n_b, cfg.n_a))
        a_mat = complex_normal(rng, (cfg.n_e, cfg.n_a))
        b_mat = complex_normal(rng, (cfg.n_e, cfg.n_b))
        y_a = h.T @ p_b + complex_normal(rng, (cfg.n_a, k1))
        y_b = h @ p_a + complex_normal(rng, (cfg.n_b, k1))
        y_e = (np.sqrt(cfg.a) * a_mat @ p_a + np.sqrt(cfg.b) * b_mat @ p_b
               + complex_normal(rng, (cfg.n_e, k1)))
        h_hat_b = y_b @ w_bob
        h_hat_a_t = y_a @ w_alice
        a_hat = y_e @ w_ea
        b_hat = y_e @ w_eb
        err_a = h.T - h_hat_a_t
        err_b = h - h_hat_b
        err_ea = a_mat - a_hat
        err_eb = b_mat - b_hat
        acc["a"] += float(np.mean(np.abs(err_a) ** 2))
        acc["b"] += float(np.mean(np.abs(err_b) ** 2))
        acc["ea"] += float(np.mean(np.abs(err_ea) ** 2))
        acc["eb"] += float(np.mean(np.abs(err_eb) ** 2))
        acc["ea_mixed"] += float(np.mean(np.abs(err_ea[:, : cfg.n_b]) ** 2))
        stacked_err = np.concatenate([err_ea, err_eb], axis=1)               # n_e x (n_a+n_b)
        coords = stacked_err @ np.conj(null_basis)
        acc["null"] += float(np.mean(np.abs(coords) ** 2))
    return {
        "sigma2_a": acc["a"] / trials,
        "sigma2_b": acc["b"] / trials,
        "sigma2_ea": acc["ea"] / trials,
        "sigma2_eb": acc["eb"] / trials,
        "sigma2_ea_mixed": acc["ea_mixed"] / trials,
        "null_subspace_variance": acc["null"] / trials,
        "trials": trials,
    }


def euler_exp_constant(t, r):
    """exp((1/t) * sum_{j=1..t} H_{r-j} - gamma), H_0 = 0.

    Equals exp((1/t) E[ln det W]) for a t x t complex Wishart matrix with
    r degrees of freedom and identity scale.
    """
    if not 1 <= t <= r:
        raise ValueError("need 1 <= t <= r")
    harmonic = np.cumsum(1.0 / np.arange(1, r + 1))

    def h(n):
        return harmonic[n - 1] if n >= 1 else 0.0

    total = sum(h(r - j) for j in range(1, t + 1))
    return float(np.exp(total / t - _EULER_GAMMA))


@dataclass(frozen=True)
class RateBounds:
    lower: float
    upper: float
    se_lower: float = 0.0
    se_upper: float = 0.0
    trials: int = 0


def _mc_mean(values, scale):
    trials = len(values)
    mean = scale * float(np.mean(values))
    se = scale * float(np.std(values, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return mean, se


def _logdet2(m):
    c = np.linalg.cholesky(m)
    return 2.0 * float(np.sum(np.log2(np.real(np.diag(c)))))


def bound_bob(cfg, trials=None, seed=None):
    """Bounds on the information Bob collects over phase 2 (one direction).

    Lower bound is Monte Carlo over the channel estimate; the upper bound
    adds a closed-form term, so upper - lower carries no MC noise.
    """
    trials = trials or cfg.mc_trials
    seed = cfg.seed if seed is None else seed
    sig = mmse_error_variances(cfg)
    p, n_a, n_b, k2 = cfg.p, cfg.n_a, cfg.n_b, cfg.k2
    kb = p / (1.0 + cfg.k1 * p / n_a)             # residual-error noise power
    c = (p / n_a) / (1.0 + kb)
    var_h = 1.0 - sig.sigma2_b
    vals = np.empty(trials)
    eye = np.eye(n_b)
    for t in range(trials):
        z = complex_normal(substream(seed, 0, t), (n_b, n_a))
        h_hat = np.sqrt(var_h) * z
        vals[t] = _logdet2(eye + c * (h_hat @ h_hat.conj().T))
    lower, se = _mc_mean(vals, k2)
    t_a = min(n_a, k2)
    e_a = euler_exp_constant(t_a, max(n_a, k2))
    corr = n_b * (k2 * np.log2(1.0 + kb) - t_a * np.log2(1.0 + (kb / n_a) * e_a))
    return RateBounds(lower=lower, upper=lower + float(corr), se_lower=se, se_upper=se, trials=trials)


def bound_eve_one_way(cfg, trials=None, seed=None):
    """Bounds on what Eve collects in one-way transmission."""
    trials = trials or cfg.mc_trials
    seed = cfg.seed if seed is None else seed
    sig = mmse_error_variances(cfg)
    p, n_a, n_e, k2 = cfg.p, cfg.n_a, cfg.n_e, cfg.k2
    noise = p * sig.sigma2_ea
    c = (p / n_a) / (1.0 + noise)
    var_a = 1.0 - sig.sigma2_ea
    vals = np.empty(trials)
    eye = np.eye(n_e)
    for t in range(trials):
        z = complex_normal(substream(seed, 1, t), (n_e, n_a))
        a_hat = np.sqrt(var_a) * z
        vals[t] = _logdet2(eye + c * (a_hat @ a_hat.conj().T))
    lower, se = _mc_mean(vals, k2)
    t_a = min(n_a, k2)
    e_a = euler_exp_constant(t_a, max(n_a, k2))
    corr = n_e * (k2 * np.log2(1.0 + noise) - t_a * np.log2(1.0 + (noise / n_a) * e_a))
    return RateBounds(lower=lower, upper=lower + float(corr), se_lower=se, se_upper=se, trials=trials)


def bound_alice_two_way(cfg, trials=None, seed=None):
    """Reverse-link twin of bound_bob, with the user roles swapped."""
    trials = trials or cfg.mc_trials
    seed = cfg.seed if seed is None else seed
    sig = mmse_error_variances(cfg)
    p, n_a, n_b, k2 = cfg.p, cfg.n_a, cfg.n_b, cfg.k2
    ka = p / (1.0 + cfg.k1 * p / n_b)
    c = (p / n_b) / (1.0 + ka)
    var_h = 1.0 - sig.sigma2_a
    vals = np.empty(trials)
    eye = np.eye(n_a)
    for t in range(trials):
        z = complex_normal(substream(seed, 2, t), (n_b, n_a))
        h_hat = np.sqrt(var_h) * z
        vals[t] = _logdet2(eye + c * (h_hat.T @ h_hat.conj()))
    lower, se = _mc_mean(vals, k2)
    t_b = min(n_b, k2)
    e_b = euler_exp_constant(t_b, max(n_b, k2))
    corr = n_a * (k2 * np.log2(1.0 + ka) - t_b * np.log2(1.0 + (ka / n_b) * e_b))
    return RateBounds(lower=lower, upper=lower + float(corr), se_lower=se, se_upper=se, trials=trials)


def bound_eve_two_way(cfg, trials=None, seed=None):
    """Bounds on what Eve collects when both users transmit (two-way)."""
    trials = trials or cfg.mc_trials
    seed = cfg.seed if seed is None else seed
    sig = mmse_error_variances(cfg)
    p, n_a, n_b, n_e, k2 = cfg.p, cfg.n_a, cfg.n_b, cfg.n_e, cfg.k2
    denom = 1.0 + p * sig.sigma2_ea + p * sig.sigma2_eb
    var_a = 1.0 - sig.sigma2_ea
    var_b = 1.0 - sig.sigma2_eb
    vals = np.empty(trials)
    eye = np.eye(n_e)
    for t in range(trials):
        rng = substream(seed, 3, t)
        a_hat = np.sqrt(var_a) * complex_normal(rng, (n_e, n_a))
        b_hat = np.sqrt(var_b) * complex_normal(rng, (n_e, n_b))
        gram = (p / n_a) * (a_hat @ a_hat.conj().T) + (p / n_b) * (b_hat @ b_hat.conj().T)
        vals[t] = _logdet2(eye + gram / denom)
    lower, se = _mc_mean(vals, k2)
    if p == 0:
        corr = 0.0
    elif k2 <= n_a + n_b:
        sig_min = min(sig.sigma2_ea * p / n_a, sig.sigma2_eb * p / n_b)
        e_e1 = euler_exp_constant(k2, n_a + n_b)
        corr = k2 * n_e * np.log2(denom / (1.0 + sig_min * e_e1))
    else:
        t_det = ((sig.sigma2_ea * p / n_a) ** n_a * (sig.sigma2_eb * p / n_b) ** n_b) ** (1.0 / (n_a + n_b))
        e_e2 = euler_exp_constant(n_a + n_b, k2)
        corr = n_e * (k2 * np.log2(denom) - (n_a + n_b) * np.log2(1.0 + t_det * e_e2))
    return RateBounds(lower=lower, upper=lower + float(corr), se_lower=se, se_upper=se, trials=trials)


def secrecy_bounds(cfg, mode, trials=None, seed=None):
    """Per-sample secrecy-rate bracket for one-way or two-way transmission."""
    if mode not in ("one-way", "two-way"):
        raise ValueError(f"unknown mode {mode!r}")
    trials = trials or cfg.mc_trials
    seed = cfg.seed if seed is None else seed
    k2 = cfg.k2
    if mode == "one-way":
        rb = bound_bob(cfg, trials, seed)
        re = bound_eve_one_way(cfg, trials, seed)
        lower = max(0.0, rb.lower - re.upper) / k2
        upper = max(0.0, rb.upper - re.lower) / k2
        se_l = np.hypot(rb.se_lower, re.se_upper) / k2
        se_u = np.hypot(rb.se_upper, re.se_lower) / k2
    else:
        rb = bound_bob(cfg, trials, seed)
        ra = bound_alice_two_way(cfg, trials, seed)
        ret = bound_eve_two_way(cfg, trials, seed)
        lower = max(0.0, ra.lower + rb.lower - ret.upper) / k2
        upper = max(0.0, ra.upper + rb.upper - ret.lower) / k2
        se_l = float(np.sqrt(ra.se_lower**2 + rb.se_lower**2 + ret.se_upper**2)) / k2
        se_u = float(np.sqrt(ra.se_upper**2 + rb.se_upper**2 + ret.se_lower**2)) / k2
    return RateBounds(lower=lower, upper=upper, se_lower=float(se_l), se_upper=float(se_u), trials=trials)


def sdof_limits(n_a, n_b, n_e, k2, mode):
    """High-power slopes of the secrecy bounds (secure degrees of freedom)."""
    m = min(n_a, n_b)
    if mode == "one-way":
        upper = float(m)
        lower = float(m) if k2 <= n_a else max(0.0, m - (n_e / k2) * (k2 - n_a))
    elif mode == "two-way":
        upper = 2.0 * m
        lower = 2.0 * m if k2 <= n_a + n_b else max(0.0, 2.0 * m - (n_e / k2) * (k2 - n_a - n_b))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return lower, upper


def fit_slope(p_db_values, bound_values):
    """Least-squares slope of a bound against log2(P) over the power grid."""
    log2p = np.array([db_to_linear(p) for p in p_db_values])
    return float(np.polyfit(np.log2(log2p), np.asarray(bound_values, float), 1)[0])
