"""Network geometry, random channel draws, and instantaneous-CSI rates.

Distances are normalized to the Alice-Bob separation (Alice at x=-0.5, Bob
at x=+0.5) and powers to the background noise, which is fixed at one.
All logs are base 2, so rates are in bits.
"""

from dataclasses import dataclass, field

import numpy as np

from ._rng import complex_normal, substream


@dataclass(frozen=True)
class NetworkConfig:
    """Scenario truth: antenna counts, geometry and power caps."""

    n_a: int                   # Alice antennas
    n_b: int                   # Bob antennas
    n_e: int                   # Eve antennas
    delta: float = 0.1         # secured-zone radius around Alice
    alpha: float = 4.0         # path-loss exponent; 4 is a typical urban value
    rho: float = 0.001         # residual self-interference factor
    p_a_max: float = 1000.0    # Alice power cap (30 dB)
    p_b_max: float = 1000.0    # Bob power cap (30 dB)

    def __post_init__(self):
        if not (self.n_a >= self.n_b >= 1):
            raise ValueError(f"need n_a >= n_b >= 1, got n_a={self.n_a}, n_b={self.n_b}")
        if self.n_e < 1:
            raise ValueError("n_e must be >= 1")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must be in [0, 1]")
        if self.p_a_max < 0 or self.p_b_max < 0:
            raise ValueError("power caps must be nonnegative")


@dataclass(frozen=True)
class EvePosition:
    """Eve's normalized coordinates; Alice sits at (-0.5, 0), Bob at (+0.5, 0)."""

    x: float
    y: float

    @property
    def d_a(self):
        return float(np.hypot(self.x + 0.5, self.y))

    @property
    def d_b(self):
        return float(np.hypot(self.x - 0.5, self.y))


def path_loss(pos, cfg):
    """Large-scale factors (a, b) toward Eve; rejects positions inside the secured zone."""
    # boundary positions round a hair below delta; admit them
    if pos.d_a < cfg.delta * (1.0 - 1e-12):
        raise ValueError(f"Eve inside the secured zone: d_A={pos.d_a:.4g} < delta={cfg.delta}")
    a = pos.d_a ** (-cfg.alpha)
    b = pos.d_b ** (-cfg.alpha)
    return a, b


def worst_case_eve_position(cfg):
    """Most harmful position: on the secured-zone boundary, on the Alice side."""
    return EvePosition(-0.5 - cfg.delta, 0.0)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of all small-scale channels plus the SVD split of h at index r."""

    h: np.ndarray        # n_b x n_a, Alice -> Bob
    g: np.ndarray        # n_b x n_b, Bob self-interference
    a_mat: np.ndarray    # n_e x n_a, Alice -> Eve
    b_mat: np.ndarray    # n_e x n_b, Bob -> Eve
    r: int               # split index of the SVD partitions
    u1: np.ndarray = field(repr=False, default=None)
    u2: np.ndarray = field(repr=False, default=None)
    sigma1: np.ndarray = field(repr=False, default=None)
    sigma2: np.ndarray = field(repr=False, default=None)
    v1: np.ndarray = field(repr=False, default=None)
    v2: np.ndarray = field(repr=False, default=None)


def _freeze(arr):
    arr.setflags(write=False)
    return arr


def sample_channels(cfg, r, rng_seed):
    """Draw one i.i.d. CN(0,1) realization; deterministic given the seed.

    ``rng_seed`` is either an integer seed or an ``np.random.Generator``.
    The SVD of h is partitioned at split r: v2 spans the null space of h
    when r = n_b <= n_a.
    """
    if not 1 <= r <= cfg.n_b:
        raise ValueError(f"split r={r} outside 1..n_b={cfg.n_b}")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else substream(rng_seed)
    h = complex_normal(rng, (cfg.n_b, cfg.n_a))
    g = complex_normal(rng, (cfg.n_b, cfg.n_b))
    a_mat = complex_normal(rng, (cfg.n_e, cfg.n_a))
    b_mat = complex_normal(rng, (cfg.n_e, cfg.n_b))
    u, s, vh = np.linalg.svd(h, full_matrices=True)
    v = vh.conj().T
    return ChannelRealization(
        h=_freeze(h), g=_freeze(g), a_mat=_freeze(a_mat), b_mat=_freeze(b_mat), r=r,
        u1=_freeze(u[:, :r].copy()), u2=_freeze(u[:, r:].copy()),
        sigma1=_freeze(s[:r].copy()), sigma2=_freeze(s[r:].copy()),
        v1=_freeze(v[:, :r].copy()), v2=_freeze(v[:, r:].copy()),
    )


@dataclass(frozen=True)
class PowerAllocation:
    """Stream powers q_r, artificial-noise power p_n and Bob's jamming power p_b."""

    r: int
    q_r: np.ndarray
    p_n: float = 0.0
    p_b: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.q_r, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "q_r", _freeze(q.copy()))
        if len(q) != self.r:
            raise ValueError(f"q_r has {len(q)} entries but r={self.r}")

    @property
    def p_s(self):
        return float(np.sum(self.q_r))


def v_partitions(ch, r):
    """V1, V2 at split r; recuts the stored partitions when r differs."""
    if r == ch.r:
        return ch.v1, ch.v2
    v = np.concatenate([ch.v1, ch.v2], axis=1)
    return v[:, :r], v[:, r:]


def validate_allocation(alloc, cfg):
    """Feasibility per the power constraints; raises on violation."""
    tol = 1e-9 * max(cfg.p_a_max, 1.0)
    if not 1 <= alloc.r <= cfg.n_b:
        raise ValueError(f"r={alloc.r} outside 1..n_b={cfg.n_b}")
    if np.any(alloc.q_r < -tol) or alloc.p_n < -tol or alloc.p_b < -tol:
        raise ValueError("negative power entry")
    if alloc.p_s + alloc.p_n > cfg.p_a_max + tol:
        raise ValueError(f"p_s + p_n = {alloc.p_s + alloc.p_n:.6g} exceeds cap {cfg.p_a_max}")
    if alloc.p_b > cfg.p_b_max + tol:
        raise ValueError(f"p_b = {alloc.p_b:.6g} exceeds cap {cfg.p_b_max}")
    if alloc.r == cfg.n_a and alloc.p_n > 0:
        raise ValueError("r = n_a leaves no null space for artificial noise; p_n must be 0")


def logdet_hermitian(m):
    """log2 det of a Hermitian positive-definite matrix, via Cholesky."""
    c = np.linalg.cholesky(m)
    return 2.0 * float(np.sum(np.log2(np.real(np.diag(c)))))


def _cov_bob(ch, alloc, cfg):
    n_b = cfg.n_b
    _, v2 = v_partitions(ch, alloc.r)
    c = np.eye(n_b, dtype=complex)
    if alloc.p_n > 0 and v2.shape[1] > 0:
        hv2 = ch.h @ v2
        c += (alloc.p_n / v2.shape[1]) * (hv2 @ hv2.conj().T)
    if alloc.p_b > 0 and cfg.rho > 0:
        c += (cfg.rho * alloc.p_b / n_b) * (ch.g @ ch.g.conj().T)
    return c


def exact_rate_bob(ch, alloc, cfg):
    """R_AB = log2 |I + C_B^-1 H V1 Q_r V1^H H^H| for one realization."""
    validate_allocation(alloc, cfg)
    c_b = _cov_bob(ch, alloc, cfg)
    v1, _ = v_partitions(ch, alloc.r)
    hv1 = ch.h @ v1
    m = (hv1 * alloc.q_r) @ hv1.conj().T
    return logdet_hermitian(c_b + m) - logdet_hermitian(c_b)


def exact_rate_bob_svd_form(ch, alloc, cfg):
    """Reduced r x r form of R_AB through the SVD partitions.

    Uses C_B1 = I_r + (rho p_b / n_b) U1^H G G^H U1; the artificial noise
    drops out because H V2 is orthogonal to H V1. Exactly equal to the full
    form only when rho * p_b = 0: with self-interference the projected
    observation loses the cross-block coupling of G for a fixed draw.
    """
    validate_allocation(alloc, cfg)
    r = alloc.r
    u1 = ch.u1 if r == ch.r else np.concatenate([ch.u1, ch.u2], axis=1)[:, :r]
    s1 = ch.sigma1 if r == ch.r else np.concatenate([ch.sigma1, ch.sigma2])[:r]
    u1g = u1.conj().T @ ch.g
    c_b1 = np.eye(r, dtype=complex) + (cfg.rho * alloc.p_b / cfg.n_b) * (u1g @ u1g.conj().T)
    m = np.diag(s1 ** 2 * alloc.q_r).astype(complex)
    return logdet_hermitian(c_b1 + m) - logdet_hermitian(c_b1)


def _cov_eve(ch, alloc, a, b):
    n_e = ch.a_mat.shape[0]
    _, v2 = v_partitions(ch, alloc.r)
    c = np.eye(n_e, dtype=complex)
    if alloc.p_n > 0 and v2.shape[1] > 0:
        a2 = ch.a_mat @ v2
        c += (a * alloc.p_n / v2.shape[1]) * (a2 @ a2.conj().T)
    if alloc.p_b > 0:
        c += (b * alloc.p_b / ch.b_mat.shape[1]) * (ch.b_mat @ ch.b_mat.conj().T)
    return c


def exact_rate_eve(ch, alloc, a, b):
    """R_AE = log2 |I + a C_E^-1 A1 Q_r A1^H| for one realization."""
    if a < 0 or b < 0:
        raise ValueError("path-loss factors must be nonnegative")
    c_e = _cov_eve(ch, alloc, a, b)
    v1, _ = v_partitions(ch, alloc.r)
    a1 = ch.a_mat @ v1
    m = a * (a1 * alloc.q_r) @ a1.conj().T
    return logdet_hermitian(c_e + m) - logdet_hermitian(c_e)


def eve_difference_form(ch, alloc, a, b):
    """R_AE as a difference of two scaled log-dets (the asymptotics' exact twin)."""
    n_e = ch.a_mat.shape[0]
    v1, v2 = v_partitions(ch, alloc.r)
    n_noise = v2.shape[1]
    a1 = ch.a_mat @ v1
    a2 = ch.a_mat @ v2
    j3 = np.concatenate([a1, a2, ch.b_mat], axis=1) / np.sqrt(n_e)
    j4 = np.concatenate([a2, ch.b_mat], axis=1) / np.sqrt(n_e)
    th3 = n_e * np.concatenate([
        a * alloc.q_r,
        np.full(n_noise, a * alloc.p_n / n_noise) if n_noise else np.empty(0),
        np.full(ch.b_mat.shape[1], b * alloc.p_b / ch.b_mat.shape[1]),
    ])
    th4 = th3[alloc.r:]
    eye = np.eye(n_e, dtype=complex)
    return (
        logdet_hermitian(eye + (j3 * th3) @ j3.conj().T)
        - logdet_hermitian(eye + (j4 * th4) @ j4.conj().T)
    )


def secrecy_rate(ch, alloc, cfg, pos):
    """(R_AB - R_AE)^+ for one realization at Eve's position."""
    a, b = path_loss(pos, cfg)
    return max(0.0, exact_rate_bob(ch, alloc, cfg) - exact_rate_eve(ch, alloc, a, b))


@dataclass(frozen=True)
class ErgodicResult:
    value: float        # (mean R_AB - mean R_AE)^+
    mean_bob: float
    mean_eve: float
    se_bob: float
    se_eve: float
    trials: int


def ergodic_secrecy_mc(cfg, alloc, pos, trials, seed):
    """Monte Carlo estimate of the ergodic secrecy rate with standard errors."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    a, b = path_loss(pos, cfg)
    r_bob = np.empty(trials)
    r_eve = np.empty(trials)
    for t in range(trials):
        ch = sample_channels(cfg, alloc.r, substream(seed, t))
        r_bob[t] = exact_rate_bob(ch, alloc, cfg)
        r_eve[t] = exact_rate_eve(ch, alloc, a, b)
    se = lambda x: float(np.std(x, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return ErgodicResult(
        value=max(0.0, float(np.mean(r_bob) - np.mean(r_eve))),
        mean_bob=float(np.mean(r_bob)),
        mean_eve=float(np.mean(r_eve)),
        se_bob=se(r_bob),
        se_eve=se(r_eve),
        trials=trials,
    )
