"""Large-system rate formulas built on the eta/Shannon transform pair.

Everything here is deterministic: diagonal spectra go in, fixed points and
closed-form rates come out. The fixed point is the unique eta in (0, 1]
solving 1 - eta = (beta*eta/L) * sum_j theta_j / (1 + eta*theta_j); the
normalized log-det of J Theta J^H concentrates on
Omega = beta*V(eta) - log2(eta) + (eta-1)*log2(e).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

ETA_TOL = 1e-12
_ETA_CHECK_TOL = 1e-8   # looser gate for caller-supplied eta values


@dataclass(frozen=True)
class DiagonalSpectrum:
    """Diagonal of Theta plus the aspect ratio beta = K/N."""

    entries: np.ndarray
    beta: float

    def __post_init__(self):
        e = np.ascontiguousarray(self.entries, dtype=np.float64).reshape(-1)
        if e.size < 1:
            raise ValueError("spectrum needs at least one entry")
        if np.any(e < 0):
            raise ValueError("spectrum entries must be nonnegative")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)


@dataclass(frozen=True)
class EtaSolution:
    eta: float
    residual: float


def shannon_transform(spec, eta):
    """Average log2(1 + eta*theta_j) over the spectrum."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return kernels.shannon_transform(spec.entries, eta)


def solve_eta(spec):
    """Bisection solve of the fixed point; residual <= 1e-12 guaranteed."""
    eta, res = kernels.solve_eta(spec.entries, spec.beta, tol=ETA_TOL, max_iter=200)
    return EtaSolution(eta=eta, residual=res)


def omega(spec, eta):
    """Asymptotic normalized log-det at a solver-produced eta.

    Rejects an eta that does not satisfy the spectrum's fixed point, so the
    transform can never be evaluated with a mismatched pair.
    """
    eta_val = eta.eta if isinstance(eta, EtaSolution) else float(eta)
    res = kernels.eta_residual(spec.entries, spec.beta, eta_val)
    if abs(res) > _ETA_CHECK_TOL:
        raise ValueError(f"eta={eta_val} is not the fixed point of this spectrum (residual {res:.3g})")
    return kernels.omega_value(spec.entries, spec.beta, eta_val)


def eve_spectra(cfg, alloc, a, b):
    """Diagonal spectra (theta3, theta4) seen by Eve, zero-length blocks omitted.

    theta3 stacks the signal, artificial-noise and jamming blocks; theta4
    drops the signal block. Aspect ratios are (n_a+n_b)/n_e and
    (n_a-r+n_b)/n_e.
    """
    n_noise = cfg.n_a - alloc.r
    if n_noise == 0 and alloc.p_n > 0:
        raise ValueError("r = n_a leaves no artificial-noise block")
    blocks = [a * np.asarray(alloc.q_r, dtype=np.float64)]
    if n_noise > 0:
        blocks.append(np.full(n_noise, a * alloc.p_n / n_noise))
    blocks.append(np.full(cfg.n_b, b * alloc.p_b / cfg.n_b))
    th3 = cfg.n_e * np.concatenate(blocks)
    th4 = th3[alloc.r:]
    spec3 = DiagonalSpectrum(th3, (cfg.n_a + cfg.n_b) / cfg.n_e)
    spec4 = DiagonalSpectrum(th4, (cfg.n_a - alloc.r + cfg.n_b) / cfg.n_e)
    return spec3, spec4


def asymptotic_rate_eve_general(cfg, alloc, a, b):
    """Hardened (CSI-free) approximation of Eve's rate for any allocation."""
    spec3, spec4 = eve_spectra(cfg, alloc, a, b)
    eta3 = solve_eta(spec3)
    eta4 = solve_eta(spec4)
    return cfg.n_e * (omega(spec3, eta3) - omega(spec4, eta4))


def asymptotic_rate_bob(cfg, p_s, p_b):
    """Asymptotic R_AB for r = n_b and uniform stream powers.

    Combines the (n_a + n_b)-block spectrum with the jamming-only one;
    eta2 has the closed form 2/(sqrt(1+4x)+1) with x = rho*p_b, evaluated
    in the cancellation-free arrangement.
    """
    if cfg.n_a <= cfg.n_b:
        raise ValueError("asymptotic Bob rate assumes n_a > n_b")
    beta1 = (cfg.n_a + cfg.n_b) / cfg.n_b
    x = cfg.rho * p_b
    spec1 = DiagonalSpectrum(
        np.concatenate([np.full(cfg.n_a, p_s), np.full(cfg.n_b, x)]), beta1
    )
    eta1 = solve_eta(spec1).eta
    eta2 = 2.0 / (np.sqrt(1.0 + 4.0 * x) + 1.0)
    rate = (
        (beta1 - 1.0) * np.log2(1.0 + eta1 * p_s)
        + np.log2((1.0 + eta1 * x) / (1.0 + eta2 * x))
        + np.log2(eta2 / eta1)
        + (eta1 - eta2) * np.log2(np.e)
    )
    return cfg.n_b * float(rate)


def asymptotic_rate_eve_equal_power(cfg, p_s, p_n, p_b, a, b):
    """Eve's asymptotic rate under the fixed rule r = n_b, uniform q_r.

    Direct evaluation of the reduced closed form; requires n_a > n_b so the
    middle (artificial-noise) block (n_a - n_b entries) is nonempty.
    """
    if cfg.n_a <= cfg.n_b:
        raise ValueError("equal-power Eve rate needs n_a > n_b; use the general form with p_n=0")
    beta3 = (cfg.n_a + cfg.n_b) / cfg.n_e
    beta4 = cfg.n_a / cfg.n_e
    d34 = beta3 - beta4            # n_b / n_e
    d43 = 2.0 * beta4 - beta3      # (n_a - n_b) / n_e
    th3 = cfg.n_e * np.concatenate([
        np.full(cfg.n_b, a * p_s / cfg.n_b),
        np.full(cfg.n_a - cfg.n_b, a * p_n / (cfg.n_a - cfg.n_b)),
        np.full(cfg.n_b, b * p_b / cfg.n_b),
    ])
    eta3 = solve_eta(DiagonalSpectrum(th3, beta3)).eta
    eta4 = solve_eta(DiagonalSpectrum(th3[cfg.n_b:], beta4)).eta
    rate = (
        d34 * np.log2(1.0 + a * p_s * eta3 / d34)
        + d34 * np.log2((d34 + b * p_b * eta3) / (d34 + b * p_b * eta4))
        + d43 * np.log2((d43 + a * p_n * eta3) / (d43 + a * p_n * eta4))
        + np.log2(eta4 / eta3)
        + (eta3 - eta4) * np.log2(np.e)
    )
    return cfg.n_e * float(rate)


def equal_power_etas(cfg, p_s, p_n, p_b, a, b):
    """The two fixed points used by the equal-power Eve rate, with residuals."""
    th3 = cfg.n_e * np.concatenate([
        np.full(cfg.n_b, a * p_s / cfg.n_b),
        np.full(cfg.n_a - cfg.n_b, a * p_n / (cfg.n_a - cfg.n_b)),
        np.full(cfg.n_b, b * p_b / cfg.n_b),
    ])
    eta3 = solve_eta(DiagonalSpectrum(th3, (cfg.n_a + cfg.n_b) / cfg.n_e))
    eta4 = solve_eta(DiagonalSpectrum(th3[cfg.n_b:], cfg.n_a / cfg.n_e))
    return eta3, eta4


def limit_rate_eve(cfg, p_s, a):
    """Large-antenna limit of Eve's rate; independent of both jamming powers."""
    return cfg.n_b * float(np.log2(1.0 + cfg.n_e * a * p_s / cfg.n_b))
