"""Jamming/signal power optimization by successive convex approximation.

The cost g(x) = (asymptotic Eve rate) - (exact Bob rate) is minimized over
x = (q_1..q_r, p_n, p_b) inside the power polytope, for each stream count
r = 1..n_b. Per iteration the concave part of g (log|C_B| plus the
eta3-weighted Shannon sum) is linearized at the current iterate while the
eta fixed points stay frozen; the resulting convex subproblem is solved by
projected gradient with a Barzilai-Borwein step and Armijo backtracking.
Only subproblem descent is guaranteed, not monotonicity of g itself: the
eta re-solve after each subproblem can move the cost either way.
"""

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import DiagonalSpectrum, EtaSolution, eve_spectra, solve_eta
from .channel import PowerAllocation, exact_rate_bob, v_partitions, validate_allocation

_LN2 = float(np.log(2.0))
_LOG2E = float(np.log2(np.e))


@dataclass
class ScaSettings:
    epsilon: float = 0.01            # relative-change stop threshold
    max_iterations: int = 500
    subproblem_tol: float = 1e-6     # projected-gradient stationarity
    subproblem_max_iter: int = 2000
    eta0: tuple = (0.5, 0.5)         # initial frozen eta3, eta4


class _ScaProblem:
    """Precomputation for one (channel, config, r, a, b) instance.

    The optimization vector is x = [q_1..q_r, p_n, p_b]. Spectral diagonal
    entries are affine in x: n_e*a*q_i for the signal block, n_e*a*p_n/(n_a-r)
    repeated over the noise block, n_e*b*p_b/n_b over the jamming block.
    """

    def __init__(self, ch, cfg, a, b, r):
        self.cfg = cfg
        self.a = a
        self.b = b
        self.r = r
        self.n_noise = cfg.n_a - r
        v1, v2 = v_partitions(ch, r)
        self.hv1 = ch.h @ v1
        self.w_b = (cfg.rho / cfg.n_b) * (ch.g @ ch.g.conj().T)
        if self.n_noise > 0:
            hv2 = ch.h @ v2
            self.w_n = (hv2 @ hv2.conj().T) / self.n_noise
        else:
            self.w_n = None
        self.c_q = cfg.n_e * a
        self.c_n = cfg.n_e * a / self.n_noise if self.n_noise else 0.0
        self.c_b = cfg.n_e * b / cfg.n_b
        self._eye = np.eye(cfg.n_b, dtype=complex)

    # --- pieces of the cost ---------------------------------------------

    def cov_bob(self, x):
        c = self._eye.copy()
        if self.w_n is not None:
            c += x[self.r] * self.w_n
        c += x[self.r + 1] * self.w_b
        return c

    def signal_gram(self, x):
        return (self.hv1 * x[: self.r]) @ self.hv1.conj().T

    def theta3(self, x):
        parts = [self.c_q * x[: self.r]]
        if self.n_noise:
            parts.append(np.full(self.n_noise, self.c_n * x[self.r]))
        parts.append(np.full(self.cfg.n_b, self.c_b * x[self.r + 1]))
        return np.concatenate(parts)

    def solve_etas(self, x):
        th3 = self.theta3(x)
        cfg = self.cfg
        s3 = DiagonalSpectrum(th3, (cfg.n_a + cfg.n_b) / cfg.n_e)
        s4 = DiagonalSpectrum(th3[self.r:], (cfg.n_a - self.r + cfg.n_b) / cfg.n_e)
        return solve_eta(s3), solve_eta(s4)

    def g_fixed_eta(self, x, eta3, eta4):
        """Cost with both eta values frozen (equals cost_g at solved etas)."""
        th3 = self.theta3(x)
        c_b = self.cov_bob(x)
        rate_bob = _logdet2(c_b + self.signal_gram(x)) - _logdet2(c_b)
        rate_eve = (
            float(np.sum(np.log2(1.0 + eta3 * th3)))
            - float(np.sum(np.log2(1.0 + eta4 * th3[self.r:])))
            + self.cfg.n_e * (np.log2(eta4 / eta3) + (eta3 - eta4) * _LOG2E)
        )
        return rate_eve - rate_bob

    def cost_g(self, x):
        e3, e4 = self.solve_etas(x)
        return self.g_fixed_eta(x, e3.eta, e4.eta)

    # --- concave part f and its gradient --------------------------------

    def f_value(self, x, eta3):
        return _logdet2(self.cov_bob(x)) + float(np.sum(np.log2(1.0 + eta3 * self.theta3(x))))

    def f_gradient(self, x, eta3):
        grad = np.zeros(self.r + 2)
        grad[: self.r] = self.c_q * eta3 / ((1.0 + eta3 * self.c_q * x[: self.r]) * _LN2)
        inv_cb = np.linalg.inv(self.cov_bob(x))
        if self.w_n is not None:
            grad[self.r] = np.real(np.trace(inv_cb @ self.w_n)) / _LN2
            grad[self.r] += self.cfg.n_e * self.a * eta3 / ((1.0 + eta3 * self.c_n * x[self.r]) * _LN2)
        grad[self.r + 1] = np.real(np.trace(inv_cb @ self.w_b)) / _LN2
        grad[self.r + 1] += self.cfg.n_e * self.b * eta3 / ((1.0 + eta3 * self.c_b * x[self.r + 1]) * _LN2)
        return grad

    # --- convex surrogate ------------------------------------------------

    def h_value(self, x, x_t, f_t, grad_f_t, eta4):
        c_b = self.cov_bob(x)
        val = -_logdet2(c_b + self.signal_gram(x))
        th4 = self.theta3(x)[self.r:]
        val -= float(np.sum(np.log2(1.0 + eta4 * th4)))
        return val + f_t + float(grad_f_t @ (x - x_t))

    def h_gradient(self, x, grad_f_t, eta4):
        grad = grad_f_t.copy()
        k = self.cov_bob(x) + self.signal_gram(x)
        k_inv = np.linalg.inv(k)
        # -log2|C_B + M| derivatives through the affine matrix map
        grad[: self.r] -= np.real(np.einsum("ij,jk,ki->i", self.hv1.conj().T, k_inv, self.hv1)) / _LN2
        if self.w_n is not None:
            grad[self.r] -= np.real(np.trace(k_inv @ self.w_n)) / _LN2
            grad[self.r] -= self.cfg.n_e * self.a * eta4 / ((1.0 + eta4 * self.c_n * x[self.r]) * _LN2)
        grad[self.r + 1] -= np.real(np.trace(k_inv @ self.w_b)) / _LN2
        grad[self.r + 1] -= self.cfg.n_e * self.b * eta4 / ((1.0 + eta4 * self.c_b * x[self.r + 1]) * _LN2)
        return grad

    # --- feasible set -----------------------------------------------------

    def project(self, x):
        out = np.empty_like(x)
        if self.n_noise:
            out[: self.r + 1] = project_capped_simplex(x[: self.r + 1], self.cfg.p_a_max)
        else:
            out[: self.r] = project_capped_simplex(x[: self.r], self.cfg.p_a_max)
            out[self.r] = 0.0
        out[self.r + 1] = min(max(x[self.r + 1], 0.0), self.cfg.p_b_max)
        return out

    def initial_point(self):
        x = np.empty(self.r + 2)
        x[: self.r] = self.cfg.p_a_max / (2.0 * self.r)
        x[self.r] = self.cfg.p_a_max / 2.0 if self.n_noise else 0.0
        x[self.r + 1] = self.cfg.p_b_max / 2.0
        return x

    def allocation(self, x):
        return PowerAllocation(r=self.r, q_r=x[: self.r].copy(), p_n=float(x[self.r]), p_b=float(x[self.r + 1]))


def _logdet2(m):
    c = np.linalg.cholesky(m)
    return 2.0 * float(np.sum(np.log2(np.real(np.diag(c)))))


def project_capped_simplex(v, cap):
    """Euclidean projection onto {u >= 0, sum(u) <= cap}."""
    u = np.maximum(v, 0.0)
    total = u.sum()
    if total <= cap:
        return u
    w = np.sort(v)[::-1]
    cssv = np.cumsum(w) - cap
    idx = np.arange(1, len(w) + 1)
    rho = idx[w - cssv / idx > 0][-1]
    tau = cssv[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


@dataclass
class ScaState:
    """Snapshot of one SCA run at iteration t (expansion point + frozen etas)."""

    alloc: PowerAllocation
    eta3: EtaSolution
    eta4: EtaSolution
    t: int = 0
    g_history: list = field(default_factory=list)
    problem: _ScaProblem = field(default=None, repr=False)

    @property
    def x(self):
        return np.concatenate([self.alloc.q_r, [self.alloc.p_n], [self.alloc.p_b]])


def make_state(ch, cfg, a, b, alloc, eta3=None, eta4=None, t=0):
    """Build an ScaState around an expansion point, solving etas if not given."""
    validate_allocation(alloc, cfg)
    problem = _ScaProblem(ch, cfg, a, b, alloc.r)
    if eta3 is None or eta4 is None:
        x = np.concatenate([alloc.q_r, [alloc.p_n], [alloc.p_b]])
        e3, e4 = problem.solve_etas(x)
    else:
        e3 = eta3 if isinstance(eta3, EtaSolution) else EtaSolution(float(eta3), float("nan"))
        e4 = eta4 if isinstance(eta4, EtaSolution) else EtaSolution(float(eta4), float("nan"))
    return ScaState(alloc=alloc, eta3=e3, eta4=e4, t=t, problem=problem)


def cost_g(alloc, ch, cfg, a, b):
    """Asymptotic Eve rate minus exact Bob rate; negative means positive secrecy."""
    validate_allocation(alloc, cfg)
    from .asymptotics import asymptotic_rate_eve_general

    return asymptotic_rate_eve_general(cfg, alloc, a, b) - exact_rate_bob(ch, alloc, cfg)


def eta_update(cfg, alloc, a, b):
    """Re-solve both fixed points at the current allocation."""
    spec3, spec4 = eve_spectra(cfg, alloc, a, b)
    return solve_eta(spec3), solve_eta(spec4)


def surrogate_h(alloc, state):
    """Convex majorizer of the frozen-eta cost at the state's expansion point.

    Includes the constant f(x_t), so h(x_t) - g_fixed_eta(x_t) depends only
    on the frozen etas, not on the expansion point.
    """
    prob = state.problem
    x_t = state.x
    x = np.concatenate([alloc.q_r, [alloc.p_n], [alloc.p_b]]) if isinstance(alloc, PowerAllocation) else np.asarray(alloc, float)
    f_t = prob.f_value(x_t, state.eta3.eta)
    grad_f_t = prob.f_gradient(x_t, state.eta3.eta)
    return prob.h_value(x, x_t, f_t, grad_f_t, state.eta4.eta)


def gradient_f(alloc, state):
    """Analytic gradient of the concave part at the given point."""
    prob = state.problem
    x = np.concatenate([alloc.q_r, [alloc.p_n], [alloc.p_b]]) if isinstance(alloc, PowerAllocation) else np.asarray(alloc, float)
    return prob.f_gradient(x, state.eta3.eta)


@dataclass
class SubproblemResult:
    x: np.ndarray
    converged: bool
    iterations: int
    stationarity: float
    h_start: float         # surrogate at the warm start (= previous iterate)
    h_value: float         # surrogate at the returned point
    step: float


def _solve_subproblem(prob, x_t, eta3, eta4, settings):
    """Projected gradient with BB step and Armijo backtracking on h."""
    f_t = prob.f_value(x_t, eta3)
    grad_f_t = prob.f_gradient(x_t, eta3)

    def h(x):
        return prob.h_value(x, x_t, f_t, grad_f_t, eta4)

    def grad_h(x):
        return prob.h_gradient(x, grad_f_t, eta4)

    x = prob.project(x_t.copy())
    hx = h(x)
    h_start = hx
    g = grad_h(x)
    step = max(1.0, float(np.linalg.norm(x))) / max(float(np.linalg.norm(g)), 1e-12)
    stat = float(np.linalg.norm(x - prob.project(x - g)))
    it = 0
    for it in range(1, settings.subproblem_max_iter + 1):
        stat = float(np.linalg.norm(x - prob.project(x - g)))
        if stat <= settings.subproblem_tol:
            return SubproblemResult(x, True, it - 1, stat, h_start, hx, step)
        # Armijo along the projection arc
        t = step
        for _ in range(60):
            y = prob.project(x - t * g)
            d = y - x
            hy = h(y)
            if hy <= hx + 1e-4 * float(g @ d) or np.allclose(y, x):
                break
            t *= 0.5
        gy = grad_h(y)
        s = y - x
        dg = gy - g
        sdg = float(s @ dg)
        step = float(s @ s) / sdg if sdg > 1e-16 else t * 2.0
        step = min(max(step, 1e-12), 1e12)
        x, hx, g = y, hy, gy
    return SubproblemResult(x, False, it, stat, h_start, hx, step)


def solve_convex_subproblem(state, settings=None):
    """Minimize the surrogate over the power polytope from the state's point."""
    settings = settings or ScaSettings()
    res = _solve_subproblem(state.problem, state.x, state.eta3.eta, state.eta4.eta, settings)
    return state.problem.allocation(res.x)


@dataclass
class OptimizationResult:
    r: int
    alloc: PowerAllocation
    g: float
    converged: bool          # every stream count's SCA run converged
    best_converged: bool     # the winning stream count's run converged
    iterations_by_r: dict
    converged_by_r: dict
    diagnostics: list        # per-iteration dicts: r, t, g, h, eta3, eta4, step


def optimize_powers(ch, cfg, a, b, settings=None):
    """Outer loop: sweep stream counts, run SCA on each, keep the best cost.

    g_min starts at 0 (the all-zero allocation), so the returned cost is
    never positive. The stream sweep stops at n_b: extra streams beyond the
    channel rank carry zero rate.
    """
    settings = settings or ScaSettings()
    g_min = 0.0
    best_alloc = PowerAllocation(r=1, q_r=np.zeros(1), p_n=0.0, p_b=0.0)
    best_r = 0
    best_converged = True    # the zero allocation needs no iterations
    iterations_by_r = {}
    converged_by_r = {}
    converged_all = True
    diagnostics = []
    for r in range(1, cfg.n_b + 1):
        prob = _ScaProblem(ch, cfg, a, b, r)
        x = prob.project(prob.initial_point())
        eta3, eta4 = float(settings.eta0[0]), float(settings.eta0[1])
        converged = False
        t = 0
        while t < settings.max_iterations:
            sub = _solve_subproblem(prob, x, eta3, eta4, settings)
            x_new = sub.x
            e3, e4 = prob.solve_etas(x_new)
            eta3, eta4 = e3.eta, e4.eta
            t += 1
            diagnostics.append({
                "r": r, "t": t, "g": prob.cost_g(x_new), "h": sub.h_value,
                "h_start": sub.h_start, "eta3": eta3, "eta4": eta4, "step": sub.step,
            })
            denom = float(np.linalg.norm(x))
            if denom > 0:
                rel = float(np.linalg.norm(x_new - x)) / denom
            else:
                rel = float(np.linalg.norm(x_new)) / max(cfg.p_a_max, 1e-300)
            x = x_new
            if rel <= settings.epsilon:
                converged = True
                break
        iterations_by_r[r] = t
        converged_by_r[r] = converged
        converged_all &= converged
        g_r = prob.cost_g(x)
        if g_r < g_min:
            g_min = g_r
            best_alloc = prob.allocation(x)
            best_r = r
            best_converged = converged
    return OptimizationResult(
        r=best_r, alloc=best_alloc, g=g_min, converged=converged_all,
        best_converged=best_converged, iterations_by_r=iterations_by_r,
        converged_by_r=converged_by_r, diagnostics=diagnostics,
    )
