"""Eve-side blind maximum-likelihood detection and its error analysis.

With zero CSI, Eve jointly fits the channel and the symbol matrix; the
channel solves in closed form and leaves f(S) = Tr(S^H (SS^H)^-1 S Z) to
maximize over the constellation grid, Z = Y_E^H Y_E. Tiny instances are
solved exhaustively; larger ones use the second-order expansion of f
around the true symbols, whose gradients and Hessians are assembled from
Kronecker products in column-major vec convention. The mixing ambiguity
is pinned by anchoring the first n_a transmitted vectors, which deflates
n_a^2 rows/columns everywhere; the Taylor errors feed an MSE matrix and
Eve's effective rate (1/k2)(log|Q| - log|M|).
"""

from dataclasses import dataclass, field

import numpy as np

from ._rng import complex_normal, substream

COND_CAP = 1e12
ENUMERATION_CAP = 2 ** 20


class IllConditionedError(RuntimeError):
    """Raised when a deflated solve is too ill-conditioned to trust."""


def qam4(symbol_energy):
    """Gray-ordered 4-QAM points scaled to the given per-symbol energy."""
    base = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], dtype=complex)
    return np.sqrt(symbol_energy / 2.0) * base


@dataclass(frozen=True)
class BlindConfig:
    """Phase-2 instance seen by Eve: one-way data, no jamming."""

    n_a: int
    n_e: int
    k2: int
    p: float              # Alice's power (linear); per-symbol energy p/n_a
    a: float = 1.0        # large-scale factor toward Eve
    constellation_size: int = 4

    def __post_init__(self):
        if self.k2 <= self.n_a:
            raise ValueError("blind detection needs k2 > n_a")
        if self.constellation_size != 4:
            raise ValueError("only 4-QAM is supported")

    @property
    def constellation(self):
        return qam4(self.p / self.n_a)


@dataclass(frozen=True)
class BlindProblem:
    """One received block and its Gram matrix."""

    y_e: np.ndarray           # n_e x k2
    constellation: np.ndarray
    n_a: int
    k2: int
    z: np.ndarray = field(default=None)  # y_e^H y_e, cached

    def __post_init__(self):
        if self.k2 <= self.n_a:
            raise ValueError("need k2 > n_a")
        if len(self.constellation) < 2 or abs(np.mean(self.constellation)) > 1e-12:
            raise ValueError("constellation must have >= 2 zero-mean points")
        if self.z is None:
            object.__setattr__(self, "z", self.y_e.conj().T @ self.y_e)


def _vec(m):
    return np.reshape(m, -1, order="F")


def _gram_inverse(s_mat, diagnostics=None):
    gram = s_mat @ s_mat.conj().T
    if np.linalg.cond(gram) > COND_CAP:
        lam = 1e-10 * np.real(np.trace(gram)) / s_mat.shape[0]
        gram = gram + lam * np.eye(s_mat.shape[0])
        if diagnostics is not None:
            diagnostics["regularized"] = diagnostics.get("regularized", 0) + 1
    return np.linalg.inv(gram)


def objective_f(s_mat, z, diagnostics=None):
    """f(S) = Tr(S^H (SS^H)^-1 S Z); the residual-free part of the fit."""
    r = _gram_inverse(s_mat, diagnostics)
    p = s_mat.conj().T @ r @ s_mat
    return float(np.real(np.trace(p @ z)))


def exhaustive_blind_search(prob, anchor):
    """Grid argmax of f with the first n_a symbol vectors pinned to truth.

    Candidates are enumerated in lexicographic order of constellation
    indices over the free block (column-major); the first maximizer wins.
    """
    n_a, k2 = prob.n_a, prob.k2
    n_free = n_a * (k2 - n_a)
    n_pts = len(prob.constellation)
    if n_pts ** n_free > ENUMERATION_CAP:
        raise ValueError(f"{n_pts}^{n_free} candidates exceed the enumeration cap")
    anchor = np.asarray(anchor, dtype=complex).reshape(n_a, n_a)
    s = np.empty((n_a, k2), dtype=complex)
    s[:, :n_a] = anchor
    best_f = -np.inf
    best = None
    idx = np.zeros(n_free, dtype=np.int64)
    while True:
        s[:, n_a:] = prob.constellation[idx].reshape(k2 - n_a, n_a).T
        val = objective_f(s, prob.z)
        if val > best_f:
            best_f = val
            best = s.copy()
        # odometer over constellation indices, last position fastest
        pos = n_free - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < n_pts:
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            return best


def gradients(s_mat, z, diagnostics=None):
    """Wirtinger gradients of f at S: (grad_s, grad_sstar), column-major vec.

    grad_sstar = vec(R S Z (I - P)) with R = (SS^H)^-1 and P the row-space
    projector of S; grad_s is its conjugate.
    """
    r = _gram_inverse(s_mat, diagnostics)
    p = s_mat.conj().T @ r @ s_mat
    ip = np.eye(s_mat.shape[1]) - p
    grad_sstar = _vec(r @ s_mat @ z @ ip)
    return np.conj(grad_sstar), grad_sstar


def commutation_matrix(m, n):
    """Permutation with K @ vec(X) = vec(X^T) for X of shape (m, n)."""
    k = np.zeros((m * n, m * n))
    i, j = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    rows = (j + i * n).ravel()
    cols = (i + j * m).ravel()
    k[rows, cols] = 1.0
    return k


def hessians(s_mat, z, diagnostics=None):
    """Second Wirtinger derivatives (h_ss, h_sstar_s) at S.

    h_ss = ((I-P) Z (I-P))^T kron R - (I-P)^T kron (R S Z S^H R); the
    mixed block right-multiplies the commutation matrix because it acts on
    vec(S^H) rather than vec(S*). h_ss is Hermitian since f is real.
    """
    n_a, k2 = s_mat.shape
    r = _gram_inverse(s_mat, diagnostics)
    rs = r @ s_mat
    p = s_mat.conj().T @ rs
    ip = np.eye(k2) - p
    rszh = rs @ z @ s_mat.conj().T @ r
    h_ss = np.kron((ip @ z @ ip).T, r) - np.kron(ip.T, rszh)
    rszip = rs @ z @ ip
    h_sstar_s = -(np.kron(rszip.T, rs) + np.kron(rs.T, rszip)) @ commutation_matrix(n_a, k2)
    return h_ss, h_sstar_s


def deflate_and_solve(grad_s, grad_sstar, h_ss, h_sstar_s, n_a):
    """Taylor estimate of the symbol errors after anchoring the first block.

    Drops the n_a^2 anchored coordinates, then solves the stationarity
    system through the Schur complement. Raises IllConditionedError when
    the complement's condition number exceeds the cap.
    """
    d = n_a * n_a
    gs = grad_s[d:]
    gss = grad_sstar[d:]
    hss = h_ss[d:, d:]
    hxs = h_sstar_s[d:, d:]
    try:
        schur = hss - hxs @ np.linalg.solve(hss.T, hxs.conj().T)
        cond = np.linalg.cond(schur)
        if not np.isfinite(cond) or cond > COND_CAP:
            raise IllConditionedError(f"Schur complement condition {cond:.3g}")
        rhs = hxs @ np.linalg.solve(hss.T, gs) - gss
        return np.linalg.solve(schur, rhs)
    except np.linalg.LinAlgError as exc:
        # e.g. a singular anchored block leaves residual mixing ambiguity
        raise IllConditionedError(str(exc)) from exc


def _draw_instance(cfg, rng):
    constellation = cfg.constellation
    idx = rng.integers(0, len(constellation), size=(cfg.n_a, cfg.k2))
    s0 = constellation[idx]
    a_mat = complex_normal(rng, (cfg.n_e, cfg.n_a))
    noise = complex_normal(rng, (cfg.n_e, cfg.k2))
    y_e = np.sqrt(cfg.a) * a_mat @ s0 + noise
    return s0, a_mat, y_e


@dataclass(frozen=True)
class MseResult:
    m_bar: np.ndarray
    trials_used: int
    trials_flagged: int


def mse_matrix_mc(cfg, trials, seed):
    """Sample-averaged MSE matrix of the Taylor symbol errors."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n_free = cfg.n_a * (cfg.k2 - cfg.n_a)
    acc = np.zeros((n_free, n_free), dtype=complex)
    used = 0
    flagged = 0
    for t in range(trials):
        s0, _, y_e = _draw_instance(cfg, substream(seed, t))
        z = y_e.conj().T @ y_e
        gs, gss = gradients(s0, z)
        h_ss, h_xs = hessians(s0, z)
        try:
            err = deflate_and_solve(gs, gss, h_ss, h_xs, cfg.n_a)
        except IllConditionedError:
            flagged += 1
            continue
        acc += np.outer(err, err.conj())
        used += 1
    if used == 0:
        raise RuntimeError(f"all {trials} trials were flagged as ill-conditioned")
    return MseResult(m_bar=acc / used, trials_used=used, trials_flagged=flagged)


@dataclass(frozen=True)
class BlindRateResult:
    r_ae2: float              # Eve's effective blind rate, bits per sample
    r_ae_known_csi: float     # informed-Eve rate on the same draws
    q_bar_logdet: float
    m_bar_logdet: float
    trials_used: int
    trials_flagged: int
    seed: int
    singular: bool = False    # perfect detection: rate reported as +inf


def eve_blind_rate(cfg, trials, seed):
    """Effective rate (1/k2)(log|Q| - log|M|) plus the informed-Eve reference.

    Q is the covariance of the non-anchored symbols, (p/n_a) I for i.i.d.
    constellation draws, so its log-det is closed form.
    """
    mse = mse_matrix_mc(cfg, trials, seed)
    n_free = cfg.n_a * (cfg.k2 - cfg.n_a)
    q_logdet = n_free * float(np.log2(cfg.p / cfg.n_a))
    eigs = np.linalg.eigvalsh((mse.m_bar + mse.m_bar.conj().T) / 2.0)
    known = np.empty(trials)
    eye = np.eye(cfg.n_e)
    for t in range(trials):
        _, a_mat, _ = _draw_instance(cfg, substream(seed, t))
        gram = eye + cfg.a * (cfg.p / cfg.n_a) * (a_mat @ a_mat.conj().T)
        c = np.linalg.cholesky(gram)
        known[t] = 2.0 * float(np.sum(np.log2(np.real(np.diag(c)))))
    r_known = float(np.mean(known))
    if eigs[0] <= 0:
        return BlindRateResult(float("inf"), r_known, q_logdet, float("-inf"),
                               mse.trials_used, mse.trials_flagged, seed, singular=True)
    m_logdet = float(np.sum(np.log2(eigs)))
    r_ae2 = (q_logdet - m_logdet) / cfg.k2
    return BlindRateResult(r_ae2, r_known, q_logdet, m_logdet,
                           mse.trials_used, mse.trials_flagged, seed)


def constrained_blind_objective(s_mat, y_e, a_hat, c_a, diagnostics=None):
    """Residual of the subspace-constrained fit when Eve has a partial estimate.

    Evaluates ||(Y_E - A_hat S)(I - P_{C_A S})||_F^2 with the ambiguity block
    eliminated at its optimum; invariant to A_hat -> A_hat + T C_A.
    """
    cs = np.asarray(c_a) @ s_mat
    gram = cs @ cs.conj().T
    if np.linalg.cond(gram) > COND_CAP:
        lam = 1e-10 * np.real(np.trace(gram)) / gram.shape[0]
        gram = gram + lam * np.eye(gram.shape[0])
        if diagnostics is not None:
            diagnostics["regularized"] = diagnostics.get("regularized", 0) + 1
    proj = cs.conj().T @ np.linalg.solve(gram, cs)
    resid = (y_e - a_hat @ s_mat) @ (np.eye(s_mat.shape[1]) - proj)
    return float(np.real(np.sum(np.abs(resid) ** 2)))
