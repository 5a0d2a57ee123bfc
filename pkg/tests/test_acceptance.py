"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Tolerances are pinned here, not configurable. Heavier criteria carry their
stated runtime budgets and assert them.
"""

import hashlib
import time

import numpy as np
import pytest

import fdmimome as fd
from fdcheck import richardson_grad, wirtinger_grad, wirtinger_jacobians
from fdmimome._rng import complex_normal, substream
from fdmimome.anece import (
    AneceConfig,
    bound_alice_two_way,
    bound_bob,
    bound_eve_one_way,
    bound_eve_two_way,
    db_to_linear,
    mmse_error_variances,
    mmse_estimate_mc,
    sdof_limits,
    secrecy_bounds,
)
from fdmimome.asymptotics import (
    DiagonalSpectrum,
    asymptotic_rate_eve_equal_power,
    asymptotic_rate_eve_general,
    limit_rate_eve,
    solve_eta,
)
from fdmimome.blind import (
    BlindConfig,
    BlindProblem,
    IllConditionedError,
    commutation_matrix,
    deflate_and_solve,
    eve_blind_rate,
    exhaustive_blind_search,
    gradients,
    hessians,
    objective_f,
)
from fdmimome.blind import _draw_instance
from fdmimome.channel import (
    NetworkConfig,
    PowerAllocation,
    exact_rate_bob,
    exact_rate_eve,
    path_loss,
    sample_channels,
    worst_case_eve_position,
)
from fdmimome.experiments import ExperimentSpec, run
from fdmimome.sca import ScaSettings, _ScaProblem, optimize_powers
from fdmimome.tolerance import max_tolerable_ne_fixed, max_tolerable_ne_opt

LOG2P = [p * np.log2(10.0) / 10.0 for p in (30.0, 40.0, 50.0)]


def _report(number, name, ok, detail):
    print(f"\nACCEPTANCE {number:>2} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {number} ({name}): {detail}"


def _vec(m):
    return np.reshape(m, -1, order="F")


def _unvec(v, shape):
    return np.reshape(v, shape, order="F")


def test_criterion_01_concentration():
    t0 = time.perf_counter()
    cfg0 = NetworkConfig(8, 4, 16)
    pos = worst_case_eve_position(cfg0)
    a, b = path_loss(pos, cfg0)
    worst = {16: 0.0, 64: 0.0}
    for n_e in (16, 64):
        cfg = NetworkConfig(8, 4, n_e)
        for p_db in (0.0, 10.0, 20.0, 30.0):
            p_a = db_to_linear(p_db)
            alloc = PowerAllocation(r=4, q_r=np.full(4, p_a / 8), p_n=p_a / 2, p_b=p_a)
            asym = asymptotic_rate_eve_general(cfg, alloc, a, b) / n_e
            errs = [
                abs(exact_rate_eve(sample_channels(cfg, 4, substream(7, n_e, int(p_db), t)),
                                   alloc, a, b) / n_e - asym) / asym
                for t in range(100)
            ]
            worst[n_e] = max(worst[n_e], float(np.median(errs)))
    elapsed = time.perf_counter() - t0
    ok = worst[16] < 0.10 and worst[64] < 0.05 and elapsed < 120.0
    _report(1, "concentration", ok,
            f"median rel err n_e=16: {worst[16]:.4f} (<0.10), n_e=64: {worst[64]:.4f} (<0.05), "
            f"{elapsed:.1f}s (<120s)")


def test_criterion_02_fixed_point():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    ok = True
    worst_res = 0.0
    for _ in range(1000):
        entries = rng.uniform(0.0, 1e3, size=int(rng.integers(1, 50)))
        spec = DiagonalSpectrum(entries, float(rng.uniform(0.05, 20.0)))
        sol = solve_eta(spec)
        worst_res = max(worst_res, abs(sol.residual))
        ok &= abs(sol.residual) <= 1e-12 and 0.0 < sol.eta <= 1.0
    golden = solve_eta(DiagonalSpectrum(np.array([1.0]), 1.0)).eta
    golden_err = abs(golden - (np.sqrt(5.0) - 1.0) / 2.0)
    elapsed = time.perf_counter() - t0
    ok = ok and golden_err <= 1e-10 and elapsed < 10.0
    _report(2, "fixed-point", ok,
            f"worst residual {worst_res:.2e} (<=1e-12), golden err {golden_err:.2e} (<=1e-10), "
            f"{elapsed:.2f}s (<10s)")


def test_criterion_03_limit():
    t0 = time.perf_counter()
    pos = worst_case_eve_position(NetworkConfig(8, 4, 64))
    gaps = {}
    for n_e in (64, 128, 256, 512, 1024):
        cfg = NetworkConfig(8, 4, n_e)
        a, b = path_loss(pos, cfg)
        p_a = db_to_linear(30.0)
        rae = asymptotic_rate_eve_equal_power(cfg, p_a / 2, p_a / 2, p_a, a, b)
        lim = limit_rate_eve(cfg, p_a / 2, a)
        gaps[n_e] = abs(rae - lim) / lim
    elapsed = time.perf_counter() - t0
    ok = all(g < 0.02 for g in gaps.values()) and gaps[1024] < 0.005 and elapsed < 5.0
    _report(3, "limit", ok,
            f"max gap n_e>=64: {max(gaps.values()):.4f} (<0.02), at 1024: {gaps[1024]:.5f} (<0.005), "
            f"{elapsed:.2f}s (<5s)")


def test_criterion_04_optimizer_dominance():
    t0 = time.perf_counter()
    rows = []
    strict = False
    ok = True
    for n_a in (4, 8):
        cfg = NetworkConfig(n_a, n_a // 2, 1)
        pos = worst_case_eve_position(cfg)
        fixed = max_tolerable_ne_fixed(cfg, pos)
        opt = max_tolerable_ne_opt(cfg, pos, draws=20, seed=4)
        rows.append(f"n_a={n_a}: fixed {fixed.value} opt {opt.value}")
        ok &= opt.value >= fixed.value
        strict |= opt.value > fixed.value
    elapsed = time.perf_counter() - t0
    ok = ok and strict and elapsed < 1800.0
    _report(4, "optimizer-dominance", ok,
            f"{'; '.join(rows)}; strict gap: {strict}, {elapsed:.0f}s (<1800s)")


def test_criterion_05_sca_mechanics():
    cfg = NetworkConfig(8, 4, 16)
    pos = worst_case_eve_position(cfg)
    a, b = path_loss(pos, cfg)
    descent_ok = True
    converged = 0
    instances = 0
    for draw in range(25):
        ch = sample_channels(cfg, 4, substream(5, draw))
        res = optimize_powers(ch, cfg, a, b)
        for row in res.diagnostics:
            descent_ok &= row["h"] <= row["h_start"] + 1e-9
        for r, conv in res.converged_by_r.items():
            instances += 1
            converged += conv
    conv_rate = converged / instances
    # analytic gradient of the concave part vs central differences
    rng = np.random.default_rng(55)
    ch = sample_channels(cfg, 4, substream(5, 100))
    grad_worst = 0.0
    for _ in range(50):
        r = int(rng.integers(1, 5))
        prob = _ScaProblem(ch, cfg, a, b, r)
        x = prob.project(rng.uniform(0, cfg.p_a_max / (r + 2), size=r + 2)) + 1.0
        eta3 = prob.solve_etas(x)[0].eta
        grad = prob.f_gradient(x, eta3)
        fd = richardson_grad(lambda v: prob.f_value(v, eta3), x)
        grad_worst = max(grad_worst, float(np.max(np.abs(grad - fd)) / np.max(np.abs(grad))))
    ok = descent_ok and instances == 100 and conv_rate >= 0.95 and grad_worst <= 1e-6
    _report(5, "sca-mechanics", ok,
            f"descent: {descent_ok}, convergence {converged}/{instances} (>=95%), "
            f"gradient FD worst {grad_worst:.2e} (<=1e-6)")


def test_criterion_06_anece_variances():
    cfg = AneceConfig(n_a=4, n_b=4, n_e=8, k1=4, k2=4, p=db_to_linear(10.0), a=1.3, b=0.7)
    emp = mmse_estimate_mc(cfg, trials=10**4, seed=6)
    sig = mmse_error_variances(cfg)
    rels = {
        "a": abs(emp["sigma2_a"] - sig.sigma2_a) / sig.sigma2_a,
        "b": abs(emp["sigma2_b"] - sig.sigma2_b) / sig.sigma2_b,
        "ea": abs(emp["sigma2_ea"] - sig.sigma2_ea) / sig.sigma2_ea,
        "eb": abs(emp["sigma2_eb"] - sig.sigma2_eb) / sig.sigma2_eb,
    }
    # high-power limit list at 60 dB
    hi = mmse_error_variances(
        AneceConfig(n_a=4, n_b=4, n_e=8, k1=4, k2=4, p=db_to_linear(60.0), a=1.3, b=0.7))
    lim_ea = cfg.b * cfg.n_a / (cfg.a * cfg.n_b + cfg.b * cfg.n_a)
    lim_eb = cfg.a * cfg.n_b / (cfg.a * cfg.n_b + cfg.b * cfg.n_a)
    limit_errs = (
        abs(hi.sigma2_ea - lim_ea) / lim_ea,
        abs(hi.sigma2_eb - lim_eb) / lim_eb,
        abs((1.0 - hi.sigma2_ea) - lim_eb) / lim_eb,   # estimate-entry variance of a_hat
        hi.sigma2_b,                                   # -> 0
        hi.sigma2_a,                                   # -> 0
    )
    ok = max(rels.values()) < 0.02 and max(limit_errs[:3]) < 0.01 \
        and limit_errs[3] < 0.01 and limit_errs[4] < 0.01
    _report(6, "anece-variances", ok,
            f"worst MC rel err {max(rels.values()):.4f} (<0.02 at 1e4 trials), "
            f"worst 60 dB limit err {max(limit_errs[:3]):.5f} (<0.01)")


def _slope(values):
    return float(np.polyfit(LOG2P, values, 1)[0])


def test_criterion_07_sdof_slopes():
    t0 = time.perf_counter()
    trials, seed = 800, 1
    failures = []

    def check(name, slope, target, scale):
        tol = 0.05 * max(abs(target), scale)
        if abs(slope - target) > tol:
            failures.append(f"{name}: slope {slope:.3f} vs {target:.3f}")

    for mode, k2_grid in (("one-way", (2, 4, 8)), ("two-way", (4, 8, 12))):
        for k2 in k2_grid:
            scale = k2 * 4.0
            cfgs = [AneceConfig(n_a=4, n_b=4, n_e=8, k1=4, k2=k2, p=db_to_linear(p))
                    for p in (30.0, 40.0, 50.0)]
            if mode == "one-way":
                rb = [bound_bob(c, trials, seed) for c in cfgs]
                re = [bound_eve_one_way(c, trials, seed) for c in cfgs]
                check(f"RB-/k2={k2}", _slope([x.lower for x in rb]), k2 * 4.0, scale)
                check(f"RB+/k2={k2}", _slope([x.upper for x in rb]), k2 * 4.0, scale)
                check(f"RE-/k2={k2}", _slope([x.lower for x in re]), 0.0, scale)
                re_plus_target = 0.0 if k2 <= 4 else 8.0 * (k2 - 4)
                check(f"RE+/k2={k2}", _slope([x.upper for x in re]), re_plus_target, scale)
            else:
                ra = [bound_alice_two_way(c, trials, seed) for c in cfgs]
                rt = [bound_eve_two_way(c, trials, seed) for c in cfgs]
                check(f"RA-/k2={k2}", _slope([x.lower for x in ra]), k2 * 4.0, scale)
                check(f"RA+/k2={k2}", _slope([x.upper for x in ra]), k2 * 4.0, scale)
                check(f"REt-/k2={k2}", _slope([x.lower for x in rt]), 0.0, scale)
                rt_plus_target = 0.0 if k2 <= 8 else 8.0 * (k2 - 8)
                check(f"REt+/k2={k2}", _slope([x.upper for x in rt]), rt_plus_target, scale)
            # composed secrecy bounds against the closed-form SDoF limits
            sb = [secrecy_bounds(c, mode, trials, seed) for c in cfgs]
            lo_t, up_t = sdof_limits(4, 4, 8, k2, mode)
            sdof_scale = 2.0 * 4.0 if mode == "two-way" else 4.0
            check(f"{mode}/k2={k2} lower", _slope([x.lower for x in sb]), lo_t, sdof_scale)
            check(f"{mode}/k2={k2} upper", _slope([x.upper for x in sb]), up_t, sdof_scale)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 600.0
    _report(7, "sdof-slopes", ok,
            f"{len(failures)} slope mismatches{': ' + '; '.join(failures) if failures else ''}, "
            f"{elapsed:.0f}s (<600s)")


def test_criterion_08_blind_calculus():
    rng = substream(8)
    grad_worst = hess_worst = 0.0
    rank_ok = pi_ok = True
    for i in range(50):
        cfg = BlindConfig(n_a=2, n_e=3, k2=4, p=1000.0)
        s0, _, y_e = _draw_instance(cfg, substream(8, i))
        z = y_e.conj().T @ y_e
        _, gss = gradients(s0, z)
        fd = wirtinger_grad(lambda v: objective_f(_unvec(v, s0.shape), z), _vec(s0))
        grad_worst = max(grad_worst, float(np.max(np.abs(fd - gss)) / np.max(np.abs(gss))))
        h_ss, h_xs = hessians(s0, z)
        d_s, d_sstar = wirtinger_jacobians(
            lambda v: gradients(_unvec(v, s0.shape), z)[1], _vec(s0))
        hess_worst = max(hess_worst,
                         float(np.max(np.abs(d_s - h_ss)) / np.max(np.abs(h_ss))),
                         float(np.max(np.abs(d_sstar - h_xs)) / np.max(np.abs(h_xs))))
        sv = np.linalg.svd(h_ss, compute_uv=False)
        rank_ok &= int(np.sum(sv < 1e-8 * sv[0])) == 4
        s_rand = complex_normal(rng, (2, 4))
        pi_ok &= bool(np.array_equal(commutation_matrix(2, 4) @ _vec(s_rand), _vec(s_rand.T)))
    ok = grad_worst <= 1e-6 and hess_worst <= 1e-5 and rank_ok and pi_ok
    _report(8, "blind-calculus", ok,
            f"grad FD worst {grad_worst:.2e} (<=1e-6), hessian FD worst {hess_worst:.2e} (<=1e-5), "
            f"rank deficiency == n_a^2: {rank_ok}, commutation identity: {pi_ok}")


def test_criterion_09_blind_oracle():
    # 200-trial pinned protocol for the recovery clause; the ratio clause
    # needs error events, which a 95%-recovery operating point starves, so
    # it is evaluated on the first 24 error trials of the same stream
    t0 = time.perf_counter()
    cfg = BlindConfig(n_a=1, n_e=1, k2=3, p=db_to_linear(30.0))
    hits200 = 0
    ratios = []
    t = 0
    while (t < 200 or len(ratios) < 24) and t < 40000:
        s0, _, y_e = _draw_instance(cfg, substream(0, t))
        prob = BlindProblem(y_e=y_e, constellation=cfg.constellation, n_a=1, k2=3)
        s_hat = exhaustive_blind_search(prob, s0[:, :1])
        hit = bool(np.allclose(s_hat, s0))
        if t < 200:
            hits200 += hit
        if not hit:
            gs, gss = gradients(s0, prob.z)
            h_ss, h_xs = hessians(s0, prob.z)
            try:
                err = deflate_and_solve(gs, gss, h_ss, h_xs, 1)
                true_err = _vec(s_hat - s0)[1:]
                ratios.append(float(np.linalg.norm(err) / np.linalg.norm(true_err)))
            except IllConditionedError:
                pass
        t += 1
    median_ratio = float(np.median(ratios[:24]))
    elapsed = time.perf_counter() - t0
    ok = hits200 / 200 >= 0.95 and 0.8 <= median_ratio <= 1.2
    _report(9, "blind-oracle", ok,
            f"recovery {hits200}/200 (>=95%), taylor/true median {median_ratio:.3f} over "
            f"{min(len(ratios), 24)} error trials (within 20%), {elapsed:.0f}s")


def test_criterion_10_blind_trends():
    # 60 trials instead of the stated 30: the k2=12 cell averages rank-1
    # outer products in a 32-dim space, so fewer than 32 usable trials
    # cannot produce a nonsingular MSE matrix
    t0 = time.perf_counter()
    trials, seed = 60, 0
    rates = []
    cells_ok = True
    for k2 in (5, 6, 8, 12):
        res = eve_blind_rate(BlindConfig(n_a=4, n_e=8, k2=k2, p=db_to_linear(30.0)), trials, seed)
        rates.append(res.r_ae2)
        cells_ok &= res.r_ae2 < res.r_ae_known_csi
    monotone = bool(np.all(np.diff(rates) >= -1e-9))
    fig7_ok = True
    details = []
    for n_e in (8, 16):
        res = eve_blind_rate(BlindConfig(n_a=4, n_e=n_e, k2=8, p=db_to_linear(30.0)), trials, seed)
        ncfg = NetworkConfig(4, 4, n_e, p_a_max=db_to_linear(30.0), p_b_max=0.0)
        alloc = PowerAllocation(r=4, q_r=np.full(4, db_to_linear(30.0) / 4))
        r_ab = float(np.mean([
            exact_rate_bob(sample_channels(ncfg, 4, substream(seed, 999000 + t)), alloc, ncfg)
            for t in range(trials)
        ]))
        blind_sec = max(0.0, r_ab - res.r_ae2)
        known_sec = max(0.0, r_ab - res.r_ae_known_csi)
        fig7_ok &= blind_sec > 0.0 and known_sec == 0.0
        details.append(f"n_e={n_e}: blind {blind_sec:.1f}, known {known_sec:.1f}")
    elapsed = time.perf_counter() - t0
    ok = monotone and cells_ok and fig7_ok and elapsed < 1800.0
    _report(10, "blind-trends", ok,
            f"r_ae2 {np.round(rates, 2).tolist()} monotone: {monotone}, below known-CSI: {cells_ok}, "
            f"{'; '.join(details)}, {elapsed:.0f}s (<1800s)")


def test_criterion_11_determinism(tmp_path):
    def digest(path):
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()

    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    spec_a = ExperimentSpec("concentration", params={"ne": [8]}, trials=5, seed=11, out=str(out_a))
    spec_b = ExperimentSpec("concentration", params={"ne": [8]}, trials=5, seed=11, out=str(out_b))
    run(spec_a, workers=1)
    run(spec_b, workers=1)
    same_seed = digest(out_a) == digest(out_b)
    out_w1 = tmp_path / "w1.csv"
    out_w3 = tmp_path / "w3.csv"
    run(ExperimentSpec("anece-bounds", params={"k2": [2, 4], "p_db": [30.0]},
                       trials=40, seed=11, out=str(out_w1)), workers=1)
    run(ExperimentSpec("anece-bounds", params={"k2": [2, 4], "p_db": [30.0]},
                       trials=40, seed=11, out=str(out_w3)), workers=3)
    worker_free = digest(out_w1) == digest(out_w3)
    ok = same_seed and worker_free
    _report(11, "determinism", ok,
            f"same-seed bytes identical: {same_seed}, worker-count independent: {worker_free}")
