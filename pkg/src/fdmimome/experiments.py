"""Batch experiment runner: every figure protocol as a deterministic CSV.

Each experiment expands its parameter grid into cells; cells run
independently (optionally on a process pool sized by FDMIMOME_WORKERS) and
are merged back in cell order, so output bytes depend only on the spec and
seed. Floats are written with 17 significant digits.
"""

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import anece, blind
from ._rng import substream
from .asymptotics import asymptotic_rate_eve_equal_power, asymptotic_rate_eve_general, limit_rate_eve
from .channel import (
    NetworkConfig,
    PowerAllocation,
    exact_rate_bob,
    exact_rate_eve,
    path_loss,
    sample_channels,
    worst_case_eve_position,
)
from .sca import ScaSettings, optimize_powers
from .tolerance import max_tolerable_ne_fixed, max_tolerable_ne_opt

WORKERS_ENV = "FDMIMOME_WORKERS"

EXPERIMENT_IDS = (
    "concentration",
    "ne-sweep",
    "sca-convergence",
    "limit-check",
    "anece-bounds",
    "sdof",
    "blind-rate",
    "blind-secrecy",
)


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    params: dict = field(default_factory=dict)
    trials: int = None
    seed: int = 0
    out: str = None
    preset: str = "desk"

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment!r}; see `list`")
        if self.preset not in ("desk", "paper"):
            raise ValueError("preset must be desk or paper")


# --- shared defaults ------------------------------------------------------

_GEOM = {"alpha": 4.0, "delta": 0.1, "rho": 0.001}


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _defaults(experiment, preset):
    desk = preset == "desk"
    if experiment == "concentration":
        return {"n_a": 8, "n_b": 4, "ne": [8, 16, 64], "p_db": [30.0], **_GEOM}, 100
    if experiment == "ne-sweep":
        return {"n_a": [4, 8], "p_db": 30.0, **_GEOM}, (20 if desk else 100)
    if experiment == "sca-convergence":
        return {"n_a": [4, 8], "ne_factor": 2, "p_db": 30.0, "epsilon": 0.01, **_GEOM}, (25 if desk else 100)
    if experiment == "limit-check":
        return {"n_a": 8, "n_b": 4, "ne": [16, 32, 64, 128, 256, 512, 1024], "p_db": 30.0, **_GEOM}, 1
    if experiment == "anece-bounds":
        return {"n_a": 4, "n_b": 4, "n_e": 8, "k1": 4, "k2": [2, 4, 8],
                "p_db": [30.0, 40.0, 50.0], "mode": ["one-way", "two-way"],
                "a": 1.0, "b": 1.0}, (400 if desk else 2000)
    if experiment == "sdof":
        return {"n_a": 4, "n_b": 4, "n_e": [8], "k2": [2, 4, 8, 12],
                "mode": ["one-way", "two-way"]}, 1
    # blind desk scale is 60, not 30: the widest cell (k2 = 3 n_a) averages
    # rank-1 outer products in a 32-dim space, so it needs > 32 usable trials
    if experiment == "blind-rate":
        return {"n_a": 4, "n_b": 4, "n_e": 8, "k2": [5, 6, 8, 12], "p_db": 30.0, "a": 1.0}, (60 if desk else 100)
    if experiment == "blind-secrecy":
        return {"n_a": 4, "n_b": 4, "ne": [4, 8, 16, 32], "k2": 8, "p_db": 30.0, "a": 1.0}, (60 if desk else 100)
    raise ValueError(experiment)


def resolve(spec):
    """Fill preset defaults, returning (params, trials)."""
    params, trials = _defaults(spec.experiment, spec.preset)
    params.update(spec.params)
    return params, spec.trials if spec.trials is not None else trials


# --- validation -----------------------------------------------------------

# parameter typing: int/num are scalars, a trailing + means a grid is allowed
_PARAM_TYPES = {
    "concentration": {"n_a": "int", "n_b": "int", "ne": "int+", "p_db": "num+",
                      "alpha": "num", "delta": "num", "rho": "num"},
    "ne-sweep": {"n_a": "int+", "p_db": "num", "alpha": "num", "delta": "num", "rho": "num"},
    "sca-convergence": {"n_a": "int+", "ne_factor": "num", "p_db": "num", "epsilon": "num",
                        "alpha": "num", "delta": "num", "rho": "num"},
    "limit-check": {"n_a": "int", "n_b": "int", "ne": "int+", "p_db": "num",
                    "alpha": "num", "delta": "num", "rho": "num"},
    "anece-bounds": {"n_a": "int", "n_b": "int", "n_e": "int", "k1": "int", "k2": "int+",
                     "p_db": "num+", "mode": "str+", "a": "num", "b": "num"},
    "sdof": {"n_a": "int", "n_b": "int", "n_e": "int+", "k2": "int+", "mode": "str+"},
    "blind-rate": {"n_a": "int", "n_b": "int", "n_e": "int", "k2": "int+", "p_db": "num",
                   "a": "num"},
    "blind-secrecy": {"n_a": "int", "n_b": "int", "ne": "int+", "k2": "int", "p_db": "num",
                      "a": "num"},
}


def _check_types(experiment, params):
    problems = []
    schema = _PARAM_TYPES[experiment]
    for key, value in params.items():
        kind = schema.get(key)
        if kind is None:
            problems.append(f"unknown parameter {key!r} for {experiment}")
            continue
        values = _as_list(value)
        if not values:
            problems.append(f"{key}: empty grid")
            continue
        if len(values) > 1 and not kind.endswith("+"):
            problems.append(f"{key}: grids are not supported here")
        base = kind.rstrip("+")
        for v in values:
            if base == "int" and not isinstance(v, int):
                problems.append(f"{key}: expected integer, got {v!r}")
            elif base == "num" and not isinstance(v, (int, float)):
                problems.append(f"{key}: expected number, got {v!r}")
            elif base == "str" and not isinstance(v, str):
                problems.append(f"{key}: expected name, got {v!r}")
    return problems


def validate(spec):
    """Dry-run feasibility check; returns a diagnostics dict.

    ``problems`` lists infeasible cells or parameters with reasons;
    ``cells`` is the grid size that a run would execute.
    """
    try:
        params, trials = resolve(spec)
    except ValueError as exc:
        return {"ok": False, "problems": [str(exc)], "cells": 0}
    problems = _check_types(spec.experiment, params)
    if problems:
        return {"ok": False, "problems": problems, "cells": 0, "trials": trials}
    if trials < 1:
        problems.append("trials must be >= 1")
    exp = spec.experiment
    if exp in ("concentration", "limit-check"):
        if not _as_list(params["ne"]):
            problems.append("empty ne grid")
        for ne in _as_list(params["ne"]):
            if ne < 1:
                problems.append(f"ne={ne}: need at least one Eve antenna")
        if params["n_a"] < params["n_b"]:
            problems.append("need n_a >= n_b")
        if exp == "limit-check" and params["n_a"] <= params["n_b"]:
            problems.append("limit-check uses the equal-power form: need n_a > n_b")
    elif exp in ("ne-sweep", "sca-convergence"):
        if not _as_list(params["n_a"]):
            problems.append("empty n_a grid")
        for n_a in _as_list(params["n_a"]):
            if n_a < 2 or n_a % 2:
                problems.append(f"n_a={n_a}: grid assumes n_b = n_a/2 >= 1, so n_a must be even")
    elif exp == "anece-bounds":
        for k2 in _as_list(params["k2"]):
            if k2 < 1:
                problems.append(f"k2={k2}: need k2 >= 1")
        if params["k1"] < params["n_a"]:
            problems.append(f"k1={params['k1']} < n_a={params['n_a']}: orthogonal pilots impossible")
        for mode in _as_list(params["mode"]):
            if mode not in ("one-way", "two-way"):
                problems.append(f"unknown mode {mode!r}")
    elif exp == "sdof":
        for mode in _as_list(params["mode"]):
            if mode not in ("one-way", "two-way"):
                problems.append(f"unknown mode {mode!r}")
    elif exp in ("blind-rate", "blind-secrecy"):
        for k2 in _as_list(params["k2"]):
            if k2 <= params["n_a"]:
                problems.append(f"k2={k2}: blind detection needs k2 > n_a (Eve gets nothing otherwise)")
        if exp == "blind-secrecy" and params["n_a"] != params["n_b"]:
            problems.append("blind-secrecy models full-stream transmission: need n_a == n_b")
    cells = 0 if problems else len(_make_cells(spec, params))
    return {"ok": not problems, "problems": problems, "cells": cells, "trials": trials}


# --- cell expansion and row generation ------------------------------------

def _make_cells(spec, params):
    exp = spec.experiment
    if exp == "concentration":
        return [{"ne": ne, "p_db": p} for ne in _as_list(params["ne"]) for p in _as_list(params["p_db"])]
    if exp == "ne-sweep":
        return [{"n_a": n_a, "metric": m} for n_a in _as_list(params["n_a"]) for m in ("fixed", "optimized")]
    if exp == "sca-convergence":
        return [{"n_a": n_a} for n_a in _as_list(params["n_a"])]
    if exp == "limit-check":
        return [{"ne": ne} for ne in _as_list(params["ne"])]
    if exp == "anece-bounds":
        return [{"mode": m, "k2": k2, "p_db": p}
                for m in _as_list(params["mode"])
                for k2 in _as_list(params["k2"])
                for p in _as_list(params["p_db"])]
    if exp == "sdof":
        return [{"mode": m, "k2": k2, "n_e": ne}
                for m in _as_list(params["mode"])
                for k2 in _as_list(params["k2"])
                for ne in _as_list(params["n_e"])]
    if exp == "blind-rate":
        return [{"k2": k2} for k2 in _as_list(params["k2"])]
    if exp == "blind-secrecy":
        return [{"ne": ne} for ne in _as_list(params["ne"])]
    raise ValueError(exp)


COLUMNS = {
    "concentration": ["experiment", "kind", "n_a", "n_b", "n_e", "r", "alpha", "delta", "rho",
                      "p_db", "a", "b", "trial", "value", "seed"],
    "ne-sweep": ["experiment", "metric", "n_a", "n_b", "n_e_star", "at_cap", "L",
                 "alpha", "delta", "rho", "p_db", "seed", "runtime_ms"],
    "sca-convergence": ["experiment", "kind", "n_a", "n_b", "n_e", "p_db", "epsilon", "trial",
                        "iterations", "iterations_best_r", "converged", "g_final",
                        "mean", "ci_lo", "ci_hi", "seed"],
    "limit-check": ["experiment", "n_a", "n_b", "n_e", "p_db", "alpha", "delta",
                    "rate_eve_asymptotic", "rate_eve_limit", "rel_gap", "seed"],
    "anece-bounds": ["experiment", "mode", "n_a", "n_b", "n_e", "k1", "k2", "p_db",
                     "lower", "upper", "se_lower", "se_upper", "trials", "seed"],
    "sdof": ["experiment", "mode", "n_a", "n_b", "n_e", "k2", "lower", "upper"],
    "blind-rate": ["experiment", "n_a", "n_b", "n_e", "k2", "p_db", "r_ae2", "r_ae_known_csi",
                   "trials_used", "trials_flagged", "seed"],
    "blind-secrecy": ["experiment", "n_a", "n_b", "n_e", "k2", "p_db", "r_ab_mean", "r_ae2",
                      "r_ae_known_csi", "secrecy_blind", "secrecy_known",
                      "trials_used", "trials_flagged", "seed"],
}


def _run_cell(spec, params, trials, index, cell):
    exp = spec.experiment
    seed = spec.seed
    if exp == "concentration":
        return _cell_concentration(params, trials, seed, cell)
    if exp == "ne-sweep":
        return _cell_ne_sweep(params, trials, seed, cell)
    if exp == "sca-convergence":
        return _cell_sca_convergence(params, trials, seed, cell)
    if exp == "limit-check":
        return _cell_limit(params, seed, cell)
    if exp == "anece-bounds":
        return _cell_anece(params, trials, seed, cell)
    if exp == "sdof":
        return _cell_sdof(params, cell)
    if exp == "blind-rate":
        return _cell_blind_rate(params, trials, seed, cell)
    if exp == "blind-secrecy":
        return _cell_blind_secrecy(params, trials, seed, cell)
    raise ValueError(exp)


def _cell_concentration(params, trials, seed, cell):
    ne, p_db = cell["ne"], cell["p_db"]
    n_a, n_b = params["n_a"], params["n_b"]
    cfg = NetworkConfig(n_a, n_b, ne, delta=params["delta"], alpha=params["alpha"], rho=params["rho"])
    pos = worst_case_eve_position(cfg)
    a, b = path_loss(pos, cfg)
    p_a = anece.db_to_linear(p_db)
    alloc = PowerAllocation(r=n_b, q_r=np.full(n_b, p_a / 2 / n_b), p_n=p_a / 2, p_b=p_a)
    echo = dict(experiment="concentration", n_a=n_a, n_b=n_b, n_e=ne, r=n_b,
                alpha=params["alpha"], delta=params["delta"], rho=params["rho"],
                p_db=p_db, a=a, b=b, seed=seed)
    rows = []
    for t in range(trials):
        ch = sample_channels(cfg, n_b, substream(seed, ne, int(p_db * 1000), t))
        rows.append({**echo, "kind": "mc", "trial": t, "value": exact_rate_eve(ch, alloc, a, b) / ne})
    rows.append({**echo, "kind": "asymptotic", "trial": -1,
                 "value": asymptotic_rate_eve_general(cfg, alloc, a, b) / ne})
    return rows


def _cell_ne_sweep(params, trials, seed, cell):
    n_a = cell["n_a"]
    n_b = n_a // 2
    p_cap = anece.db_to_linear(params["p_db"])
    cfg = NetworkConfig(n_a, n_b, 1, delta=params["delta"], alpha=params["alpha"], rho=params["rho"],
                        p_a_max=p_cap, p_b_max=p_cap)
    pos = worst_case_eve_position(cfg)
    t0 = time.perf_counter()
    if cell["metric"] == "fixed":
        res = max_tolerable_ne_fixed(cfg, pos)
        used = 0
    else:
        res = max_tolerable_ne_opt(cfg, pos, draws=trials, seed=seed)
        used = trials
    ms = 1000.0 * (time.perf_counter() - t0)
    return [dict(experiment="ne-sweep", metric=cell["metric"], n_a=n_a, n_b=n_b,
                 n_e_star=res.value, at_cap=int(res.at_cap), L=used,
                 alpha=params["alpha"], delta=params["delta"], rho=params["rho"],
                 p_db=params["p_db"], seed=seed, runtime_ms=ms)]


def _cell_sca_convergence(params, trials, seed, cell):
    n_a = cell["n_a"]
    n_b = n_a // 2
    ne = int(params["ne_factor"] * n_a)
    p_cap = anece.db_to_linear(params["p_db"])
    cfg = NetworkConfig(n_a, n_b, ne, delta=params["delta"], alpha=params["alpha"], rho=params["rho"],
                        p_a_max=p_cap, p_b_max=p_cap)
    pos = worst_case_eve_position(cfg)
    a, b = path_loss(pos, cfg)
    settings = ScaSettings(epsilon=params["epsilon"])
    echo = dict(experiment="sca-convergence", n_a=n_a, n_b=n_b, n_e=ne,
                p_db=params["p_db"], epsilon=params["epsilon"], seed=seed,
                mean="", ci_lo="", ci_hi="")
    rows = []
    iters = np.empty(trials)
    for t in range(trials):
        ch = sample_channels(cfg, n_b, substream(seed, n_a, t))
        res = optimize_powers(ch, cfg, a, b, settings)
        total = sum(res.iterations_by_r.values())
        iters[t] = total
        rows.append({**echo, "kind": "trial", "trial": t, "iterations": total,
                     "iterations_best_r": res.iterations_by_r.get(res.r, 0),
                     "converged": int(res.converged), "g_final": res.g})
    boot = substream(seed, n_a, 10**6)
    means = np.array([np.mean(boot.choice(iters, size=trials, replace=True)) for _ in range(2000)])
    lo, hi = np.percentile(means, [2.5, 97.5])
    rows.append({**echo, "kind": "summary", "trial": -1, "iterations": "",
                 "iterations_best_r": "", "converged": "", "g_final": "",
                 "mean": float(np.mean(iters)), "ci_lo": float(lo), "ci_hi": float(hi)})
    return rows


def _cell_limit(params, seed, cell):
    ne = cell["ne"]
    n_a, n_b = params["n_a"], params["n_b"]
    cfg = NetworkConfig(n_a, n_b, ne, delta=params["delta"], alpha=params["alpha"])
    pos = worst_case_eve_position(cfg)
    a, b = path_loss(pos, cfg)
    p_a = anece.db_to_linear(params["p_db"])
    p_s = p_n = p_a / 2
    rae = asymptotic_rate_eve_equal_power(cfg, p_s, p_n, p_a, a, b)
    lim = limit_rate_eve(cfg, p_s, a)
    return [dict(experiment="limit-check", n_a=n_a, n_b=n_b, n_e=ne, p_db=params["p_db"],
                 alpha=params["alpha"], delta=params["delta"],
                 rate_eve_asymptotic=rae, rate_eve_limit=lim,
                 rel_gap=abs(rae - lim) / lim if lim else 0.0, seed=seed)]


def _cell_anece(params, trials, seed, cell):
    cfg = anece.AneceConfig(
        n_a=params["n_a"], n_b=params["n_b"], n_e=params["n_e"], k1=params["k1"],
        k2=cell["k2"], p=anece.db_to_linear(cell["p_db"]), a=params["a"], b=params["b"],
        mc_trials=trials, seed=seed,
    )
    bounds = anece.secrecy_bounds(cfg, cell["mode"], trials, seed)
    return [dict(experiment="anece-bounds", mode=cell["mode"], n_a=cfg.n_a, n_b=cfg.n_b,
                 n_e=cfg.n_e, k1=cfg.k1, k2=cfg.k2, p_db=cell["p_db"],
                 lower=bounds.lower, upper=bounds.upper,
                 se_lower=bounds.se_lower, se_upper=bounds.se_upper,
                 trials=trials, seed=seed)]


def _cell_sdof(params, cell):
    lower, upper = anece.sdof_limits(params["n_a"], params["n_b"], cell["n_e"], cell["k2"], cell["mode"])
    return [dict(experiment="sdof", mode=cell["mode"], n_a=params["n_a"], n_b=params["n_b"],
                 n_e=cell["n_e"], k2=cell["k2"], lower=lower, upper=upper)]


def _cell_blind_rate(params, trials, seed, cell):
    cfg = blind.BlindConfig(n_a=params["n_a"], n_e=params["n_e"], k2=cell["k2"],
                            p=anece.db_to_linear(params["p_db"]), a=params["a"])
    res = blind.eve_blind_rate(cfg, trials, seed)
    return [dict(experiment="blind-rate", n_a=params["n_a"], n_b=params["n_b"], n_e=params["n_e"],
                 k2=cell["k2"], p_db=params["p_db"], r_ae2=res.r_ae2,
                 r_ae_known_csi=res.r_ae_known_csi, trials_used=res.trials_used,
                 trials_flagged=res.trials_flagged, seed=seed)]


def _cell_blind_secrecy(params, trials, seed, cell):
    ne = cell["ne"]
    n_a, n_b, k2 = params["n_a"], params["n_b"], params["k2"]
    p = anece.db_to_linear(params["p_db"])
    bcfg = blind.BlindConfig(n_a=n_a, n_e=ne, k2=k2, p=p, a=params["a"])
    res = blind.eve_blind_rate(bcfg, trials, seed)
    # informed-Bob rate on independent H draws; no jamming in phase 2
    ncfg = NetworkConfig(n_a, n_b, ne, p_a_max=p, p_b_max=0.0)
    alloc = PowerAllocation(r=n_b, q_r=np.full(n_b, p / n_a), p_n=0.0, p_b=0.0)
    r_ab = np.empty(trials)
    for t in range(trials):
        ch = sample_channels(ncfg, n_b, substream(seed, 999_000 + t))
        r_ab[t] = exact_rate_bob(ch, alloc, ncfg)
    r_ab_mean = float(np.mean(r_ab))
    return [dict(experiment="blind-secrecy", n_a=n_a, n_b=n_b, n_e=ne, k2=k2,
                 p_db=params["p_db"], r_ab_mean=r_ab_mean, r_ae2=res.r_ae2,
                 r_ae_known_csi=res.r_ae_known_csi,
                 secrecy_blind=max(0.0, r_ab_mean - res.r_ae2),
                 secrecy_known=max(0.0, r_ab_mean - res.r_ae_known_csi),
                 trials_used=res.trials_used, trials_flagged=res.trials_flagged, seed=seed)]


# --- execution and CSV ----------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _pool_entry(args):
    spec, params, trials, index, cell = args
    return index, _run_cell(spec, params, trials, index, cell)


def run(spec, workers=None):
    """Execute the experiment and write its CSV; returns the output path."""
    diag = validate(spec)
    if not diag["ok"]:
        raise ValueError("; ".join(diag["problems"]))
    params, trials = resolve(spec)
    cells = _make_cells(spec, params)
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    jobs = [(spec, params, trials, i, c) for i, c in enumerate(cells)]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_pool_entry, jobs))
    else:
        results = dict(map(_pool_entry, jobs))
    out = spec.out or f"{spec.experiment}.csv"
    columns = COLUMNS[spec.experiment]
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for i in range(len(cells)):
            for row in results[i]:
                writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return out
