"""Experiment configs, presets and the per-point computations behind the CLI.

A config is a plain dict::

    {"channel": {...}, "R": 120 | "auto", "beta": 1, "r_max": 15,
     "methods": ["greedy_margin", "greedy_ber", "analytic"],
     "completion": "secant", "sweep": {"psdnr_db": [...]} | {"R": [...]}}

Every point is a pure function of (config, seed), so points can run in any
order or process and still give identical rows.
"""
from __future__ import annotations

import copy
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np

from .analytic import solve_continuous
from .channel import SnrProfile, profile_from_config, target_bitrate
from .completion import complete_by_greedy, complete_by_root
from .greedy import Constraints, greedy_ber, greedy_margin
from .metrics import Allocation, dissimilarity, robustness_report
from .oracle import exhaustive


class ConfigError(ValueError):
    """Invalid or infeasible experiment config."""


METHODS = ("greedy_margin", "greedy_ber", "analytic", "oracle")
COMPLETIONS = ("secant", "bisection", "greedy_margin", "greedy_ber")
# the three methods compared pairwise in the summary, in label order A, B, C
PAIR_LABELS = {"greedy_margin": "A", "greedy_ber": "B", "analytic": "C"}

SUMMARY_COLUMNS = ["psdnr_db", "R", "beta", "seed", "method", "margin_db", "weighted_ber",
                   "iterations", "mu_AB", "mu_AC", "mu_BC"]

_LOADS_5 = [k / 100 for k in range(5, 100, 5)]
_LOADS_10 = [k / 100 for k in range(10, 100, 10)]

PRESETS: dict[str, dict[str, Any]] = {
    "fig2": {
        "kind": "secant_speed",
        "channel": {"type": "rayleigh", "n": 1024, "psdnr_db": 30.0},
        "beta": 1, "r_max": 15, "seeds": 20,
        "sweep": {"load": _LOADS_5},
    },
    "fig3": {
        "kind": "summary",
        "channel": {"type": "rayleigh", "n": 1024},
        "R": "auto", "beta": [1, 2], "r_max": 14,
        "methods": ["greedy_margin", "greedy_ber", "analytic"],
        "sweep": {"psdnr_db": [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]},
    },
    "fig4": {
        "kind": "completion",
        "channel": {"type": "rayleigh", "n": 1024, "psdnr_db": 30.0},
        "beta": 1, "r_max": 15, "seeds": 5,
        "sweep": {"load": _LOADS_10},
    },
    "fig6": {
        "kind": "summary",
        "channel": {"type": "multipath"},
        "R": "auto", "beta": 1, "r_max": 15,
        "methods": ["greedy_margin", "greedy_ber", "analytic"],
        "sweep": {"psdnr_db": [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0]},
    },
    "table1": {
        "kind": "summary",
        "channel": {"type": "rayleigh", "n": 20, "psdnr_db": 25.0},
        "R": 100, "beta": 1, "r_max": 10, "seeds": 50,
        "methods": ["greedy_margin", "greedy_ber", "analytic"],
        "sweep": {"seed": "seeds"},
    },
}


def preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name])


def resolve(cfg: dict, *, beta=None, r_max=None, methods=None) -> dict:
    """Apply CLI overrides and defaults, and validate."""
    cfg = copy.deepcopy(cfg)
    if not isinstance(cfg.get("channel"), dict):
        raise ConfigError("config needs a 'channel' object")
    cfg.setdefault("kind", "summary")
    if cfg["kind"] not in ("summary", "secant_speed", "completion"):
        raise ConfigError(f"unknown experiment kind {cfg['kind']!r}")
    if beta is not None:
        cfg["beta"] = beta
    if r_max is not None:
        cfg["r_max"] = r_max
    if methods is not None:
        cfg["methods"] = list(methods)
    cfg.setdefault("beta", 1)
    cfg.setdefault("r_max", 15)
    cfg.setdefault("R", "auto")
    cfg.setdefault("methods", ["greedy_margin", "greedy_ber", "analytic"])
    cfg.setdefault("completion", "secant")

    betas = cfg["beta"] if isinstance(cfg["beta"], list) else [cfg["beta"]]
    for b in betas:
        if b not in (1, 2):
            raise ConfigError("beta must be 1 or 2")
    r_max = cfg["r_max"]
    if not isinstance(r_max, int) or r_max < 2 or any(r_max % b for b in betas):
        raise ConfigError("r_max must be an integer >= 2 and a multiple of beta")
    if cfg["kind"] == "summary":
        if not cfg["methods"]:
            raise ConfigError("at least one method is required")
        bad = [m for m in cfg["methods"] if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown method(s) {bad}; choose from {list(METHODS)}")
    if cfg["completion"] not in COMPLETIONS:
        raise ConfigError(f"completion must be one of {list(COMPLETIONS)}")
    R = cfg["R"]
    if R != "auto" and (not isinstance(R, int) or R < 1):
        raise ConfigError("R must be a positive integer or 'auto'")
    sweep = cfg.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or len(sweep) != 1:
            raise ConfigError("sweep must have exactly one axis")
        axis = next(iter(sweep))
        if axis not in ("psdnr_db", "R", "load", "seed"):
            raise ConfigError(f"unknown sweep axis {axis!r}")
    return cfg


def _constraints(profile: SnrProfile, cfg: dict, beta: int, R) -> Constraints:
    r_max = cfg["r_max"]
    if R == "auto":
        R = target_bitrate(profile, r_max)
    R -= R % beta
    if R < beta:
        raise ConfigError(f"target rate {R} is below one step of {beta} bits")
    if R > profile.n * r_max:
        raise ConfigError(f"target rate {R} exceeds n*r_max = {profile.n * r_max}")
    return Constraints(R, beta, r_max)


def run_analytic(profile: SnrProfile, c: Constraints, completion: str = "secant"):
    """Continuous solution then integer completion; returns (allocation, iterations)."""
    positive = int(np.count_nonzero(profile.snr > 0))
    if c.target_rate >= c.cap * positive:
        # nothing to search: every usable channel sits at the cap
        bits = np.where(profile.snr > 0, c.cap, 0)
        if int(bits.sum()) != c.target_rate:
            raise ConfigError("target rate needs bits on zero-SNR channels")
        return c.allocation(bits), 0
    sol = solve_continuous(profile, c)
    if completion in ("secant", "bisection"):
        alloc, rep = complete_by_root(sol, c, completion)
    else:
        alloc, rep = complete_by_greedy(sol, c, profile, completion.split("_", 1)[1])
    return alloc, sol.iterations + rep.iterations


def run_method(method: str, profile: SnrProfile, c: Constraints, completion: str = "secant"):
    if method == "greedy_margin":
        alloc, trace = greedy_margin(profile, c)
        return alloc, len(trace)
    if method == "greedy_ber":
        alloc, trace = greedy_ber(profile, c)
        return alloc, len(trace)
    if method == "analytic":
        return run_analytic(profile, c, completion)
    if method == "oracle":
        try:
            res = exhaustive(profile, c, "margin_inverse")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        # smallest argmin in lexicographic order, so ties resolve the same way every run
        best = min(res.argmins, key=lambda a: a.tolist())
        return best, res.explored
    raise ConfigError(f"unknown method {method!r}")


def _mu(allocs: dict, x: str, y: str):
    if x in allocs and y in allocs:
        return dissimilarity(allocs[x], allocs[y])
    return None


def allocate_point(profile: SnrProfile, cfg: dict, beta: int, R) -> dict:
    """Run every configured method on one profile; returns allocations and summary rows."""
    c = _constraints(profile, cfg, beta, R)
    allocs: dict[str, Allocation] = {}
    iters: dict[str, int] = {}
    for m in cfg["methods"]:
        allocs[m], iters[m] = run_method(m, profile, c, cfg["completion"])
    labels = {PAIR_LABELS[m]: m for m in allocs if m in PAIR_LABELS}
    mus = {
        f"mu_{x}{y}": _mu(allocs, labels.get(x, ""), labels.get(y, ""))
        for x, y in (("A", "B"), ("A", "C"), ("B", "C"))
    }
    psdnr = profile.psdnr_db()
    rows, reports = [], {}
    for m, alloc in allocs.items():
        rep = robustness_report(alloc, profile)
        reports[m] = {**rep.to_json(), "iterations": iters[m], "bits": alloc.tolist()}
        rows.append({
            "psdnr_db": psdnr, "R": c.target_rate, "beta": beta,
            "seed": profile.meta.get("seed"), "method": m,
            "margin_db": rep.system_margin_db, "weighted_ber": rep.weighted_ber,
            "iterations": iters[m], **mus,
        })
    return {"allocations": allocs, "rows": rows, "reports": reports,
            "dissimilarity": mus, "R": c.target_rate}


def channel_at(cfg: dict, axis: str | None, value, seed: int) -> tuple[SnrProfile, int]:
    ch = dict(cfg["channel"])
    if axis == "psdnr_db":
        ch["psdnr_db"] = float(value)
    if axis == "seed":
        seed = int(value)
    if ch.get("type") == "rayleigh" and "psdnr_db" not in ch:
        raise ConfigError("rayleigh channel needs psdnr_db (or a psdnr_db sweep)")
    return profile_from_config(ch, seed=seed), seed


def sweep_points(cfg: dict, seed: int) -> list[tuple]:
    """The ordered list of (beta, axis, value) points of a sweep."""
    betas = cfg["beta"] if isinstance(cfg["beta"], list) else [cfg["beta"]]
    sweep = cfg.get("sweep") or {}
    if not sweep:
        return [(b, None, None) for b in betas]
    axis, values = next(iter(sweep.items()))
    if axis == "seed" and values == "seeds":
        values = [seed + k for k in range(int(cfg.get("seeds", 1)))]
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep values must be a non-empty list")
    return [(b, axis, v) for b in betas for v in values]


def _summary_point(args):
    cfg, seed, beta, axis, value = args
    profile, _ = channel_at(cfg, axis, value, seed)
    R = value if axis == "R" else cfg["R"]
    if axis == "load":
        R = int(round(value * profile.n * cfg["r_max"]))
    return allocate_point(profile, cfg, beta, R)["rows"]


def _speed_point(args):
    cfg, seed, beta, _, load = args
    gen, plain, greedy = [], [], []
    R = None
    for k in range(int(cfg.get("seeds", 1))):
        profile, _ = channel_at(cfg, None, None, seed + k)
        R = int(round(load * profile.n * cfg["r_max"]))
        c = _constraints(profile, cfg, beta, R)
        gen.append(solve_continuous(profile, c).iterations)
        plain.append(solve_continuous(profile, c, shape="identity", max_iter=10000).iterations)
        greedy.append(len(greedy_margin(profile, c)[1]))
    return [{"R": c.target_rate, "gen_secant_iters": float(np.mean(gen)),
             "secant_iters": float(np.mean(plain)), "greedy_iters": float(np.mean(greedy))}]


def _completion_point(args):
    cfg, seed, beta, _, load = args
    bis, sec, steps, g0 = [], [], [], []
    R = None
    for k in range(int(cfg.get("seeds", 1))):
        profile, _ = channel_at(cfg, None, None, seed + k)
        R = int(round(load * profile.n * cfg["r_max"]))
        c = _constraints(profile, cfg, beta, R)
        sol = solve_continuous(profile, c)
        bis.append(complete_by_root(sol, c, "bisection")[1].iterations)
        sec.append(complete_by_root(sol, c, "secant")[1].iterations)
        rep = complete_by_greedy(sol, c, profile, "margin")[1]
        steps.append(rep.iterations)
        g0.append(rep.residual_bits)
    return [{"R": c.target_rate, "bisection_iters": float(np.mean(bis)),
             "secant_iters": float(np.mean(sec)), "greedy_iters": float(np.mean(steps)),
             "g0": float(np.mean(g0))}]


COLUMNS = {
    "summary": SUMMARY_COLUMNS,
    "secant_speed": ["R", "gen_secant_iters", "secant_iters", "greedy_iters"],
    "completion": ["R", "bisection_iters", "secant_iters", "greedy_iters", "g0"],
}
_WORKERS = {"summary": _summary_point, "secant_speed": _speed_point,
            "completion": _completion_point}


def run_sweep(cfg: dict, seed: int, jobs: int = 1) -> tuple[list[str], list[dict]]:
    """All rows of a sweep in sweep order, whatever the completion order of points."""
    kind = cfg["kind"]
    if kind != "summary" and not (cfg.get("sweep") and "load" in cfg["sweep"]):
        raise ConfigError(f"{kind} experiments sweep over 'load'")
    work = [(cfg, seed, b, axis, v) for b, axis, v in sweep_points(cfg, seed)]
    fn = _WORKERS[kind]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(fn, work))
    else:
        chunks = [fn(w) for w in work]
    rows = [row for chunk in chunks for row in chunk]
    return COLUMNS[kind], rows


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise FloatingPointError(f"non-finite value {value} in output")
        return repr(value)
    return str(value)
