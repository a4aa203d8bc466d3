"""Experiment configs and deterministic runners writing CSV (and SVG) files.

A config is a YAML or JSON mapping::

    schema: stdma-grid/experiment/1
    experiment: irco-ndr
    network: {shape: disk, radius: 60}
    R: [2, 3, 4, 5]
    seed: 0
    seeds: 20          # count from ``seed``, or an explicit list
    sources: 50

Missing keys fall back to per-experiment defaults. Every CSV row carries the
config hash and the seed it was produced with; reruns are byte-identical.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from . import analysis
from .coloring import PUBLISHED_BASES, VcmBasis, conflict_free, published_basis, search_basis
from .domtree import reachable_counts, template_for
from .errors import ConfigError, InfeasibleError
from .grid import GridNetwork, Node
from .highways import build_highways, compute_lambda
from .routing import delays_to_sink, greedy_route
from .schedule import Schedule, build_cycle_plan, irco_order, normalized_delay_per_range
from .sinr import SinrParams, vcmpp_search
from .svg import write_plot

SCHEMA = "stdma-grid/experiment/1"
EXPERIMENTS = ("vcm-table", "irco-ndr", "orchid-cycle", "energy-ratio", "reachable-aggregators", "ndr-model", "vcmpp")

_HALF_STEPS = [2 + k / 2 for k in range(11)]  # 2, 2.5, ..., 7

DEFAULTS = {
    "vcm-table": {"R": [2, 3, 4, 5], "h": 3, "det_bound": 400},
    "irco-ndr": {
        "network": {"shape": "disk", "radius": 60},
        "R": _HALF_STEPS,
        "h": 3,
        "seeds": 20,
        "sources": 50,
    },
    "orchid-cycle": {"network": {"shape": "disk", "radius": 300}, "R": [2, 3, 4, 5], "h": 3},
    "energy-ratio": {
        "network": {"shape": "disk", "radius": 60},
        "R": [2, 3, 4, 5],
        "h": 3,
        "seeds": 20,
        "model_R": [2, 3, 4, 5, 6, 7, 8],
        "model_L": 1000,
    },
    "reachable-aggregators": {"network": {"shape": "disk", "radius": 300}, "R": [2, 3, 4, 4.5], "h": 3},
    "ndr-model": {"ns": [100, 300, 1000, 3000], "draws": 100000, "h": 3, "alpha_c": 1.0, "seeds": 1,
                  "integer": False, "cdf_n": 1000, "cdf_points": 200},
    "vcmpp": {
        "params": [
            {"P": 1.0, "N": 1e-4, "alpha": 4.0, "beta": 1.0},
            {"P": 1.0, "N": 1e-6, "alpha": 4.0, "beta": 0.5},
            {"P": 1.0, "N": 1e-3, "alpha": 4.0, "beta": 5.0},
        ],
        "det_bound": 80,
        "box": 6,
    },
}

# full-size sweeps, only used with --full-scale
FULL_SCALE = {
    "irco-ndr": {"network": {"shape": "square", "side": 601}, "R": [1 + k / 4 for k in range(25)], "seeds": 100, "sources": 100},
    "energy-ratio": {"network": {"shape": "disk", "radius": 300}, "seeds": 60},
    "ndr-model": {"draws": 1000000},
}

COMMON_KEYS = {"schema", "experiment", "seed", "output"}


# ---------------------------------------------------------------- config

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return doc


def resolve_config(doc: dict | None = None, experiment: str | None = None, *, full_scale: bool = False,
                   seed: int | None = None) -> dict:
    """Defaults, then full-scale overrides, then ``doc``, then ``seed``; validated."""
    doc = dict(doc or {})
    exp = doc.get("experiment", experiment)
    if experiment is not None and exp != experiment:
        raise ConfigError(f"config is for {exp!r}, not {experiment!r}")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; expected one of {', '.join(EXPERIMENTS)}")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA!r}")
    unknown = set(doc) - set(DEFAULTS[exp]) - COMMON_KEYS
    if unknown:
        raise ConfigError(f"unknown keys for {exp}: {', '.join(sorted(unknown))}")
    cfg = _merge({"schema": SCHEMA, "experiment": exp, "seed": 0}, DEFAULTS[exp])
    if full_scale:
        cfg = _merge(cfg, FULL_SCALE.get(exp, {}))
    cfg = _merge(cfg, doc)
    if seed is not None:
        cfg["seed"] = seed
    validate(cfg)
    return cfg


def _nonempty_list(cfg, key):
    v = cfg.get(key)
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{key} must be a non-empty list")
    return v


def validate(cfg: dict) -> None:
    exp = cfg["experiment"]
    out = cfg.get("output")
    if out is not None and not (isinstance(out, dict) and set(out) <= {"stem"} and isinstance(out.get("stem", ""), str)):
        raise ConfigError("output must be a mapping with an optional 'stem' string")
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool) or cfg["seed"] < 0:
        raise ConfigError("seed must be a nonnegative integer")
    if "R" in cfg:
        for R in _nonempty_list(cfg, "R"):
            if not isinstance(R, (int, float)) or isinstance(R, bool) or not R >= 1:
                raise ConfigError(f"radio range must be a number >= 1, got {R!r}")
    if "h" in cfg and (not isinstance(cfg["h"], int) or cfg["h"] < 1):
        raise ConfigError("h must be a positive integer")
    if "seeds" in cfg:
        s = cfg["seeds"]
        if isinstance(s, bool) or not (isinstance(s, int) and s >= 1 or isinstance(s, list) and s and all(isinstance(x, int) and x >= 0 for x in s)):
            raise ConfigError("seeds must be a positive count or a non-empty list of nonnegative integers")
    if "network" in cfg:
        net = cfg["network"]
        shape = net.get("shape") if isinstance(net, dict) else None
        if shape == "disk":
            if not isinstance(net.get("radius"), (int, float)) or net["radius"] <= 0:
                raise ConfigError("disk network needs a positive radius")
        elif shape == "square":
            if not isinstance(net.get("side"), int) or net["side"] < 1:
                raise ConfigError("square network needs a positive integer side")
        else:
            raise ConfigError("network.shape must be 'disk' or 'square'")
    if exp == "irco-ndr" and not (cfg["sources"] == "all" or isinstance(cfg["sources"], int) and cfg["sources"] >= 0):
        raise ConfigError("sources must be a nonnegative integer or 'all'")
    if exp == "ndr-model":
        for n in _nonempty_list(cfg, "ns"):
            if not isinstance(n, int) or n < 1:
                raise ConfigError(f"model range must be a positive integer, got {n!r}")
        if not isinstance(cfg["draws"], int) or cfg["draws"] < 1:
            raise ConfigError("draws must be a positive integer")
    if exp == "energy-ratio":
        _nonempty_list(cfg, "model_R")
        if not cfg["model_L"] > 0:
            raise ConfigError("model_L must be positive")
    if exp == "vcmpp":
        for p in _nonempty_list(cfg, "params"):
            try:
                SinrParams(**p)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"bad SINR parameters {p!r}: {e}") from None


def seed_list(cfg: dict) -> list[int]:
    s = cfg.get("seeds", 1)
    if isinstance(s, list):
        return [int(x) for x in s]
    return [cfg["seed"] + k for k in range(s)]


def config_hash(cfg: dict) -> str:
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# ---------------------------------------------------------------- helpers

@lru_cache(maxsize=None)
def basis_for(R, h: int = 3, det_bound: int = 2000) -> VcmBasis:
    """Published basis when one exists for (h, R), else the searched one."""
    if h == 3 and R == int(R) and int(R) in PUBLISHED_BASES:
        return published_basis(int(R))
    return search_basis(h, R, det_bound)


@lru_cache(maxsize=4)
def _network(shape: str, size, R) -> GridNetwork:
    if shape == "disk":
        return GridNetwork.disk(size, R)
    return GridNetwork.square(size, R)


def network_for(cfg: dict, R) -> GridNetwork:
    net = cfg["network"]
    size = net["radius"] if net["shape"] == "disk" else net["side"]
    return _network(net["shape"], size, R)


def outer_radius(cfg: dict) -> float:
    net = cfg["network"]
    return float(net["radius"]) if net["shape"] == "disk" else net["side"] // 2


def _max_distance(net: GridNetwork, sink: Node) -> float:
    xy = net.coords() - np.asarray(sink)
    return float(np.sqrt((xy**2).sum(axis=1).max()))


def _vec(v) -> str:
    return json.dumps(list(v))


def run_ordered(fn: Callable, tasks: list, threads: int = 1) -> list:
    """``[fn(t) for t in tasks]``, possibly on a thread pool; order is kept."""
    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


# ---------------------------------------------------------------- runners
# each runner returns {file stem: (header, rows)} plus optional plot series

def _vcm_table(cfg, threads):
    h = cfg["h"]

    def point(R):
        rows = []
        if h == 3 and R == int(R) and int(R) in PUBLISHED_BASES:
            b = published_basis(int(R))
            rows.append([R, h, "published", _vec(b.u1), _vec(b.u2), b.n_colors, b.is_valid(), conflict_free(b)])
        b = search_basis(h, R, cfg["det_bound"])
        rows.append([R, h, "searched", _vec(b.u1), _vec(b.u2), b.n_colors, b.is_valid(), conflict_free(b)])
        return rows

    rows = [r for part in run_ordered(point, cfg["R"], threads) for r in part]
    header = ["R", "h", "source", "u1", "u2", "n_colors", "valid", "conflict_free"]
    return {"": (header, rows)}, None


def _pick_sources(net: GridNetwork, dst: Node, L: float, count, seed: int) -> list[int]:
    xy = net.coords() - np.asarray(dst)
    d = np.sqrt((xy**2).sum(axis=1))
    cand = np.flatnonzero((d >= 0.9 * L) & (d <= L))
    if count == "all" or count >= len(cand):
        return [int(i) for i in cand]
    rng = np.random.default_rng([seed, 1])
    return sorted(int(i) for i in rng.choice(cand, count, replace=False))


def _irco_ndr(cfg, threads):
    h = cfg["h"]
    L = outer_radius(cfg)
    dst = (0, 0)
    tasks = [(R, s) for R in cfg["R"] for s in seed_list(cfg)]

    def point(task):
        R, seed = task
        b = basis_for(R, h)
        net = network_for(cfg, R)
        sch = Schedule(b.color_of, irco_order(b.n_colors, seed))
        srcs = _pick_sources(net, dst, L, cfg["sources"], seed)
        if not srcs:
            return []
        D = delays_to_sink(net, sch, dst)
        rows = []
        for i in srcs:
            s = net.nodes[i]
            g = greedy_route(s, dst, net, sch)
            rows.append([
                R, seed, b.n_colors, s[0], s[1], round(math.hypot(*s), 9),
                int(D[i]), normalized_delay_per_range(int(D[i]), s, dst, R),
                g.route_delay, normalized_delay_per_range(g.route_delay, s, dst, R), g.hops,
            ])
        return rows

    rows = [r for part in run_ordered(point, tasks, threads) for r in part]
    header = ["R", "seed", "n_colors", "src_x", "src_y", "distance", "sp_delay", "sp_ndr", "greedy_delay", "greedy_ndr", "greedy_hops"]
    series = {"shortest-delay path": [], "greedy": []}
    for R in cfg["R"]:
        sel = [r for r in rows if r[0] == R]
        if sel:
            series["shortest-delay path"].append((R, float(np.mean([r[7] for r in sel]))))
            series["greedy"].append((R, float(np.mean([r[9] for r in sel]))))
    return {"": (header, rows)}, ("normalized delay per range", "radio range", "NDR", series)


def orchid_plan(basis: VcmBasis, max_distance: float, optimize: bool = True):
    tree, order = template_for(basis)
    hws = build_highways((0, 0), basis)
    lam = compute_lambda(basis, max_distance)
    return build_cycle_plan(order.slot_map, hws, lam, optimize), hws


def _orchid_cycle(cfg, threads):
    h = cfg["h"]
    sink = (0, 0)

    def point(R):
        b = basis_for(R, h)
        net = network_for(cfg, R)
        md = _max_distance(net, sink)
        opt, _ = orchid_plan(b, md, True)
        raw, _ = orchid_plan(b, md, False)
        est = analysis.cycle_length_estimate(h, R, md / R)
        return [R, _vec(b.u1), _vec(b.u2), b.n_colors, opt.highway_slots, raw.highway_slots, opt.lam,
                opt.total_slots, raw.total_slots, round(est, 6)]

    rows = run_ordered(point, cfg["R"], threads)
    header = ["R", "u1", "u2", "n_colors", "highway_slots_opt", "highway_slots_raw", "lambda", "total_opt", "total_raw", "estimate"]
    series = {"ORCHID (optimized)": [(r[0], r[7]) for r in rows], "estimate": [(r[0], r[9]) for r in rows]}
    return {"": (header, rows)}, ("global cycle length", "radio range", "slots", series)


def _energy_ratio(cfg, threads):
    h = cfg["h"]
    sink = (0, 0)
    tasks = [(R, s) for R in cfg["R"] for s in seed_list(cfg)]

    def point(task):
        R, seed = task
        b = basis_for(R, h)
        net = network_for(cfg, R)
        plan, hws = orchid_plan(b, _max_distance(net, sink), True)
        cyc = analysis.cycles_to_sink(net, Schedule(b.color_of, irco_order(b.n_colors, seed)), sink)
        rep = analysis.simulated_energy(plan, net, b, hws, cyc)
        return ["simulated", R, seed, cyc, plan.lam, rep.E_irco, rep.E_orchid, rep.ratio, rep.asymptotic_ratio]

    rows = run_ordered(point, tasks, threads)
    for R in cfg["model_R"]:
        rep = analysis.energy_models(h, R, cfg["model_L"])
        rows.append(["model", R, cfg["seed"], "", "", rep.E_irco, rep.E_orchid, rep.ratio, rep.asymptotic_ratio])
    header = ["kind", "R", "seed", "irco_cycles", "lambda", "E_irco", "E_orchid", "ratio", "asymptotic_ratio"]
    series = {"simulated ratio": [], "model asymptotic ratio": []}
    for R in cfg["R"]:
        sel = [r[7] for r in rows if r[0] == "simulated" and r[1] == R]
        series["simulated ratio"].append((R, float(np.mean(sel))))
    series["model asymptotic ratio"] = [(r[1], r[8]) for r in rows if r[0] == "model"]
    return {"": (header, rows)}, ("ORCHID / IRCO energy", "radio range", "ratio", series)


def _reachable(cfg, threads):
    h = cfg["h"]

    def point(R):
        b = basis_for(R, h)
        net = network_for(cfg, R)
        tree, order = template_for(b)
        c = reachable_counts(net, tree, order)
        return [R, _vec(b.u1), _vec(b.u2), b.n_colors, len(net), float(c.mean()), int(c.min()), int(c.max())]

    rows = run_ordered(point, cfg["R"], threads)
    header = ["R", "u1", "u2", "n_colors", "nodes", "mean_reachable", "min_reachable", "max_reachable"]
    series = {"mean reachable aggregators": [(r[0], r[5]) for r in rows]}
    return {"": (header, rows)}, ("aggregators reachable in one cycle", "radio range", "aggregators", series)


def _ndr_model(cfg, threads):
    h, a = cfg["h"], cfg["alpha_c"]
    tasks = [(n, s) for n in cfg["ns"] for s in seed_list(cfg)]

    def point(task):
        n, seed = task
        p = analysis.NdrModelParams.bind_vcm(n, h, a)
        smp = analysis.ndr_monte_carlo(p, cfg["draws"], seed, integer=cfg["integer"])
        cf = analysis.ndr_closed_form(p)
        slope, _ = analysis.exponential_fit(smp)
        return [n, seed, cfg["draws"], "integer" if cfg["integer"] else "real", smp.mean,
                analysis.ndr_exact_mean(p), cf, (smp.mean - cf) / cf, slope, -p.rate, analysis.cdf_gap(smp)]

    rows = run_ordered(point, tasks, threads)
    header = ["n", "seed", "draws", "colors", "mc_mean", "exact_mean", "closed_form", "rel_err", "fit_slope", "model_slope", "cdf_gap"]

    n = cfg["cdf_n"]
    p = analysis.NdrModelParams.bind_vcm(n, h, a)
    smp = analysis.ndr_monte_carlo(p, cfg["draws"], cfg["seed"], integer=cfg["integer"])
    xs = np.quantile(smp.values, np.linspace(0.0, 0.995, cfg["cdf_points"]))
    cdf_rows = []
    for x in xs:
        emp = float(smp.log_survival(x)[()])
        mod = float(np.log1p(-analysis.ndr_closed_cdf(p, x))) if x >= p.shift else 0.0
        cdf_rows.append([n, cfg["seed"], float(x), emp, mod])
    files = {
        "": (header, rows),
        "-cdf": (["n", "seed", "x", "log_survival_empirical", "log_survival_model"], cdf_rows),
    }
    series = {"simulated": [(r[2], r[3]) for r in cdf_rows], "shifted exponential": [(r[2], r[4]) for r in cdf_rows]}
    return files, ("log(1 - F(x))", "x", "log(1 - F)", series)


def _vcmpp(cfg, threads):
    def point(pd):
        p = SinrParams(**pd)
        try:
            r = vcmpp_search(p, cfg["det_bound"], cfg["box"])
        except InfeasibleError:
            return [p.P, p.N, p.alpha, p.beta, "infeasible", "", "", "", "", ""]
        return [p.P, p.N, p.alpha, p.beta, "ok", _vec(r.basis[0]), _vec(r.basis[1]), r.D2, r.n_colors, r.score]

    rows = run_ordered(point, cfg["params"], threads)
    header = ["P", "N", "alpha", "beta", "status", "u1", "u2", "D2", "n_colors", "score"]
    return {"": (header, rows)}, None


RUNNERS = {
    "vcm-table": _vcm_table,
    "irco-ndr": _irco_ndr,
    "orchid-cycle": _orchid_cycle,
    "energy-ratio": _energy_ratio,
    "reachable-aggregators": _reachable,
    "ndr-model": _ndr_model,
    "vcmpp": _vcmpp,
}


def csv_text(header: list, rows: list, chash: str, default_seed: int) -> str:
    """CSV with ``config_hash`` and ``seed`` provenance columns."""
    buf = io.StringIO()
    w = csv.writer(buf)
    has_seed = "seed" in header
    w.writerow(list(header) + ["config_hash"] + ([] if has_seed else ["seed"]))
    for r in rows:
        w.writerow(list(r) + [chash] + ([] if has_seed else [default_seed]))
    return buf.getvalue()


def run_experiment(cfg: dict, out_dir=".", threads: int = 1, svg: bool = True) -> list[Path]:
    """Run a resolved config and write its files; returns the paths written."""
    validate(cfg)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)
    files, plot = RUNNERS[cfg["experiment"]](cfg, max(1, int(threads)))
    stem = (cfg.get("output") or {}).get("stem", cfg["experiment"])
    written = []
    for suffix, (header, rows) in files.items():
        path = out_dir / f"{stem}{suffix}.csv"
        with open(path, "w", newline="") as fh:
            fh.write(csv_text(header, rows, chash, cfg["seed"]))
        written.append(path)
    if svg and plot is not None:
        title, xl, yl, series = plot
        path = out_dir / f"{stem}.svg"
        write_plot(path, series, title=title, xlabel=xl, ylabel=yl)
        written.append(path)
    return written
