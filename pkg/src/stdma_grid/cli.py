"""Command line entry point: one subcommand per experiment, plus ``all`` and
``cell-grid``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time

from .cellgrid import ingest_general_graph
from .coloring import search_basis
from .errors import StdmaError
from .experiments import EXPERIMENTS, load_config, resolve_config, run_experiment

log = logging.getLogger("stdma_grid")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML or JSON experiment config")
    p.add_argument("--seed", type=int, help="base seed (overrides the config)")
    p.add_argument("--out-dir", default="results", help="output directory (default: results)")
    p.add_argument("--full-scale", action="store_true", help="use the full-size sweeps (601 x 601 square, 100 seeds)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
    p.add_argument("--no-svg", action="store_true", help="skip SVG plots")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stdma-grid", description="Delay-aware STDMA scheduling experiments on grid networks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for exp in EXPERIMENTS:
        _add_run_flags(sub.add_parser(exp, help=f"run the {exp} experiment"))
    p = sub.add_parser("all", help="run every experiment with its defaults")
    _add_run_flags(p)
    p = sub.add_parser("cell-grid", help="map a point cloud onto a colored cell grid")
    p.add_argument("points", help="CSV file of x,y rows")
    p.add_argument("--width", type=float, default=1.0, help="cell width")
    p.add_argument("--range", type=float, dest="tx_range", help="transmission range (width must not exceed it)")
    p.add_argument("--R", type=float, default=1.0, help="radio range in cells for the cell coloring")
    p.add_argument("--h", type=int, default=3)
    p.add_argument("--allow-empty", action="store_true", help="accept empty cells")
    p.add_argument("--out", help="write per-point cell and slot CSV here (default: stdout)")
    return ap


def _run(args, exp: str) -> int:
    doc = load_config(args.config) if args.config else {}
    if args.command == "all":
        doc = {}
    cfg = resolve_config(doc, exp, full_scale=args.full_scale, seed=args.seed)
    t = time.time()
    paths = run_experiment(cfg, args.out_dir, threads=args.threads, svg=not args.no_svg)
    log.info("%s done in %.1fs", exp, time.time() - t)
    for p in paths:
        print(p)
    return 0


def _cell_grid(args) -> int:
    m = ingest_general_graph(args.points, args.width, args.tx_range, require_full=not args.allow_empty)
    basis = search_basis(args.h, args.R, 10_000)
    slots = m.point_slots(basis)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["point", "x", "y", "cell_x", "cell_y", "color", "slot", "representative"])
        for k, (x, y) in enumerate(m.points):
            c = m.cell_of(k)
            w.writerow([k, x, y, c[0], c[1], basis.color_of(c), slots[k], m.representative(c) == k])
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"cells={len(m.cells)} colors={basis.n_colors} cycle={m.cycle_length(basis)}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "cell-grid":
            return _cell_grid(args)
        if args.command == "all":
            for exp in EXPERIMENTS:
                _run(args, exp)
            return 0
        return _run(args, args.command)
    except (StdmaError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
