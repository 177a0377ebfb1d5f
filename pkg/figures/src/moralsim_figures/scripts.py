"""Command-line wrappers: one script per figure, CSV in, SVG + PNG out.

Every script exits 0 on success, 2 on a schema or argument problem
(with a message naming the offending file or flag), and 1 on anything
unexpected.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import plots, schema


def _parser(prog: str, description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=prog, description=description)
    p.add_argument("--in", dest="infile", required=True, metavar="CSV",
                   help="simulator output CSV to plot")
    p.add_argument("--out", default=".", metavar="DIR",
                   help="directory for the rendered SVG and PNG")
    return p


def _save(fig, out_dir: str, stem: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for ext in ("svg", "png"):
        path = os.path.join(out_dir, f"{stem}.{ext}")
        fig.savefig(path, format=ext, dpi=150)
        written.append(path)
    return written


def _run(prog: str, render) -> int:
    try:
        for path in render():
            print(path)
        return 0
    except (schema.SchemaError, ValueError) as e:
        print(f"{prog}: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - defensive
        print(f"{prog}: {e}", file=sys.stderr)
        return 1


def coop_curves_main(argv=None) -> int:
    p = _parser("fig-coop-curves", "Cooperation-over-episodes curves from coop_by_type.csv")
    p.add_argument("--ma-window", type=int, default=500, help="smoothing window")
    p.add_argument("--by-type", action="store_true",
                   help="one line per agent type instead of per population")
    p.add_argument("--population", help="population to show with --by-type")
    args = p.parse_args(argv)

    def render():
        fig = plots.coop_curves(schema.load_coop(args.infile), args.ma_window,
                                by_type=args.by_type, population=args.population)
        stem = "coop_by_type" if args.by_type else "coop_curves"
        return _save(fig, args.out, stem)

    return _run(p.prog, render)


def outcome_curves_main(argv=None) -> int:
    p = _parser("fig-outcome-curves", "Social outcome curves from outcomes.csv")
    p.add_argument("--ma-window", type=int, default=500, help="smoothing window")
    args = p.parse_args(argv)

    def render():
        fig = plots.outcome_curves(schema.load_outcomes(args.infile), args.ma_window)
        return _save(fig, args.out, "outcome_curves")

    return _run(p.prog, render)


def popularity_main(argv=None) -> int:
    p = _parser("fig-popularity", "Type popularity bars from popularity.csv")
    args = p.parse_args(argv)

    def render():
        fig = plots.popularity_bars(schema.load_popularity(args.infile))
        return _save(fig, args.out, "popularity")

    return _run(p.prog, render)


def selection_heatmap_main(argv=None) -> int:
    p = _parser("fig-selection-heatmap", "Selection-count heatmap from selection_matrix.csv")
    p.add_argument("--population", help="population to show (default: first in file)")
    args = p.parse_args(argv)

    def render():
        matrices = schema.load_selection_matrix(args.infile)
        label = plots._pick_population(list(matrices), args.population)
        fig = plots.selection_heatmap(matrices, population=args.population)
        return _save(fig, args.out, f"selection_heatmap_{label}")

    return _run(p.prog, render)


def selection_network_main(argv=None) -> int:
    p = _parser("fig-selection-network",
                "Force-directed graph of the most frequent selections")
    p.add_argument("--population", help="population to show (default: first in file)")
    p.add_argument("--percentile", type=float, default=85.0,
                   help="keep edges strictly above this percentile of nonzero counts")
    args = p.parse_args(argv)

    def render():
        if not 0.0 <= args.percentile <= 100.0:
            raise ValueError(f"percentile must lie in [0, 100], got {args.percentile}")
        matrices = schema.load_selection_matrix(args.infile)
        label = plots._pick_population(list(matrices), args.population)
        fig = plots.selection_network(matrices, population=args.population,
                                      percentile=args.percentile)
        return _save(fig, args.out, f"selection_network_{label}")

    return _run(p.prog, render)


def reward_matrix_main(argv=None) -> int:
    p = _parser("fig-reward-matrix",
                "Game/intrinsic reward matrices from cumulative_rewards.csv")
    p.add_argument("--normalized", metavar="CSV",
                   help="optional cumulative_rewards_normalized.csv for the right panel")
    args = p.parse_args(argv)

    def render():
        normalized = (schema.load_normalized(args.normalized)
                      if args.normalized else None)
        fig = plots.reward_matrix(schema.load_cumulative(args.infile), normalized)
        return _save(fig, args.out, "reward_matrix")

    return _run(p.prog, render)
