"""Figure builders: already-validated frames in, matplotlib Figures out.

Everything is drawn on explicitly constructed Figure objects, so no
global pyplot state or GUI backend is involved.  The only computations
performed here are trailing-window smoothing and the percentile edge
filter; all simulation quantities come straight from the CSVs.
"""

from __future__ import annotations

import networkx as nx
import numpy as np
import pandas as pd
from matplotlib.figure import Figure

from .palette import (
    POPULATION_LABELS,
    TYPE_COLORS,
    TYPE_LABELS,
    agent_types_for_label,
    population_color,
)


def smooth(values, window: int) -> np.ndarray:
    """Trailing mean over the last ``window`` points, length preserved."""
    x = np.asarray(values, dtype=float)
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if window == 1 or len(x) == 0:
        return x
    c = np.cumsum(x)
    out = np.empty_like(x)
    head = min(window, len(x))
    out[:head] = c[:head] / np.arange(1, head + 1)
    if len(x) > window:
        out[window:] = (c[window:] - c[:-window]) / window
    return out


def top_edges(matrix, percentile: float = 85.0) -> list[tuple[int, int, float]]:
    """(selector, selected, weight) for counts strictly above the given
    percentile of the nonzero entries; an all-zero matrix has no edges."""
    m = np.asarray(matrix, dtype=float)
    nonzero = m[m > 0]
    if nonzero.size == 0:
        return []
    threshold = np.percentile(nonzero, percentile)
    return [(int(i), int(j), float(m[i, j])) for i, j in np.argwhere(m > threshold)]


def _ordered_populations(seen) -> list[str]:
    seen = list(dict.fromkeys(seen))
    known = [l for l in POPULATION_LABELS if l in seen]
    return known + [l for l in seen if l not in known]


def _pick_population(available, requested: str | None) -> str:
    if requested is not None:
        if requested not in available:
            raise ValueError(
                f"population {requested!r} not in file; present: "
                f"{', '.join(map(str, available))}")
        return requested
    return _ordered_populations(available)[0]


def coop_curves(df: pd.DataFrame, ma_window: int = 500, by_type: bool = False,
                population: str | None = None) -> Figure:
    """Cooperation over episodes: one line per population, or one line
    per agent type within a single population."""
    fig = Figure(figsize=(8, 4.5))
    ax = fig.subplots()
    if by_type:
        label = _pick_population(df["population"].unique(), population)
        part = df[df["population"] == label].sort_values("episode")
        for t in TYPE_LABELS:
            series = part[f"coop_{t}"]
            if series.isna().all():
                continue
            ax.plot(part["episode"], smooth(series, ma_window),
                    color=TYPE_COLORS[t], label=t, linewidth=1.2)
        ax.set_title(f"cooperation by agent type, {label}")
    else:
        for label in _ordered_populations(df["population"]):
            part = df[df["population"] == label].sort_values("episode")
            ax.plot(part["episode"], smooth(part["coop_all"], ma_window),
                    color=population_color(label), label=label, linewidth=1.2)
        ax.set_title("population cooperation")
    ax.set_xlabel("episode")
    ax.set_ylabel("fraction of actions cooperating")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8, ncol=3, frameon=False)
    fig.tight_layout()
    return fig


def outcome_curves(df: pd.DataFrame, ma_window: int = 500) -> Figure:
    """Collective, equality and minimum reward per episode."""
    fig = Figure(figsize=(8, 7.5))
    axes = fig.subplots(3, 1, sharex=True)
    measures = (("r_collective", "collective reward"),
                ("r_gini", "equality (Gini-style) reward"),
                ("r_min", "minimum reward"))
    for ax, (col, title) in zip(axes, measures):
        for label in _ordered_populations(df["population"]):
            part = df[df["population"] == label].sort_values("episode")
            ax.plot(part["episode"], smooth(part[col], ma_window),
                    color=population_color(label), label=label, linewidth=1.2)
        ax.set_ylabel(title)
    axes[-1].set_xlabel("episode")
    axes[0].legend(fontsize=8, ncol=3, frameon=False)
    fig.tight_layout()
    return fig


def popularity_bars(df: pd.DataFrame) -> Figure:
    """Share of selections received by each type, with confidence
    intervals and a 50% reference line for the majority share."""
    populations = _ordered_populations(df["population"])
    fig = Figure(figsize=(max(6.0, 1.1 * len(populations) + 2), 4.5))
    ax = fig.subplots()
    width = 0.8 / len(TYPE_LABELS)
    for ti, t in enumerate(TYPE_LABELS):
        xs, ys, errs = [], [], []
        for pi, label in enumerate(populations):
            row = df[(df["population"] == label) & (df["type"] == t)]
            if row.empty:
                continue
            mean = float(row["mean"].iloc[0])
            xs.append(pi + (ti - (len(TYPE_LABELS) - 1) / 2) * width)
            ys.append(mean)
            errs.append((mean - float(row["ci_low"].iloc[0]),
                         float(row["ci_high"].iloc[0]) - mean))
        if xs:
            # plain lists; ndarray rows trip a scalar-conversion
            # deprecation inside errorbar for single-bar groups
            ax.bar(xs, ys, width=width, color=TYPE_COLORS[t], label=t,
                   yerr=np.transpose(errs).tolist(),
                   error_kw={"linewidth": 0.8})
    ax.axhline(0.5, color="black", linestyle="--", linewidth=0.8, label="50%")
    ax.set_xticks(range(len(populations)))
    ax.set_xticklabels(populations, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("share of selections received")
    ax.set_title("type popularity, final episodes")
    ax.legend(fontsize=8, ncol=5, frameon=False)
    fig.tight_layout()
    return fig


def _node_names(label: str, n: int) -> list[str]:
    types = agent_types_for_label(label, n)
    if types is None:
        return [str(i) for i in range(n)]
    return [f"{t}{i}" for i, t in enumerate(types)]


def selection_heatmap(matrices: dict[str, np.ndarray],
                      population: str | None = None) -> Figure:
    """Who picked whom, selector rows against selected columns."""
    label = _pick_population(list(matrices), population)
    m = matrices[label]
    names = _node_names(label, m.shape[0])
    fig = Figure(figsize=(7, 6))
    ax = fig.subplots()
    image = ax.imshow(m, cmap="viridis")
    fig.colorbar(image, ax=ax, label="selections")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=90, fontsize=7)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xlabel("selected")
    ax.set_ylabel("selector")
    ax.set_title(f"selections, {label}")
    fig.tight_layout()
    return fig


def selection_network(matrices: dict[str, np.ndarray],
                      population: str | None = None,
                      percentile: float = 85.0) -> Figure:
    """Most frequent selection edges in a force-directed layout; nodes
    are colored by agent type where the population layout is known."""
    label = _pick_population(list(matrices), population)
    m = matrices[label]
    n = m.shape[0]
    types = agent_types_for_label(label, n)
    names = _node_names(label, n)

    graph = nx.DiGraph()
    graph.add_nodes_from(range(n))
    edges = top_edges(m, percentile)
    for i, j, w in edges:
        graph.add_edge(i, j, weight=w)

    fig = Figure(figsize=(7, 6))
    ax = fig.subplots()
    pos = nx.spring_layout(graph, weight="weight", seed=0)
    colors = ([TYPE_COLORS[t] for t in types] if types is not None
              else ["#4878a8"] * n)
    nx.draw_networkx_nodes(graph, pos, ax=ax, node_color=colors, node_size=420,
                           edgecolors="black", linewidths=0.5)
    if edges:
        wmax = max(w for _, _, w in edges)
        widths = [0.5 + 2.5 * graph.edges[e]["weight"] / wmax for e in graph.edges]
        nx.draw_networkx_edges(graph, pos, ax=ax, width=widths, alpha=0.6,
                               arrowsize=9, connectionstyle="arc3,rad=0.08")
    nx.draw_networkx_labels(graph, pos, labels=dict(enumerate(names)),
                            ax=ax, font_size=6)
    ax.set_title(f"selections above the {percentile:g}th percentile, {label}")
    ax.set_axis_off()
    fig.tight_layout()
    return fig


def _pivot(df: pd.DataFrame, value_col: str) -> tuple[np.ndarray, list[str], list[str]]:
    populations = _ordered_populations(df["population"])
    types = [t for t in TYPE_LABELS if t in set(df["type"])]
    grid = np.full((len(populations), len(types)), np.nan)
    for pi, label in enumerate(populations):
        for ti, t in enumerate(types):
            row = df[(df["population"] == label) & (df["type"] == t)]
            if not row.empty:
                grid[pi, ti] = float(row[value_col].iloc[0])
    return grid, populations, types


def _annotated_matrix(ax, grid, populations, types, title):
    image = ax.imshow(grid, cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(types)))
    ax.set_xticklabels(types, fontsize=8)
    ax.set_yticks(range(len(populations)))
    ax.set_yticklabels(populations, fontsize=8)
    span = np.nanmax(grid) - np.nanmin(grid)
    midpoint = np.nanmin(grid) + span / 2 if span > 0 else np.nanmin(grid)
    for (i, j), v in np.ndenumerate(grid):
        if not np.isnan(v):
            ax.text(j, i, f"{v:.2g}", ha="center", va="center", fontsize=6,
                    color="white" if v < midpoint else "black")
    ax.set_title(title, fontsize=10)
    return image


def reward_matrix(df: pd.DataFrame, normalized: pd.DataFrame | None = None) -> Figure:
    """Lifetime game reward per agent of each type in each population,
    next to the intrinsic totals (min-max normalized when available)."""
    fig = Figure(figsize=(11, 0.55 * df["population"].nunique() + 2.5))
    left, right = fig.subplots(1, 2)
    grid, pops, types = _pivot(df, "game_reward_per_agent")
    img = _annotated_matrix(left, grid, pops, types, "game reward per agent")
    fig.colorbar(img, ax=left, shrink=0.85)
    if normalized is not None:
        grid2, pops2, types2 = _pivot(normalized, "intrinsic_normalized")
        title = "intrinsic reward (normalized)"
    else:
        grid2, pops2, types2 = _pivot(df, "intrinsic_reward_per_agent")
        title = "intrinsic reward per agent"
    img2 = _annotated_matrix(right, grid2, pops2, types2, title)
    fig.colorbar(img2, ax=right, shrink=0.85)
    fig.tight_layout()
    return fig
