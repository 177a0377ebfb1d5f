"""Quantitative summaries of simulation traces.

Everything here is a pure function of episode records: recomputing any
metric from a persisted log gives the same numbers the runner computed
online.  Behavioral metrics count executed actions, so exploration moves
are included, and both roles (selector and selected) count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .moral_rewards import TYPE_ORDER, MoralType
from .simulation import EpisodeRecord, RunLog


def _action_counts(record: EpisodeRecord, n: int) -> tuple[np.ndarray, np.ndarray]:
    # per-agent (cooperations, actions) in one episode, both roles
    coop = np.zeros(n, dtype=np.int64)
    total = np.zeros(n, dtype=np.int64)
    total += 1
    coop += record.a_sel == 0
    np.add.at(total, record.selections, 1)
    np.add.at(coop, record.selections, record.a_opp == 0)
    return coop, total


def cooperation_rate(record: EpisodeRecord, agent_types: Sequence[MoralType] | None = None,
                     moral_type: MoralType | None = None) -> float:
    """Fraction of cooperative actions in one episode.

    With ``moral_type`` given, only actions by agents of that type count;
    ``agent_types`` (id-indexed) is then required.
    """
    n = len(record.selections)
    coop, total = _action_counts(record, n)
    if moral_type is None:
        return float(coop.sum()) / float(total.sum())
    if agent_types is None:
        raise ValueError("agent_types is required when filtering by type")
    mask = np.array([t is moral_type for t in agent_types])
    if not mask.any():
        raise ValueError(f"no agent of type {moral_type.label} in this population")
    return float(coop[mask].sum()) / float(total[mask].sum())


@dataclass(slots=True)
class SocialOutcomes:
    r_collective: float
    r_gini: float
    r_min: float


def social_outcomes(record: EpisodeRecord) -> SocialOutcomes:
    """Collective, equality and min payoff measures of one episode.

    All three are computed over the games' extrinsic payoff pairs: the
    sum of all payoffs, the mean of 1 - |r_M - r_O| / (r_M + r_O), and
    the mean of min(r_M, r_O).
    """
    rm, ro = record.r_sel_extr, record.r_opp_extr
    totals = rm + ro
    if (totals == 0).any():
        raise ValueError(
            f"episode {record.episode}: a game paid (0, 0), the equality measure "
            "is undefined for this payoff matrix")
    gini_terms = 1.0 - np.abs(rm - ro) / totals
    return SocialOutcomes(
        r_collective=float(totals.sum()),
        r_gini=float(gini_terms.mean()),
        r_min=float(np.minimum(rm, ro).mean()),
    )


PAIR_KEYS = ("CC", "CD", "DC", "DD")


def action_pair_counts(record: EpisodeRecord) -> dict[str, int]:
    """Tally of ordered action pairs, the selecting player's move first."""
    idx = record.a_sel.astype(np.int64) * 2 + record.a_opp
    counts = np.bincount(idx, minlength=4)
    return dict(zip(PAIR_KEYS, (int(c) for c in counts)))


def _received_counts(records: Iterable[EpisodeRecord], n: int) -> np.ndarray:
    counts = np.zeros(n, dtype=np.int64)
    for rec in records:
        np.add.at(counts, rec.selections, 1)
    return counts


def _ci_halfwidth(values: np.ndarray) -> float:
    # 95% normal interval across runs; a single run has no spread estimate
    if len(values) < 2:
        return 0.0
    return float(1.96 * values.std(ddof=1) / np.sqrt(len(values)))


def selection_popularity(logs: Sequence[RunLog], final_k: int = 100,
                         by_type: bool = True) -> dict:
    """How often each type (or agent) was picked in the last ``final_k``
    episodes, as a fraction of all selections made.

    Returns key -> (mean, ci) where the mean is across runs and ci is the
    95% halfwidth.  Fractions sum to 1 within each run.
    """
    if not logs:
        raise ValueError("no runs given")
    if final_k < 1:
        raise ValueError(f"final_k must be >= 1, got {final_k}")
    per_run = []
    for log in logs:
        if final_k > len(log.episodes):
            raise ValueError(
                f"final_k={final_k} exceeds the {len(log.episodes)} recorded episodes")
        n = len(log.agent_types)
        counts = _received_counts(log.episodes[-final_k:], n)
        per_run.append(counts / counts.sum())
    fractions = np.stack(per_run)

    if not by_type:
        return {i: (float(fractions[:, i].mean()), _ci_halfwidth(fractions[:, i]))
                for i in range(fractions.shape[1])}
    types = logs[0].agent_types
    out = {}
    for t in TYPE_ORDER:
        mask = np.array([u is t for u in types])
        if not mask.any():
            continue
        vals = fractions[:, mask].sum(axis=1)
        out[t] = (float(vals.mean()), _ci_halfwidth(vals))
    return out


@dataclass(slots=True)
class SelectionMatrix:
    """Who picked whom, summed over episodes and averaged across runs.

    ``counts[i, j]`` is how often selector i picked agent j; the diagonal
    is structurally zero.  For a single run every row sums to the number
    of episodes.
    """

    counts: np.ndarray


def selection_matrix(logs: Sequence[RunLog]) -> SelectionMatrix:
    if not logs:
        raise ValueError("no runs given")
    n = len(logs[0].agent_types)
    acc = np.zeros((n, n))
    for log in logs:
        m = np.zeros((n, n), dtype=np.int64)
        rows = np.arange(n)
        for rec in log.episodes:
            np.add.at(m, (rows, rec.selections), 1)
        acc += m
    return SelectionMatrix(counts=acc / len(logs))


def top_selection_edges(counts: np.ndarray, percentile: float = 85.0):
    """Edges above the given percentile of the nonzero selection counts.

    Returns (selector, selected, weight) triples in row-major order; an
    all-zero matrix yields no edges.  The threshold is strict, computed
    with numpy's default (linear interpolation) percentile.
    """
    counts = np.asarray(counts)
    nonzero = counts[counts > 0]
    if nonzero.size == 0:
        return []
    threshold = np.percentile(nonzero, percentile)
    keep = np.argwhere(counts > threshold)
    return [(int(i), int(j), float(counts[i, j])) for i, j in keep]


def _cumulative_by_agent(log: RunLog) -> tuple[np.ndarray, np.ndarray]:
    n = len(log.agent_types)
    extr = np.zeros(n)
    intr = np.zeros(n)
    rows = np.arange(n)
    for rec in log.episodes:
        extr += rec.r_sel_extr
        intr += rec.r_sel_intr
        np.add.at(extr, rec.selections, rec.r_opp_extr)
        np.add.at(intr, rec.selections, rec.r_opp_intr)
    return extr, intr


def cumulative_rewards(logs: Sequence[RunLog]) -> dict[MoralType, tuple[float, float]]:
    """Per type: lifetime (extrinsic, intrinsic) reward per agent of that
    type, averaged across runs.  Intrinsic values are raw; cross-population
    normalization is a separate step (:func:`normalize_intrinsic`)."""
    if not logs:
        raise ValueError("no runs given")
    types = logs[0].agent_types
    per_run_extr, per_run_intr = [], []
    for log in logs:
        extr, intr = _cumulative_by_agent(log)
        per_run_extr.append(extr)
        per_run_intr.append(intr)
    extr = np.stack(per_run_extr).mean(axis=0)
    intr = np.stack(per_run_intr).mean(axis=0)
    out = {}
    for t in TYPE_ORDER:
        mask = np.array([u is t for u in types])
        if not mask.any():
            continue
        out[t] = (float(extr[mask].mean()), float(intr[mask].mean()))
    return out


def normalize_intrinsic(per_population: dict[str, dict[MoralType, float]]
                        ) -> dict[str, dict[MoralType, float]]:
    """Min-max normalize each type's intrinsic totals across populations.

    Needs at least two populations to span a range; a type whose totals
    are identical everywhere maps to 0.5.
    """
    if len(per_population) < 2:
        raise ValueError("intrinsic normalization needs at least two populations")
    types = set()
    for vals in per_population.values():
        types.update(vals)
    bounds = {}
    for t in types:
        observed = [vals[t] for vals in per_population.values() if t in vals]
        bounds[t] = (min(observed), max(observed))
    out = {}
    for label, vals in per_population.items():
        row = {}
        for t, v in vals.items():
            lo, hi = bounds[t]
            row[t] = 0.5 if hi == lo else (v - lo) / (hi - lo)
        out[label] = row
    return out


def moving_average(series, window: int) -> np.ndarray:
    """Trailing mean over the last ``window`` points, length preserved.

    Early entries average over what exists so far, so index i holds the
    mean of the first i + 1 points until the window fills.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("series must be one-dimensional")
    c = np.cumsum(x)
    out = np.empty_like(x)
    head = min(window, len(x))
    out[:head] = c[:head] / np.arange(1, head + 1)
    if len(x) > window:
        out[window:] = (c[window:] - c[:-window]) / window
    return out
