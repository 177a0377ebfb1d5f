"""Strict readers for the simulator's CSV outputs.

Each loader checks the exact column layout before anything is plotted,
so a wrong or stale file fails loudly instead of producing a misleading
figure.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from .palette import TYPE_LABELS


class SchemaError(ValueError):
    """A CSV does not match the documented simulator output schema."""


COOP_COLUMNS = ("population", "episode", "coop_all") + tuple(
    f"coop_{t}" for t in TYPE_LABELS)
OUTCOME_COLUMNS = ("population", "episode", "r_collective", "r_gini", "r_min")
POPULARITY_COLUMNS = ("population", "type", "mean", "ci_low", "ci_high")
MATRIX_COLUMNS = ("population", "selector", "selected", "count")
CUMULATIVE_COLUMNS = ("population", "type", "game_reward_per_agent",
                      "intrinsic_reward_per_agent")
NORMALIZED_COLUMNS = ("population", "type", "intrinsic_normalized")


def _read(path: str, columns: tuple[str, ...]) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except FileNotFoundError:
        raise SchemaError(f"no such file: {path}")
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path} is empty")
    except (pd.errors.ParserError, OSError) as e:
        raise SchemaError(f"cannot read {path}: {e}")
    found = tuple(df.columns)
    if found != columns:
        raise SchemaError(
            f"{path}: expected columns {', '.join(columns)}; "
            f"found {', '.join(found)}")
    if df.empty:
        raise SchemaError(f"{path} has a header but no rows")
    return df


def _numeric(df: pd.DataFrame, path: str, columns) -> pd.DataFrame:
    for c in columns:
        coerced = pd.to_numeric(df[c], errors="coerce")
        if coerced.isna().any():
            bad = df[c][coerced.isna()].iloc[0]
            raise SchemaError(f"{path}: column {c} holds non-numeric value {bad!r}")
        df[c] = coerced
    return df


def load_coop(path: str) -> pd.DataFrame:
    df = _read(path, COOP_COLUMNS)
    # per-type columns may be blank where a type is absent
    df = _numeric(df, path, ("episode", "coop_all"))
    for t in TYPE_LABELS:
        df[f"coop_{t}"] = pd.to_numeric(df[f"coop_{t}"], errors="coerce")
    return df


def load_outcomes(path: str) -> pd.DataFrame:
    return _numeric(_read(path, OUTCOME_COLUMNS), path,
                    ("episode", "r_collective", "r_gini", "r_min"))


def load_popularity(path: str) -> pd.DataFrame:
    return _numeric(_read(path, POPULARITY_COLUMNS), path,
                    ("mean", "ci_low", "ci_high"))


def load_selection_matrix(path: str) -> dict[str, np.ndarray]:
    """Per-population dense selector x selected count matrices."""
    df = _numeric(_read(path, MATRIX_COLUMNS), path,
                  ("selector", "selected", "count"))
    out = {}
    for label, group in df.groupby("population", sort=False):
        n = int(max(group["selector"].max(), group["selected"].max())) + 1
        if len(group) != n * n:
            raise SchemaError(
                f"{path}: population {label} has {len(group)} rows, "
                f"expected a full {n}x{n} matrix")
        m = np.zeros((n, n))
        m[group["selector"].to_numpy(dtype=int),
          group["selected"].to_numpy(dtype=int)] = group["count"].to_numpy()
        out[str(label)] = m
    return out


def load_cumulative(path: str) -> pd.DataFrame:
    return _numeric(_read(path, CUMULATIVE_COLUMNS), path,
                    ("game_reward_per_agent", "intrinsic_reward_per_agent"))


def load_normalized(path: str) -> pd.DataFrame:
    return _numeric(_read(path, NORMALIZED_COLUMNS), path,
                    ("intrinsic_normalized",))
