import csv
import os
import subprocess
import sys

import pytest

from moralsim_figures.schema import (
    COOP_COLUMNS,
    CUMULATIVE_COLUMNS,
    MATRIX_COLUMNS,
    NORMALIZED_COLUMNS,
    OUTCOME_COLUMNS,
    POPULARITY_COLUMNS,
)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def coop_csv(tmp_path):
    """Synthetic cooperation file: constant 0.5, two populations."""
    rows = []
    for label in ("majority-S", "majority-Ut"):
        for ep in range(40):
            rows.append([label, ep, 0.5] + [0.5] * 9)
    return write_csv(tmp_path / "coop_by_type.csv", COOP_COLUMNS, rows)


@pytest.fixture
def outcomes_csv(tmp_path):
    rows = []
    for label in ("majority-S", "majority-De"):
        for ep in range(40):
            rows.append([label, ep, 64.0, 0.5, 1.0])
    return write_csv(tmp_path / "outcomes.csv", OUTCOME_COLUMNS, rows)


@pytest.fixture
def uniform_popularity_csv(tmp_path):
    types = ("S", "Ut", "aUt", "De", "mDe", "V-Eq", "V-In", "V-Ki", "V-Ag")
    rows = [["majority-S", t, 1 / 9, 1 / 9, 1 / 9] for t in types]
    return write_csv(tmp_path / "popularity.csv", POPULARITY_COLUMNS, rows)


@pytest.fixture
def matrix_csv(tmp_path):
    # 4 agents, everyone picks agent 0; agent 0 picks agent 1
    rows = []
    counts = {(1, 0): 30.0, (2, 0): 30.0, (3, 0): 30.0, (0, 1): 30.0}
    for i in range(4):
        for j in range(4):
            rows.append(["majority-S", i, j, counts.get((i, j), 0.0)])
    return write_csv(tmp_path / "selection_matrix.csv", MATRIX_COLUMNS, rows)


@pytest.fixture
def cumulative_csv(tmp_path):
    rows = [
        ["majority-S", "S", 900.0, 900.0],
        ["majority-S", "Ut", 500.0, 1000.0],
        ["majority-Ut", "S", 700.0, 700.0],
        ["majority-Ut", "Ut", 800.0, 1600.0],
    ]
    return write_csv(tmp_path / "cumulative_rewards.csv", CUMULATIVE_COLUMNS, rows)


@pytest.fixture
def normalized_csv(tmp_path):
    rows = [
        ["majority-S", "S", 1.0],
        ["majority-S", "Ut", 0.0],
        ["majority-Ut", "S", 0.0],
        ["majority-Ut", "Ut", 1.0],
    ]
    return write_csv(tmp_path / "cumulative_rewards_normalized.csv",
                     NORMALIZED_COLUMNS, rows)


@pytest.fixture(scope="session")
def real_run(tmp_path_factory):
    """Aggregate CSVs from an actual (reduced) simulator invocation,
    reached only through its command-line interface."""
    out = tmp_path_factory.mktemp("real_run")
    env = {k: v for k, v in os.environ.items() if not k.startswith("MORALSIM_")}
    proc = subprocess.run(
        [sys.executable, "-m", "moralsim", "--all-populations",
         "--episodes", "150", "--runs", "2", "--hidden", "16",
         "--jobs", "1", "--seed", "7", "--out", str(out)],
        capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    return out
