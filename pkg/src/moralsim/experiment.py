"""Batch experiment runner: seed schedules, parallel dispatch, CSV output.

One experiment = one or more population labels, each simulated for a
fixed number of independent seeded runs (seeds seed, seed+1, ...,
seed+runs-1, the same schedule for every label).  Workers stream each
run straight into its per-run CSV so memory stays flat; cross-run
aggregates are reduced in fixed run order afterwards, which keeps every
output byte-identical for identical config and seed.

Output layout under ``out_dir``::

    manifest.json                     resolved config, rerunnable via --config
    <label>/episodes_run<k>.csv       per-episode metrics, one row per episode
    <label>/runlog_run<k>.json.gz     full replay log (only with --log full)
    coop_by_type.csv                  per-episode cooperation, mean across runs
    outcomes.csv                      per-episode social outcomes, mean across runs
    popularity.csv                    selections received in the final episodes
    selection_matrix.csv              who picked whom, summed, mean across runs
    cumulative_rewards.csv            lifetime reward per agent of each type
    cumulative_rewards_normalized.csv cross-population normalized intrinsic totals
"""

from __future__ import annotations

import csv
import gzip
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .game import PayoffMatrix
from .metrics import (
    PAIR_KEYS,
    _action_counts,
    _ci_halfwidth,
    normalize_intrinsic,
    social_outcomes,
)
from .moral_rewards import TYPE_ORDER, MoralType, RewardParams
from .neural import Hyperparams, NonFiniteError, net_state
from .simulation import (
    POPULATION_LABELS,
    EpisodeRecord,
    PopulationConfig,
    RunLog,
    population_types,
    run_simulation,
)

TYPE_LABELS = tuple(t.label for t in TYPE_ORDER)

EPISODE_CSV_COLUMNS = (
    ("population", "run", "episode", "coop_all")
    + tuple(f"coop_{l}" for l in TYPE_LABELS)
    + ("r_collective", "r_gini", "r_min", "cc", "cd", "dc", "dd")
)

# selections received in the last this-many episodes count toward popularity
POPULARITY_WINDOW = 100


@dataclass
class ExperimentConfig:
    """Fully resolved experiment settings; defaults are the full-scale
    study (30000 episodes, 20 runs, 16 agents, gamma 0.99, lr 0.001,
    eps 0.1/0.05, xi 5, hidden 256, capacity 256)."""

    population: str | None = None
    all_populations: bool = False
    episodes: int = 30000
    runs: int = 20
    n: int = 16
    seed: int = 0
    xi: float = 5.0
    gamma: float = 0.99
    lr: float = 0.001
    eps_sel: float = 0.1
    eps_dil: float = 0.05
    hidden: int = 256
    buffer_capacity: int = 256
    payoff: PayoffMatrix = field(default_factory=PayoffMatrix.default)
    out_dir: str = "moralsim_out"
    ma_window: int = 500
    log_granularity: str = "metrics-only"
    jobs: int | None = None
    selection_reward: str = "intrinsic"
    # None resolves to True exactly when several populations run
    normalize_intrinsic: bool | None = None

    def __post_init__(self):
        if self.all_populations:
            if self.population is not None:
                raise ValueError("--population and --all-populations are mutually exclusive")
        elif self.population is None:
            raise ValueError("a population label (or --all-populations) is required")
        elif self.population not in POPULATION_LABELS:
            known = ", ".join(POPULATION_LABELS)
            raise ValueError(f"unknown population {self.population!r}; expected one of: {known}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.ma_window < 1:
            raise ValueError(f"ma_window must be >= 1, got {self.ma_window}")
        if self.log_granularity not in ("metrics-only", "full"):
            raise ValueError(f"log granularity must be 'full' or 'metrics-only', "
                             f"got {self.log_granularity!r}")
        if self.jobs is not None and self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.normalize_intrinsic and len(self.labels()) < 2:
            raise ValueError("intrinsic normalization needs at least two populations")

    def labels(self) -> tuple[str, ...]:
        return POPULATION_LABELS if self.all_populations else (self.population,)

    def population_config(self, label: str) -> PopulationConfig:
        return PopulationConfig.for_label(
            label,
            n=self.n,
            episodes=self.episodes,
            hp=Hyperparams(gamma=self.gamma, lr=self.lr, eps_sel=self.eps_sel,
                           eps_dil=self.eps_dil, hidden=self.hidden,
                           buffer_capacity=self.buffer_capacity),
            payoff=self.payoff,
            rewards=RewardParams(xi=self.xi),
            selection_reward=self.selection_reward,
        )

    def manifest(self) -> dict:
        return {
            "population": self.population,
            "all_populations": self.all_populations,
            "episodes": self.episodes,
            "runs": self.runs,
            "n": self.n,
            "seed": self.seed,
            "xi": self.xi,
            "gamma": self.gamma,
            "lr": self.lr,
            "eps_sel": self.eps_sel,
            "eps_dil": self.eps_dil,
            "hidden": self.hidden,
            "buffer_capacity": self.buffer_capacity,
            "payoff": self.payoff.to_dict(),
            "out": self.out_dir,
            "ma_window": self.ma_window,
            "log": self.log_granularity,
            "jobs": self.jobs,
            "selection_reward": self.selection_reward,
            "normalize_intrinsic": self.normalize_intrinsic,
        }


@dataclass
class RunSummary:
    """Everything the dispatcher needs back from one finished run."""

    run_index: int
    seed: int
    coop_all: np.ndarray        # (episodes,)
    coop_type: np.ndarray       # (9, episodes); nan where the type is absent
    r_collective: np.ndarray
    r_gini: np.ndarray
    r_min: np.ndarray
    pair_counts: np.ndarray     # (episodes, 4) in PAIR_KEYS order
    received_final: np.ndarray  # (n,) selections received in the final window
    sel_matrix: np.ndarray      # (n, n) selections summed over all episodes
    cum_extr: np.ndarray        # (n,) lifetime extrinsic reward per agent
    cum_intr: np.ndarray        # (n,) lifetime intrinsic reward per agent
    type_labels: tuple          # per-agent type label, id order


def _open_csv(path):
    f = open(path, "w", newline="")
    return f, csv.writer(f, lineterminator="\n")


class _FullLogWriter:
    """Streams a run into a gzipped JSON replay log with fixed bytes.

    The archive mtime is pinned to zero so identical runs produce
    identical files.
    """

    def __init__(self, path: str, cfg: PopulationConfig, seed: int, type_labels):
        raw = open(path, "wb")
        self._gz = gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0)
        self._raw = raw
        self._first = True
        head = {
            "label": cfg.label,
            "composition": {t.label: c for t, c in cfg.composition.items()},
            "episodes": cfg.episodes,
            "gamma": cfg.hp.gamma, "lr": cfg.hp.lr,
            "eps_sel": cfg.hp.eps_sel, "eps_dil": cfg.hp.eps_dil,
            "hidden": cfg.hp.hidden, "buffer_capacity": cfg.hp.buffer_capacity,
            "xi": cfg.rewards.xi,
            "payoff": cfg.payoff.to_dict(),
            "selection_reward": cfg.selection_reward,
        }
        prefix = ('{"config": ' + json.dumps(head, sort_keys=True)
                  + ', "seed": ' + json.dumps(seed)
                  + ', "agent_types": ' + json.dumps(list(type_labels))
                  + ', "records": [')
        self._gz.write(prefix.encode())

    def add(self, rec: EpisodeRecord) -> None:
        d = {
            "episode": rec.episode,
            "env_before": rec.env_before.tolist(),
            "selections": rec.selections.tolist(),
            "a_sel": rec.a_sel.tolist(),
            "a_opp": rec.a_opp.tolist(),
            "r_sel_extr": rec.r_sel_extr.tolist(),
            "r_opp_extr": rec.r_opp_extr.tolist(),
            "r_sel_intr": rec.r_sel_intr.tolist(),
            "r_opp_intr": rec.r_opp_intr.tolist(),
            "sel_buf_sizes": rec.sel_buf_sizes.tolist(),
            "dil_buf_sizes": rec.dil_buf_sizes.tolist(),
            "losses": rec.losses.tolist(),
            "env_after": rec.env_after.tolist(),
        }
        sep = "" if self._first else ","
        self._first = False
        self._gz.write((sep + json.dumps(d, separators=(",", ":"))).encode())

    def finish(self, agents) -> None:
        final = [{"id": a.id, "type": a.moral_type.label,
                  "sel_net": net_state(a.sel_net), "dil_net": net_state(a.dil_net)}
                 for a in agents]
        self._gz.write(('], "agents": ' + json.dumps(final) + "}").encode())
        self._gz.close()
        self._raw.close()


def load_runlog(path: str) -> RunLog:
    """Rebuild a RunLog (records and types; no live agents) from a
    ``runlog_run<k>.json.gz`` file written with ``--log full``."""
    with gzip.open(path, "rt") as f:
        data = json.load(f)
    head = data["config"]
    cfg = PopulationConfig(
        label=head["label"],
        composition={MoralType.from_label(k): v for k, v in head["composition"].items()},
        episodes=head["episodes"],
        hp=Hyperparams(gamma=head["gamma"], lr=head["lr"], eps_sel=head["eps_sel"],
                       eps_dil=head["eps_dil"], hidden=head["hidden"],
                       buffer_capacity=head["buffer_capacity"]),
        payoff=PayoffMatrix.from_dict(head["payoff"]),
        rewards=RewardParams(xi=head["xi"]),
        selection_reward=head["selection_reward"],
    )
    records = []
    for d in data["records"]:
        records.append(EpisodeRecord(
            episode=d["episode"],
            env_before=np.array(d["env_before"], dtype=np.int8),
            selections=np.array(d["selections"], dtype=np.int16),
            a_sel=np.array(d["a_sel"], dtype=np.int8),
            a_opp=np.array(d["a_opp"], dtype=np.int8),
            r_sel_extr=np.array(d["r_sel_extr"]),
            r_opp_extr=np.array(d["r_opp_extr"]),
            r_sel_intr=np.array(d["r_sel_intr"]),
            r_opp_intr=np.array(d["r_opp_intr"]),
            sel_buf_sizes=np.array(d["sel_buf_sizes"], dtype=np.int16),
            dil_buf_sizes=np.array(d["dil_buf_sizes"], dtype=np.int16),
            losses=np.array(d["losses"]),
            env_after=np.array(d["env_after"], dtype=np.int8),
        ))
    return RunLog(
        config=cfg,
        seed=data["seed"],
        agent_types=[MoralType.from_label(l) for l in data["agent_types"]],
        episodes=records,
        agents=[],
        final_env=records[-1].env_after if records else np.zeros(0, dtype=np.int8),
    )


def _execute_run(pop_cfg: PopulationConfig, label_dir: str, run_index: int,
                 seed: int, full_log: bool) -> RunSummary:
    """One seeded run, streamed straight to its per-run files."""
    episodes, n = pop_cfg.episodes, pop_cfg.n
    window = min(POPULARITY_WINDOW, episodes)
    first_counted = episodes - window
    type_labels = tuple(t.label for t in population_types(pop_cfg))
    masks = [np.array([l == tl for l in type_labels]) for tl in TYPE_LABELS]

    # fixed-size accumulators; nothing grows with the episode count
    coop_all = np.empty(episodes)
    coop_type = np.full((len(TYPE_ORDER), episodes), np.nan)
    r_collective = np.empty(episodes)
    r_gini = np.empty(episodes)
    r_min = np.empty(episodes)
    pair_counts = np.empty((episodes, 4), dtype=np.int64)
    received = np.zeros(n, dtype=np.int64)
    sel_matrix = np.zeros((n, n), dtype=np.int64)
    cum_extr = np.zeros(n)
    cum_intr = np.zeros(n)
    rows = np.arange(n)

    f, writer = _open_csv(os.path.join(label_dir, f"episodes_run{run_index}.csv"))
    writer.writerow(EPISODE_CSV_COLUMNS)
    full = (_FullLogWriter(os.path.join(label_dir, f"runlog_run{run_index}.json.gz"),
                           pop_cfg, seed, type_labels)
            if full_log else None)

    def on_episode(rec: EpisodeRecord):
        nonlocal cum_extr, cum_intr
        ep = rec.episode
        coop, total = _action_counts(rec, n)
        coop_all[ep] = coop.sum() / total.sum()
        row_types = []
        for ti, mask in enumerate(masks):
            if mask.any():
                v = coop[mask].sum() / total[mask].sum()
                coop_type[ti, ep] = v
                row_types.append(repr(float(v)))
            else:
                row_types.append("")
        so = social_outcomes(rec)
        r_collective[ep] = so.r_collective
        r_gini[ep] = so.r_gini
        r_min[ep] = so.r_min
        idx = rec.a_sel.astype(np.int64) * 2 + rec.a_opp
        pair_counts[ep] = np.bincount(idx, minlength=4)
        if ep >= first_counted:
            np.add.at(received, rec.selections, 1)
        np.add.at(sel_matrix, (rows, rec.selections), 1)
        cum_extr += rec.r_sel_extr
        cum_intr += rec.r_sel_intr
        np.add.at(cum_extr, rec.selections, rec.r_opp_extr)
        np.add.at(cum_intr, rec.selections, rec.r_opp_intr)
        writer.writerow(
            [pop_cfg.label, run_index, ep, repr(float(coop_all[ep]))]
            + row_types
            + [repr(so.r_collective), repr(so.r_gini), repr(so.r_min)]
            + [int(c) for c in pair_counts[ep]])
        if full is not None:
            full.add(rec)

    try:
        log = run_simulation(pop_cfg, seed, keep_episodes=False, on_episode=on_episode)
        if full is not None:
            full.finish(log.agents)
    finally:
        f.close()

    return RunSummary(
        run_index=run_index,
        seed=seed,
        coop_all=coop_all,
        coop_type=coop_type,
        r_collective=r_collective,
        r_gini=r_gini,
        r_min=r_min,
        pair_counts=pair_counts,
        received_final=received,
        sel_matrix=sel_matrix,
        cum_extr=cum_extr,
        cum_intr=cum_intr,
        type_labels=type_labels,
    )


def _fmt(x) -> str:
    return repr(float(x))


def run_experiment(cfg: ExperimentConfig) -> int:
    """Execute the whole experiment and write every output file.

    Returns 0 on success; failures raise (the command-line wrapper turns
    them into a nonzero exit status).
    """
    labels = cfg.labels()
    normalize = cfg.normalize_intrinsic
    if normalize is None:
        normalize = len(labels) >= 2

    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "manifest.json"), "w") as f:
        json.dump(cfg.manifest(), f, indent=2, sort_keys=True)
        f.write("\n")

    jobs = cfg.jobs if cfg.jobs is not None else (os.cpu_count() or 1)
    full_log = cfg.log_granularity == "full"

    per_label: dict[str, list[RunSummary]] = {}
    for label in labels:
        pop_cfg = cfg.population_config(label)
        label_dir = os.path.join(cfg.out_dir, label)
        os.makedirs(label_dir, exist_ok=True)
        tasks = [(pop_cfg, label_dir, k, cfg.seed + k, full_log) for k in range(cfg.runs)]
        if jobs == 1 or cfg.runs == 1:
            summaries = [_execute_run(*t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=min(jobs, cfg.runs)) as pool:
                futures = [pool.submit(_execute_run, *t) for t in tasks]
                summaries = [fut.result() for fut in futures]
        summaries.sort(key=lambda s: s.run_index)
        per_label[label] = summaries

    _write_aggregates(cfg, per_label, normalize)
    return 0


def _write_aggregates(cfg: ExperimentConfig, per_label: dict[str, list[RunSummary]],
                      normalize: bool) -> None:
    out = cfg.out_dir

    f, w = _open_csv(os.path.join(out, "coop_by_type.csv"))
    w.writerow(("population", "episode", "coop_all") + tuple(f"coop_{l}" for l in TYPE_LABELS))
    for label, summaries in per_label.items():
        coop_all = np.mean([s.coop_all for s in summaries], axis=0)
        coop_type = np.mean([s.coop_type for s in summaries], axis=0)
        for ep in range(len(coop_all)):
            row = [label, ep, _fmt(coop_all[ep])]
            for ti in range(len(TYPE_ORDER)):
                v = coop_type[ti, ep]
                row.append("" if np.isnan(v) else _fmt(v))
            w.writerow(row)
    f.close()

    f, w = _open_csv(os.path.join(out, "outcomes.csv"))
    w.writerow(("population", "episode", "r_collective", "r_gini", "r_min"))
    for label, summaries in per_label.items():
        rc = np.mean([s.r_collective for s in summaries], axis=0)
        rg = np.mean([s.r_gini for s in summaries], axis=0)
        rm = np.mean([s.r_min for s in summaries], axis=0)
        for ep in range(len(rc)):
            w.writerow([label, ep, _fmt(rc[ep]), _fmt(rg[ep]), _fmt(rm[ep])])
    f.close()

    f, w = _open_csv(os.path.join(out, "popularity.csv"))
    w.writerow(("population", "type", "mean", "ci_low", "ci_high"))
    for label, summaries in per_label.items():
        type_labels = summaries[0].type_labels
        fractions = np.stack([s.received_final / s.received_final.sum() for s in summaries])
        for tl in TYPE_LABELS:
            mask = np.array([l == tl for l in type_labels])
            if not mask.any():
                continue
            vals = fractions[:, mask].sum(axis=1)
            mean = float(vals.mean())
            half = _ci_halfwidth(vals)
            w.writerow([label, tl, _fmt(mean), _fmt(mean - half), _fmt(mean + half)])
    f.close()

    f, w = _open_csv(os.path.join(out, "selection_matrix.csv"))
    w.writerow(("population", "selector", "selected", "count"))
    for label, summaries in per_label.items():
        mat = np.mean([s.sel_matrix for s in summaries], axis=0)
        n = mat.shape[0]
        for i in range(n):
            for j in range(n):
                w.writerow([label, i, j, _fmt(mat[i, j])])
    f.close()

    intr_raw: dict[str, dict[MoralType, float]] = {}
    f, w = _open_csv(os.path.join(out, "cumulative_rewards.csv"))
    w.writerow(("population", "type", "game_reward_per_agent", "intrinsic_reward_per_agent"))
    for label, summaries in per_label.items():
        type_labels = summaries[0].type_labels
        extr = np.mean([s.cum_extr for s in summaries], axis=0)
        intr = np.mean([s.cum_intr for s in summaries], axis=0)
        intr_raw[label] = {}
        for t in TYPE_ORDER:
            mask = np.array([l == t.label for l in type_labels])
            if not mask.any():
                continue
            ev, iv = float(extr[mask].mean()), float(intr[mask].mean())
            intr_raw[label][t] = iv
            w.writerow([label, t.label, _fmt(ev), _fmt(iv)])
    f.close()

    if normalize:
        normalized = normalize_intrinsic(intr_raw)
        f, w = _open_csv(os.path.join(out, "cumulative_rewards_normalized.csv"))
        w.writerow(("population", "type", "intrinsic_normalized"))
        for label in per_label:
            for t in TYPE_ORDER:
                if t in normalized[label]:
                    w.writerow([label, t.label, _fmt(normalized[label][t])])
        f.close()
