"""Command-line entry point.

Settings resolve in precedence order: flags, then MORALSIM_* environment
variables, then the --config JSON file, then built-in defaults.  The
config file uses the same keys the runner echoes into manifest.json, so
a previous manifest reruns an experiment exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .experiment import ExperimentConfig, run_experiment
from .game import PayoffMatrix

ENV_PREFIX = "MORALSIM_"

_INT_KEYS = ("episodes", "runs", "n", "seed", "hidden", "buffer_capacity",
             "ma_window", "jobs")
_FLOAT_KEYS = ("xi", "gamma", "lr", "eps_sel", "eps_dil")
_BOOL_KEYS = ("all_populations", "normalize_intrinsic")
_STR_KEYS = ("population", "out", "log", "selection_reward")
_FILE_KEYS = _INT_KEYS + _FLOAT_KEYS + _BOOL_KEYS + _STR_KEYS + ("payoff",)


class ConfigError(ValueError):
    pass


def _parse_bool(raw: str, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: cannot read {raw!r} as a boolean")


def _load_payoff_file(path: str) -> PayoffMatrix:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read payoff matrix file: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed payoff matrix file {path}: {e}")
    try:
        return PayoffMatrix.from_dict(data)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad payoff matrix in {path}: {e}")


def _from_file(path: str) -> dict:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed config file {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - set(_FILE_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    values = {}
    for key, raw in data.items():
        if raw is None:
            continue
        if key == "payoff":
            try:
                values[key] = PayoffMatrix.from_dict(raw)
            except (ValueError, TypeError) as e:
                raise ConfigError(f"bad payoff table in config file: {e}")
        elif key in _INT_KEYS:
            values[key] = int(raw)
        elif key in _FLOAT_KEYS:
            values[key] = float(raw)
        elif key in _BOOL_KEYS:
            if not isinstance(raw, bool):
                raise ConfigError(f"{key}: expected a JSON boolean, got {raw!r}")
            values[key] = raw
        else:
            values[key] = str(raw)
    return values


def _from_env(environ) -> dict:
    values = {}
    for var, raw in environ.items():
        if not var.startswith(ENV_PREFIX):
            continue
        key = var[len(ENV_PREFIX):].lower()
        if key == "payoff_matrix":
            values["payoff"] = _load_payoff_file(raw)
        elif key in _INT_KEYS:
            try:
                values[key] = int(raw)
            except ValueError:
                raise ConfigError(f"{var}: cannot read {raw!r} as an integer")
        elif key in _FLOAT_KEYS:
            try:
                values[key] = float(raw)
            except ValueError:
                raise ConfigError(f"{var}: cannot read {raw!r} as a number")
        elif key in _BOOL_KEYS:
            values[key] = _parse_bool(raw, var)
        elif key in _STR_KEYS:
            values[key] = raw
        else:
            raise ConfigError(f"unknown environment variable {var}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="moralsim",
        description="Simulate populations of morally heterogeneous Q-learning "
                    "agents playing the iterated prisoner's dilemma with "
                    "partner selection.")
    p.add_argument("--config", metavar="FILE",
                   help="JSON config file; a manifest.json from a previous run works")
    p.add_argument("--population", metavar="LABEL",
                   help="population to simulate, e.g. majority-Ut")
    p.add_argument("--all-populations", action="store_true", default=None,
                   help="simulate all nine single-majority populations")
    p.add_argument("--episodes", type=int)
    p.add_argument("--runs", type=int, help="independent seeded runs per population")
    p.add_argument("--seed", type=int, help="base seed; run k uses seed+k")
    p.add_argument("--xi", type=float, help="norm/virtue reward magnitude")
    p.add_argument("--gamma", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--eps-sel", type=float, help="selection exploration rate")
    p.add_argument("--eps-dil", type=float, help="dilemma exploration rate")
    p.add_argument("--hidden", type=int, help="hidden layer width")
    p.add_argument("--payoff-matrix", metavar="FILE",
                   help="JSON file mapping CC/CD/DC/DD to payoff pairs")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--ma-window", type=int,
                   help="smoothing window recorded for downstream plots")
    p.add_argument("--log", choices=("full", "metrics"),
                   help="write full replay logs or metrics only")
    p.add_argument("--jobs", type=int, help="max concurrent run workers")
    p.add_argument("--selection-reward", choices=("intrinsic", "extrinsic"),
                   help="reward copied into the selection memory")
    return p


def parse_config(argv=None, environ=None) -> ExperimentConfig:
    """Resolve flags, environment and config file into an ExperimentConfig."""
    if environ is None:
        environ = os.environ
    args = _build_parser().parse_args(argv)

    values: dict = {}
    if args.config:
        values.update(_from_file(args.config))
    values.update(_from_env(environ))

    flag_map = {
        "population": args.population,
        "all_populations": args.all_populations,
        "episodes": args.episodes,
        "runs": args.runs,
        "seed": args.seed,
        "xi": args.xi,
        "gamma": args.gamma,
        "lr": args.lr,
        "eps_sel": args.eps_sel,
        "eps_dil": args.eps_dil,
        "hidden": args.hidden,
        "out": args.out,
        "ma_window": args.ma_window,
        "log": args.log,
        "jobs": args.jobs,
        "selection_reward": args.selection_reward,
    }
    for key, v in flag_map.items():
        if v is not None:
            values[key] = v
    if args.payoff_matrix is not None:
        values["payoff"] = _load_payoff_file(args.payoff_matrix)

    if values.get("log") == "metrics":
        values["log"] = "metrics-only"
    kwargs = dict(values)
    if "out" in kwargs:
        kwargs["out_dir"] = kwargs.pop("out")
    if "log" in kwargs:
        kwargs["log_granularity"] = kwargs.pop("log")
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as e:
        raise ConfigError(str(e))


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as e:
        print(f"moralsim: {e}", file=sys.stderr)
        return 2
    try:
        return run_experiment(cfg)
    except Exception as e:
        print(f"moralsim: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
