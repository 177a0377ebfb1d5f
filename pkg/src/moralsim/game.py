"""Stage game: actions and the 2x2 payoff matrix."""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class Action(IntEnum):
    COOPERATE = 0
    DEFECT = 1

    @property
    def symbol(self) -> str:
        return "C" if self is Action.COOPERATE else "D"

    @classmethod
    def from_symbol(cls, s: str) -> "Action":
        try:
            return {"C": cls.COOPERATE, "D": cls.DEFECT}[s]
        except KeyError:
            raise ValueError(f"unknown action symbol {s!r}, expected 'C' or 'D'")


# outcome keys in fixed order: (row action, column action)
OUTCOME_KEYS = ("CC", "CD", "DC", "DD")


class PayoffMatrix:
    """Symmetric two-player payoff table.

    ``pairs`` maps each outcome key ("CC", "CD", "DC", "DD") to the
    (row player, column player) payoff pair.  The game is required to be
    symmetric, i.e. swapping the players mirrors the payoffs, and all
    payoffs must be non-negative (the equality-based rewards divide by
    payoff sums and are only well defined on non-negative tables).
    """

    def __init__(self, pairs: dict[str, tuple[float, float]]):
        missing = [k for k in OUTCOME_KEYS if k not in pairs]
        if missing:
            raise ValueError(f"payoff table missing outcomes: {missing}")
        extra = [k for k in pairs if k not in OUTCOME_KEYS]
        if extra:
            raise ValueError(f"payoff table has unknown outcomes: {extra}")
        self.pairs = {k: (float(pairs[k][0]), float(pairs[k][1])) for k in OUTCOME_KEYS}
        for k, (a, b) in self.pairs.items():
            if not (np.isfinite(a) and np.isfinite(b)):
                raise ValueError(f"payoff for {k} is not finite")
            if a < 0 or b < 0:
                raise ValueError(f"payoff for {k} is negative; all payoffs must be >= 0")
        cc, cd, dc, dd = (self.pairs[k] for k in OUTCOME_KEYS)
        if cc[0] != cc[1] or dd[0] != dd[1] or cd != (dc[1], dc[0]):
            raise ValueError("payoff table is not symmetric under swapping the players")
        # dense lookup indexed by integer action values, row player first
        self._table = ((cc, cd), (dc, dd))

    @classmethod
    def default(cls) -> "PayoffMatrix":
        return cls({"CC": (3, 3), "CD": (0, 4), "DC": (4, 0), "DD": (1, 1)})

    def payoff(self, a_self: int, a_other: int) -> tuple[float, float]:
        """Payoffs (own, other) when playing ``a_self`` against ``a_other``."""
        return self._table[a_self][a_other]

    def to_dict(self) -> dict[str, list[float]]:
        return {k: list(v) for k, v in self.pairs.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "PayoffMatrix":
        return cls({k: tuple(v) for k, v in d.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, PayoffMatrix) and self.pairs == other.pairs

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={self.pairs[k]}" for k in OUTCOME_KEYS)
        return f"PayoffMatrix({inner})"


def payoff(a_self: Action | int, a_other: Action | int, matrix: PayoffMatrix) -> tuple[float, float]:
    """Payoff pair (self, other) for one dilemma game."""
    return matrix.payoff(int(a_self), int(a_other))
