"""Intrinsic reward functions for the nine agent types.

Each agent type turns the outcome of one dilemma game into a scalar
learning signal.  The consequentialist types (Ut, aUt, V-Eq, V-In) score
the payoff outcome itself; the norm-based types (De, mDe, V-Ki, V-Ag)
score the agent's own conduct, ignoring payoffs.  The Selfish type has no
intrinsic motivation and learns from its game payoff directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .game import Action


class MoralType(Enum):
    SELFISH = "S"
    UTILITARIAN = "Ut"
    ANTI_UTILITARIAN = "aUt"
    DEONTOLOGICAL = "De"
    MALICIOUS_DEONTOLOGICAL = "mDe"
    VIRTUE_EQUALITY = "V-Eq"
    VIRTUE_INEQUALITY = "V-In"
    VIRTUE_KINDNESS = "V-Ki"
    VIRTUE_AGGRESSIVENESS = "V-Ag"

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def from_label(cls, label: str) -> "MoralType":
        for t in cls:
            if t.value == label:
                return t
        raise ValueError(f"unknown agent type {label!r}")


# canonical ordering of the nine types, used for population layout and
# column ordering in emitted tables
TYPE_ORDER = (
    MoralType.SELFISH,
    MoralType.UTILITARIAN,
    MoralType.ANTI_UTILITARIAN,
    MoralType.DEONTOLOGICAL,
    MoralType.MALICIOUS_DEONTOLOGICAL,
    MoralType.VIRTUE_EQUALITY,
    MoralType.VIRTUE_INEQUALITY,
    MoralType.VIRTUE_KINDNESS,
    MoralType.VIRTUE_AGGRESSIVENESS,
)


@dataclass(slots=True)
class GameContext:
    """Everything one player can condition its reward on after one game.

    ``a_opp_prev`` is the opponent's environment-visible action from
    before the episode started, not the move just played; the
    norm-violation types condition on it.  ``r_self_extr`` and
    ``r_opp_extr`` are the extrinsic game payoffs of this game.
    """

    a_self: Action
    a_opp: Action
    a_opp_prev: Action
    r_self_extr: float
    r_opp_extr: float


@dataclass(slots=True)
class RewardParams:
    xi: float = 5.0

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi}")


def _payoff_share(ctx: GameContext) -> float:
    # |r_self - r_opp| / (r_self + r_opp), the inequality share of the
    # joint payoff; defined as 0 when both payoffs are zero
    total = ctx.r_self_extr + ctx.r_opp_extr
    if ctx.r_self_extr < 0 or ctx.r_opp_extr < 0:
        raise ValueError("equality-based rewards are undefined for negative payoffs")
    if total == 0:
        return 0.0
    return abs(ctx.r_self_extr - ctx.r_opp_extr) / total


def intrinsic_reward(moral_type: MoralType, ctx: GameContext, params: RewardParams) -> float:
    """Intrinsic reward of ``moral_type`` for one game outcome.

    For the Selfish type this is defined as the extrinsic payoff itself,
    so that every type exposes the same interface.
    """
    if moral_type is MoralType.SELFISH:
        return ctx.r_self_extr
    if moral_type is MoralType.UTILITARIAN:
        return ctx.r_self_extr + ctx.r_opp_extr
    if moral_type is MoralType.ANTI_UTILITARIAN:
        return -(ctx.r_self_extr + ctx.r_opp_extr)
    if moral_type is MoralType.DEONTOLOGICAL:
        # penalty for defecting against a visible cooperator
        if ctx.a_self is Action.DEFECT and ctx.a_opp_prev is Action.COOPERATE:
            return -params.xi
        return 0.0
    if moral_type is MoralType.MALICIOUS_DEONTOLOGICAL:
        if ctx.a_self is Action.DEFECT and ctx.a_opp_prev is Action.COOPERATE:
            return params.xi
        return 0.0
    if moral_type is MoralType.VIRTUE_EQUALITY:
        return 1.0 - _payoff_share(ctx)
    if moral_type is MoralType.VIRTUE_INEQUALITY:
        return _payoff_share(ctx)
    if moral_type is MoralType.VIRTUE_KINDNESS:
        return params.xi if ctx.a_self is Action.COOPERATE else 0.0
    if moral_type is MoralType.VIRTUE_AGGRESSIVENESS:
        return params.xi if ctx.a_self is Action.DEFECT else 0.0
    raise ValueError(f"unknown agent type {moral_type!r}")


def learning_reward(moral_type: MoralType, ctx: GameContext, params: RewardParams) -> float:
    """Reward the agent actually trains on: extrinsic for Selfish agents,
    intrinsic for everyone else."""
    if moral_type is MoralType.SELFISH:
        return ctx.r_self_extr
    return intrinsic_reward(moral_type, ctx, params)
