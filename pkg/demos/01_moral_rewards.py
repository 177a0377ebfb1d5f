"""A tour of the nine intrinsic reward functions.

Every agent plays the same prisoner's dilemma and earns the same game
payoffs; what differs is the *moral* reward each type computes from a
finished interaction.  This script prints the full reward table for all
four action pairs and then checks the algebraic relationships between
the types numerically.
"""

import numpy as np

from moralsim import (
    TYPE_ORDER,
    Action,
    GameContext,
    MoralType,
    PayoffMatrix,
    RewardParams,
    intrinsic_reward,
    learning_reward,
    payoff,
)

C, D = Action.COOPERATE, Action.DEFECT
matrix = PayoffMatrix.default()
params = RewardParams(xi=5.0)

print("game payoffs (row = self, column = opponent):")
for a in (C, D):
    cells = [f"{payoff(a, b, matrix)[0]:.0f}" for b in (C, D)]
    print(f"  {a.name:<9} {cells[0]:>3} {cells[1]:>3}")

print("\nintrinsic rewards by type (opponent cooperated last episode):")
header = "  self opp  " + "".join(f"{t.label:>7}" for t in TYPE_ORDER)
print(header)
for a in (C, D):
    for b in (C, D):
        r_self, r_opp = payoff(a, b, matrix)
        ctx = GameContext(a, b, C, r_self, r_opp)
        row = "".join(f"{intrinsic_reward(t, ctx, params):>7.2f}" for t in TYPE_ORDER)
        print(f"  {a.name[0]:>4} {b.name[0]:>3}  {row}")

# the norm-based types condition on the opponent's *visible* history:
# defecting against a known defector carries no penalty (and, for mDe,
# no thrill)
ctx_dd = GameContext(D, C, D, *payoff(D, C, matrix))
print("\nsame defection, but the opponent was seen defecting before:")
for t in (MoralType.DEONTOLOGICAL, MoralType.MALICIOUS_DEONTOLOGICAL):
    print(f"  {t.label:>4}: {intrinsic_reward(t, ctx_dd, params):+.2f}")

print("\nalgebraic identities on 1000 random contexts:")
rng = np.random.default_rng(0)
worst = {"Ut+aUt": 0.0, "De+mDe": 0.0, "V-Eq+V-In": 0.0, "V-Ki+V-Ag": 0.0}
for _ in range(1000):
    a, b, p = Action(rng.integers(2)), Action(rng.integers(2)), Action(rng.integers(2))
    r = rng.uniform(0.1, 10.0, size=2)
    ctx = GameContext(a, b, p, float(r[0]), float(r[1]))
    get = lambda t: intrinsic_reward(t, ctx, params)
    worst["Ut+aUt"] = max(worst["Ut+aUt"], abs(get(MoralType.UTILITARIAN) + get(MoralType.ANTI_UTILITARIAN)))
    worst["De+mDe"] = max(worst["De+mDe"], abs(get(MoralType.DEONTOLOGICAL) + get(MoralType.MALICIOUS_DEONTOLOGICAL)))
    worst["V-Eq+V-In"] = max(worst["V-Eq+V-In"], abs(get(MoralType.VIRTUE_EQUALITY) + get(MoralType.VIRTUE_INEQUALITY) - 1.0))
    worst["V-Ki+V-Ag"] = max(worst["V-Ki+V-Ag"], abs(get(MoralType.VIRTUE_KINDNESS) + get(MoralType.VIRTUE_AGGRESSIVENESS) - params.xi))
for name, err in worst.items():
    print(f"  {name:<10} max |error| = {err:.2e}")

# the Selfish type has no moral machinery at all: its learning signal
# is the raw game payoff
ctx = GameContext(D, C, C, *payoff(D, C, matrix))
print("\nselfish agents train on the raw payoff:")
print(f"  learning reward for exploiting a cooperator = "
      f"{learning_reward(MoralType.SELFISH, ctx, params):.1f}")
