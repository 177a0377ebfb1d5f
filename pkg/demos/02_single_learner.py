"""One deep-Q learner against a scripted, always-cooperating partner.

The partner never changes its move, so the only thing being learned is
the value of cooperating versus defecting under each type's own reward.
A selfish learner discovers exploitation; a kindness-driven learner
settles on cooperation; a deontological learner learns only to avoid
the norm penalty for defecting against a visible cooperator, so its
cooperation is a flat preference rather than an attraction.
"""

import numpy as np

from moralsim import (
    Action,
    AdamState,
    Experience,
    GameContext,
    MoralType,
    PayoffMatrix,
    RewardParams,
    act,
    adam_step,
    encode_dilemma_state,
    forward,
    init_network,
    learning_reward,
    payoff,
    td_loss_and_grad,
)

EPISODES = 2000
WINDOW = 256  # experiences kept for replay
C = Action.COOPERATE

matrix = PayoffMatrix.default()
params = RewardParams(xi=5.0)
state = encode_dilemma_state(C)  # partner's visible action never changes


def train(moral_type, seed):
    rng = np.random.default_rng(seed)
    net = init_network(1, 256, 2, rng)
    opt = AdamState(net.params.size, lr=0.001)
    window = []
    trace = []
    for ep in range(EPISODES):
        a = act(net, state, 0.05, rng)
        r_self, r_opp = payoff(Action(a), C, matrix)
        ctx = GameContext(Action(a), C, C, r_self, r_opp)
        r = learning_reward(moral_type, ctx, params)
        window.append(Experience(state, a, r, state))
        if len(window) > WINDOW:
            window.pop(0)
        _, grads = td_loss_and_grad(net, window, 0.99)
        adam_step(net, opt, grads)
        if (ep + 1) % 400 == 0:
            q = forward(net, state)
            trace.append((ep + 1, q[0], q[1]))
    q = forward(net, state)
    return trace, ("cooperate" if q[0] > q[1] else "defect")


for moral_type in (MoralType.SELFISH, MoralType.VIRTUE_KINDNESS,
                   MoralType.DEONTOLOGICAL):
    trace, greedy = train(moral_type, seed=1)
    print(f"\n{moral_type.label} learner (partner always cooperates):")
    print("  episode      Q(coop)    Q(defect)")
    for ep, qc, qd in trace:
        print(f"  {ep:>7} {qc:>12.2f} {qd:>12.2f}")
    print(f"  greedy policy after {EPISODES} episodes: {greedy}")

# the discounted return of a constant reward r is r / (1 - gamma); with
# gamma = 0.99 a selfish exploiter should value defection near 400 and
# a kind cooperator should value cooperation near 500
print("\nfixed points for comparison: 4/(1-0.99) = 400, 5/(1-0.99) = 500")
