"""A full population episode loop, inspected with the metrics toolkit.

Sixteen agents — eight deontological plus one of every other type — pick
partners, play one dilemma game each, and learn.  We watch cooperation
split by type, track the social outcome measures, and finish with the
selection edges that dominate the final episodes.
"""

import numpy as np

from moralsim import (
    Hyperparams,
    MoralType,
    PopulationConfig,
    cooperation_rate,
    moving_average,
    population_types,
    run_simulation,
    selection_matrix,
    social_outcomes,
    top_selection_edges,
)

# small hidden layer keeps this demo in the tens-of-seconds range; the
# full-scale study uses hidden=256 and 30000 episodes
cfg = PopulationConfig.for_label("majority-De", episodes=800,
                                 hp=Hyperparams(hidden=32))
print("population:", ", ".join(t.label for t in population_types(cfg)))

log = run_simulation(cfg, seed=5)

coop = np.array([cooperation_rate(rec) for rec in log.episodes])
de = np.array([cooperation_rate(rec, log.agent_types, MoralType.DEONTOLOGICAL)
               for rec in log.episodes])
mde = np.array([cooperation_rate(rec, log.agent_types,
                                 MoralType.MALICIOUS_DEONTOLOGICAL)
                for rec in log.episodes])

print("\ncooperation, trailing mean over 100 episodes:")
print("  episode     all      De     mDe")
ma_all, ma_de, ma_mde = (moving_average(x, 100) for x in (coop, de, mde))
for ep in (99, 199, 399, 599, 799):
    print(f"  {ep + 1:>7} {ma_all[ep]:>7.2f} {ma_de[ep]:>7.2f} {ma_mde[ep]:>7.2f}")

first, last = log.episodes[0], log.episodes[-1]
for name, rec in (("first", first), ("last", last)):
    out = social_outcomes(rec)
    print(f"\nsocial outcomes, {name} episode: collective={out.r_collective:.0f} "
          f"gini={out.r_gini:.2f} min={out.r_min:.2f}")

# who ends up popular? count selections received over the last 100
# episodes and keep the edges above the 85th percentile
mat = selection_matrix([log])
recent = np.zeros_like(mat.counts)
for rec in log.episodes[-100:]:
    for selector, selected in enumerate(rec.selections):
        recent[selector, selected] += 1
labels = [f"{t.label}{i}" for i, t in enumerate(log.agent_types)]
print("\nbusiest selection edges of the final 100 episodes:")
for i, j, w in sorted(top_selection_edges(recent), key=lambda e: -e[2])[:8]:
    print(f"  {labels[i]:>6} -> {labels[j]:<6} {w:.0f} times")
