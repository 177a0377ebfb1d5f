"""Rendering the standard figures from experiment CSVs.

The plotting package is deliberately decoupled from the simulator: it
reads the aggregate CSV files and nothing else, so it works just as
well on archived results.  Each figure is also available as a console
script (fig-coop-curves, fig-outcome-curves, fig-popularity,
fig-selection-heatmap, fig-selection-network, fig-reward-matrix).
"""

import pathlib

from moralsim import ExperimentConfig, run_experiment
from moralsim_figures import plots, schema

out = pathlib.Path("demo_out")
data = out / "all_populations"

# one reduced run of every population; a desk-scale stand-in for the
# full 30000-episode, 20-run study
run_experiment(ExperimentConfig(all_populations=True, episodes=150, runs=1,
                                seed=4, hidden=16, out_dir=str(data)))

figures = {
    "coop_curves": plots.coop_curves(
        schema.load_coop(str(data / "coop_by_type.csv")), ma_window=30),
    "coop_by_type_majority-Ut": plots.coop_curves(
        schema.load_coop(str(data / "coop_by_type.csv")), ma_window=30,
        by_type=True, population="majority-Ut"),
    "outcome_curves": plots.outcome_curves(
        schema.load_outcomes(str(data / "outcomes.csv")), ma_window=30),
    "popularity": plots.popularity_bars(
        schema.load_popularity(str(data / "popularity.csv"))),
    "selection_heatmap": plots.selection_heatmap(
        schema.load_selection_matrix(str(data / "selection_matrix.csv")),
        population="majority-De"),
    "selection_network": plots.selection_network(
        schema.load_selection_matrix(str(data / "selection_matrix.csv")),
        population="majority-De"),
    "reward_matrix": plots.reward_matrix(
        schema.load_cumulative(str(data / "cumulative_rewards.csv")),
        schema.load_normalized(str(data / "cumulative_rewards_normalized.csv"))),
}

dest = out / "figures"
dest.mkdir(parents=True, exist_ok=True)
for stem, fig in figures.items():
    path = dest / f"{stem}.png"
    fig.savefig(path, dpi=150)
    print("wrote", path)

print("\nthe console-script equivalent of the first figure:")
print(f"  fig-coop-curves --in {data / 'coop_by_type.csv'} "
      f"--out {dest} --ma-window 30")
