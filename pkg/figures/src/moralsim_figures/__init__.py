"""Publication-style figures for simulator CSV outputs.

The package reads only the documented CSV files (coop_by_type.csv,
outcomes.csv, popularity.csv, selection_matrix.csv,
cumulative_rewards.csv and its normalized companion) and renders each
figure as SVG and PNG.  See the fig-* console scripts.
"""

from .palette import (
    POPULATION_LABELS,
    TYPE_COLORS,
    TYPE_LABELS,
    agent_types_for_label,
    population_color,
)
from .plots import (
    coop_curves,
    outcome_curves,
    popularity_bars,
    reward_matrix,
    selection_heatmap,
    selection_network,
    smooth,
    top_edges,
)
from .schema import (
    SchemaError,
    load_coop,
    load_cumulative,
    load_normalized,
    load_outcomes,
    load_popularity,
    load_selection_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "POPULATION_LABELS", "TYPE_COLORS", "TYPE_LABELS",
    "agent_types_for_label", "population_color",
    "coop_curves", "outcome_curves", "popularity_bars", "reward_matrix",
    "selection_heatmap", "selection_network", "smooth", "top_edges",
    "SchemaError", "load_coop", "load_cumulative", "load_normalized",
    "load_outcomes", "load_popularity", "load_selection_matrix",
    "__version__",
]
