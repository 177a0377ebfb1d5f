"""Shared agent-type palette so every figure colors types identically."""

# canonical type order; population labels are "majority-<type>"
TYPE_LABELS = ("S", "Ut", "aUt", "De", "mDe", "V-Eq", "V-In", "V-Ki", "V-Ag")

TYPE_COLORS = {
    "S": "#7f7f7f",      # gray
    "Ut": "#1f77b4",     # blue
    "aUt": "#d62728",    # red
    "De": "#2ca02c",     # green
    "mDe": "#8c564b",    # brown
    "V-Eq": "#9467bd",   # purple
    "V-In": "#e377c2",   # pink
    "V-Ki": "#17becf",   # cyan
    "V-Ag": "#ff7f0e",   # orange
}

POPULATION_LABELS = tuple(f"majority-{t}" for t in TYPE_LABELS)


def population_color(label: str) -> str:
    """Populations inherit the color of their majority type."""
    t = label.removeprefix("majority-")
    return TYPE_COLORS.get(t, "#000000")


def agent_types_for_label(label: str, n: int) -> list[str] | None:
    """Per-agent type labels in id order for a single-majority population.

    The simulator lays populations out as n-8 majority agents followed
    by one agent of each remaining type, both sorted by descending count
    with ties broken in canonical type order.  Returns None when the
    label is not one of the standard compositions, so callers can fall
    back to uncolored ids.
    """
    if not label.startswith("majority-"):
        return None
    majority = label.removeprefix("majority-")
    if majority not in TYPE_LABELS or n - 8 < 1:
        return None
    counts = {t: (n - 8 if t == majority else 1) for t in TYPE_LABELS}
    ordered = sorted(counts, key=lambda t: (-counts[t], TYPE_LABELS.index(t)))
    out: list[str] = []
    for t in ordered:
        out.extend([t] * counts[t])
    return out
