"""Prediction-set visualizations and their machine-readable twins."""

from .charts import (
    boxplot_svg,
    graph_dot,
    graph_svg,
    heatmap_svg,
    lolliplot_svg,
    multiset_svg,
    write_boxplot,
    write_cell_charts,
    write_graph,
    write_heatmap,
    write_lolliplot,
    write_multiset,
)
from .sets import (
    CooccurrenceGraph,
    box_stats,
    column_normalize,
    cooccurrence_counts,
    cooccurrence_graph,
    cooccurrence_matrix,
    set_frequencies,
    zdcm,
)


def multiset_chart(records, class_names, max_sets: int = 20):
    """Top ``max_sets`` distinct prediction sets with frequencies, plus the SVG."""
    freqs = set_frequencies(records, max_sets)
    return freqs, multiset_svg(freqs, list(class_names))


__all__ = [
    "CooccurrenceGraph",
    "box_stats",
    "boxplot_svg",
    "column_normalize",
    "cooccurrence_counts",
    "cooccurrence_graph",
    "cooccurrence_matrix",
    "graph_dot",
    "graph_svg",
    "heatmap_svg",
    "lolliplot_svg",
    "multiset_chart",
    "multiset_svg",
    "set_frequencies",
    "write_boxplot",
    "write_cell_charts",
    "write_graph",
    "write_heatmap",
    "write_lolliplot",
    "write_multiset",
    "zdcm",
]
