"""SVG/DOT renderers. Each writer also leaves a CSV or JSON twin with the
plotted numbers so the data can be checked without looking at pixels."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..metrics import confusion_matrix
from ..stats import HYPOTHESIS_PAIRS
from . import sets
from .svg import Svg, num, shade

CELL = 44.0
MARGIN = 110.0
PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([num(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def heatmap_svg(matrix, labels, title: str = "", integer: bool = False) -> Svg:
    """Annotated heatmap; rows are predicted classes, columns true classes."""
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    scale = m.max() if integer and m.max() > 0 else 1.0
    svg = Svg(MARGIN + n * CELL + 20, MARGIN + n * CELL + 40)
    svg.text((MARGIN + n * CELL) / 2 + 10, 20, title, font_size=13.0)
    for i, lab in enumerate(labels):
        svg.text(MARGIN - 6, MARGIN + (i + 0.6) * CELL, lab, anchor="end")
        cx = MARGIN + (i + 0.5) * CELL
        svg.text(cx, MARGIN - 8, lab, transform=f"rotate(-45 {num(cx)} {num(MARGIN - 8)})", anchor="start")
    for r in range(n):
        for c in range(n):
            v = m[r, c] / scale
            x, y = MARGIN + c * CELL, MARGIN + r * CELL
            svg.rect(x, y, CELL, CELL, fill=shade(v), stroke="#cccccc")
            label = str(int(round(m[r, c]))) if integer else f"{m[r, c]:.2f}"
            svg.text(x + CELL / 2, y + CELL * 0.6, label, fill="#ffffff" if v > 0.5 else "#000000")
    svg.text(MARGIN + n * CELL / 2, MARGIN + n * CELL + 28, "true class")
    return svg


def write_heatmap(stem, matrix, labels, title: str = "", integer: bool = False) -> None:
    stem = Path(stem)
    heatmap_svg(matrix, labels, title, integer).save(stem.with_suffix(".svg"))
    m = np.asarray(matrix)
    rows = [[lab] + [int(v) if integer else float(v) for v in m[i]] for i, lab in enumerate(labels)]
    _write_csv(stem.with_suffix(".csv"), ["predicted\\true"] + list(labels), rows)


def _node_widths(degree: np.ndarray) -> np.ndarray:
    top = degree.max()
    if top == 0:
        return np.full(degree.shape, 0.3)
    return 0.3 + 1.7 * degree / top


def _pen_widths(graph: sets.CooccurrenceGraph, max_pen: float = 8.0) -> list[float]:
    top = max((w for _, _, w in graph.edges), default=0)
    return [max_pen * w / top for _, _, w in graph.edges]


def graph_dot(graph: sets.CooccurrenceGraph, labels) -> str:
    widths = _node_widths(graph.degree)
    lines = [
        "graph cooccurrence {",
        '  layout=circo; overlap=false; splines=true; start=1;',
        '  node [shape=circle, fixedsize=true, style=filled, fillcolor="#c6dbef", fontsize=10];',
    ]
    for i, lab in enumerate(labels):
        lines.append(f'  n{i} [label="{lab}", width={num(widths[i])}, degree={int(graph.degree[i])}];')
    for (a, b, w), pen in zip(graph.edges, _pen_widths(graph)):
        lines.append(f'  n{a} -- n{b} [weight={w}, label="{w}", penwidth={num(pen)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_svg(graph: sets.CooccurrenceGraph, labels, title: str = "") -> Svg:
    """Fixed circular layout, classes placed clockwise by index."""
    size, radius = 420.0, 150.0
    svg = Svg(size, size + 30)
    svg.text(size / 2, 20, title, font_size=13.0)
    cx, cy = size / 2, size / 2 + 20
    n = graph.n_classes
    pos = [
        (cx + radius * math.sin(2 * math.pi * i / n), cy - radius * math.cos(2 * math.pi * i / n))
        for i in range(n)
    ]
    for (a, b, w), pen in zip(graph.edges, _pen_widths(graph)):
        svg.line(*pos[a], *pos[b], stroke="#636363", stroke_width=float(pen), stroke_opacity="0.7")
    for i, lab in enumerate(labels):
        # DOT widths are inches; 20 px per unit keeps nodes readable
        svg.circle(*pos[i], 20.0 * _node_widths(graph.degree)[i], fill="#c6dbef", stroke="#08306b")
        svg.text(pos[i][0], pos[i][1] + 4, lab)
    return svg


def write_graph(stem, graph: sets.CooccurrenceGraph, labels, title: str = "") -> None:
    stem = Path(stem)
    stem.with_suffix(".dot").write_text(graph_dot(graph, labels), encoding="utf-8")
    graph_svg(graph, labels, title).save(stem.with_suffix(".svg"))


def multiset_svg(freqs, labels, title: str = "") -> Svg:
    """UpSet-style chart: frequency bars over a class membership dot matrix."""
    n_sets, n_classes = len(freqs), len(labels)
    col, row, left, bar_h = 28.0, 22.0, 120.0, 160.0
    top = 40.0
    width = left + max(n_sets, 1) * col + 20
    height = top + bar_h + 20 + n_classes * row + 20
    svg = Svg(width, height)
    svg.text(width / 2, 20, title, font_size=13.0)
    peak = max((f for _, f in freqs), default=1)
    base = top + bar_h
    for j, (members, f) in enumerate(freqs):
        x = left + j * col
        h = bar_h * f / peak
        svg.rect(x + 4, base - h, col - 8, h, fill="#3f3f3f")
        svg.text(x + col / 2, base - h - 4, str(f), font_size=9.0)
    grid_top = base + 20
    for i, lab in enumerate(labels):
        y = grid_top + (i + 0.5) * row
        svg.text(left - 8, y + 4, lab, anchor="end")
        if i % 2 == 0:
            svg.rect(left, grid_top + i * row, n_sets * col, row, fill="#f2f2f2")
    for j, (members, _) in enumerate(freqs):
        x = left + (j + 0.5) * col
        for i in range(n_classes):
            on = i in members
            svg.circle(x, grid_top + (i + 0.5) * row, 6.0, fill="#252525" if on else "#d9d9d9")
        if len(members) > 1:
            y1 = grid_top + (min(members) + 0.5) * row
            y2 = grid_top + (max(members) + 0.5) * row
            svg.line(x, y1, x, y2, stroke="#252525", stroke_width=2.0)
    return svg


def write_multiset(stem, records, labels, max_sets: int = 20, title: str = "") -> list:
    stem = Path(stem)
    freqs = sets.set_frequencies(records, max_sets)
    multiset_svg(freqs, labels, title).save(stem.with_suffix(".svg"))
    payload = {
        "n_records": len(records),
        "max_sets": max_sets,
        "sets": [{"classes": [labels[c] for c in m], "frequency": f} for m, f in freqs],
    }
    _write_json(stem.with_suffix(".json"), payload)
    return freqs


def boxplot_svg(coverage: dict, comparisons: dict | None = None, title: str = "") -> Svg:
    """Box per strategy in insertion order, with significance brackets."""
    names = list(coverage)
    stats_ = {k: sets.box_stats(v) for k, v in coverage.items()}
    comparisons = comparisons or {}
    pairs = [(a, b) for a, b in HYPOTHESIS_PAIRS if f"{a}_vs_{b}" in comparisons and a in coverage and b in coverage]
    all_vals = np.concatenate([np.asarray(v, dtype=float) for v in coverage.values()])
    lo, hi = float(all_vals.min()), float(all_vals.max())
    if hi - lo < 1e-9:
        lo, hi = lo - 0.01, hi + 0.01
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    left, top, plot_h, slot = 60.0, 40.0 + 22.0 * len(pairs), 240.0, 80.0
    width = left + slot * len(names) + 20
    svg = Svg(width, top + plot_h + 50)
    svg.text(width / 2, 18, title, font_size=13.0)

    def y_of(v):
        return top + plot_h * (hi - v) / (hi - lo)

    svg.line(left, top, left, top + plot_h)
    for t in np.linspace(lo, hi, 5):
        svg.line(left - 4, y_of(t), left, y_of(t))
        svg.text(left - 6, y_of(t) + 4, f"{t:.3f}", anchor="end", font_size=9.0)
    for i, name in enumerate(names):
        s = stats_[name]
        cx = left + (i + 0.5) * slot
        color = PALETTE[i % len(PALETTE)]
        svg.line(cx, y_of(s["whisker_low"]), cx, y_of(s["q1"]))
        svg.line(cx, y_of(s["q3"]), cx, y_of(s["whisker_high"]))
        for w in ("whisker_low", "whisker_high"):
            svg.line(cx - 10, y_of(s[w]), cx + 10, y_of(s[w]))
        svg.rect(cx - 20, y_of(s["q3"]), 40, max(y_of(s["q1"]) - y_of(s["q3"]), 0.0),
                 fill=color, fill_opacity="0.6", stroke="#333333")
        svg.line(cx - 20, y_of(s["median"]), cx + 20, y_of(s["median"]), stroke_width=2.0)
        for o in s["outliers"]:
            svg.circle(cx, y_of(o), 2.5, fill="none", stroke="#333333")
        svg.text(cx, top + plot_h + 18, name)
    for k, (a, b) in enumerate(pairs):
        xa = left + (names.index(a) + 0.5) * slot
        xb = left + (names.index(b) + 0.5) * slot
        y = top - 10 - 22.0 * k
        svg.line(xa, y + 5, xa, y)
        svg.line(xa, y, xb, y)
        svg.line(xb, y, xb, y + 5)
        svg.text((xa + xb) / 2, y - 3, comparisons[f"{a}_vs_{b}"]["stars"], font_size=10.0)
    svg.text(16, top + plot_h / 2, "coverage", transform=f"rotate(-90 16 {num(top + plot_h / 2)})")
    return svg


def write_boxplot(stem, coverage: dict, comparisons: dict | None = None, title: str = "") -> None:
    stem = Path(stem)
    boxplot_svg(coverage, comparisons, title).save(stem.with_suffix(".svg"))
    payload = {
        "boxes": {k: sets.box_stats(v) for k, v in coverage.items()},
        "values": {k: [float(x) for x in v] for k, v in coverage.items()},
        "comparisons": comparisons or {},
    }
    _write_json(stem.with_suffix(".json"), _finite(payload))


def _finite(obj):
    # strict JSON has no infinities
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def lolliplot_svg(grid: dict, title: str = "") -> Svg:
    """``grid`` maps strategy -> classifier -> mean set size; one panel per
    strategy, classifiers in the order given."""
    strategies = list(grid)
    classifiers = list(dict.fromkeys(c for s in strategies for c in grid[s]))
    peak = max((v for s in strategies for v in grid[s].values()), default=1.0)
    peak = peak if peak > 0 else 1.0
    panel_w, label_w, row = 170.0, 70.0, 26.0
    top = 50.0
    width = label_w + panel_w * len(strategies) + 20
    height = top + row * len(classifiers) + 30
    svg = Svg(width, height)
    svg.text(width / 2, 18, title, font_size=13.0)
    for j, clf in enumerate(classifiers):
        svg.text(label_w - 8, top + (j + 0.5) * row + 4, clf, anchor="end")
    for i, strat in enumerate(strategies):
        x0 = label_w + i * panel_w + 10
        span = panel_w - 50
        svg.text(x0 + span / 2, top - 12, strat)
        svg.line(x0, top, x0, top + row * len(classifiers), stroke="#999999")
        for j, clf in enumerate(classifiers):
            if clf not in grid[strat]:
                continue
            v = float(grid[strat][clf])
            y = top + (j + 0.5) * row
            x = x0 + span * v / peak
            svg.line(x0, y, x, y, stroke="#636363", stroke_width=2.0)
            svg.circle(x, y, 5.0, fill=PALETTE[j % len(PALETTE)])
            svg.text(x + 8, y + 4, f"{v:.2f}", anchor="start", font_size=9.0)
    return svg


def write_lolliplot(stem, grid: dict, title: str = "") -> None:
    stem = Path(stem)
    lolliplot_svg(grid, title).save(stem.with_suffix(".svg"))
    rows = [[s, c, float(v)] for s in grid for c, v in grid[s].items()]
    _write_csv(stem.with_suffix(".csv"), ["strategy", "classifier", "setsize"], rows)


def write_cell_charts(outdir, prefix: str, records, class_names, max_sets: int = 20) -> list[Path]:
    """Co-occurrence matrix and graph, ZDCM, confusion matrix and multiset
    chart for one (dataset, classifier, strategy) cell."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    labels = list(class_names)
    n = len(labels)
    write_heatmap(outdir / f"{prefix}_cooc", sets.cooccurrence_matrix(records, n), labels, "co-occurrence")
    write_graph(outdir / f"{prefix}_coocgraph", sets.cooccurrence_graph(records, n), labels, "co-occurrence graph")
    write_heatmap(outdir / f"{prefix}_zdcm", sets.zdcm(records, n), labels, "zero-diagonal confusion")
    write_heatmap(outdir / f"{prefix}_cm", confusion_matrix(records, n), labels, "confusion", integer=True)
    write_multiset(outdir / f"{prefix}_multiset", records, labels, max_sets, "prediction sets")
    return sorted(outdir.glob(f"{prefix}_*"))
