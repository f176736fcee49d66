import xml.etree.ElementTree as ET

import numpy as np
import pytest

from conformal_multiuser import viz
from conformal_multiuser.viz import charts, sets
from conftest import make_record, random_records
from oracles import cooccurrence_oracle

A, B, C = 0, 1, 2


def recs(*members, n=3):
    return [make_record(m, 0, n_classes=n) for m in members]


def test_cooccurrence_three_way_set():
    m = sets.cooccurrence_matrix(recs([A, B, C]))
    assert np.allclose(m, [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])


def test_cooccurrence_example():
    # A with B twice, A with C once
    r = recs([A, B], [A, B], [A, C])
    raw = sets.cooccurrence_counts(r)
    assert raw[B, A] == 2 and raw[C, A] == 1 and raw[C, B] == 0
    m = sets.cooccurrence_matrix(r)
    assert m[B, A] == pytest.approx(2 / 3) and m[C, A] == pytest.approx(1 / 3)
    assert m[A, B] == 1.0 and m[A, C] == 1.0


def test_cooccurrence_singletons_are_zero():
    m = sets.cooccurrence_matrix(recs([A], [B], []))
    assert np.all(m == 0)


@pytest.mark.parametrize("seed", range(30))
def test_cooccurrence_against_oracle(seed):
    r, n = random_records(np.random.default_rng(seed))
    raw, norm = cooccurrence_oracle([x.prediction_set for x in r], n)
    assert np.array_equal(sets.cooccurrence_counts(r, n), raw)
    m = sets.cooccurrence_matrix(r, n)
    assert np.allclose(m, norm, atol=1e-12)
    sums = m.sum(axis=0)
    assert np.all(np.isclose(sums, 1.0, atol=1e-9) | (sums == 0))
    assert np.array_equal(sets.cooccurrence_counts(r, n), sets.cooccurrence_counts(r, n).T)


def test_graph_edges_and_degree():
    g = sets.cooccurrence_graph(recs([A, B], [A, B], [A, C]))
    assert g.edges == ((A, B, 2), (A, C, 1))
    assert list(g.degree) == [3, 2, 1]


def test_graph_widths():
    g = sets.cooccurrence_graph(recs([A, B], [A, B], [A, C]))
    assert charts._pen_widths(g) == [8.0, 4.0]
    w = charts._node_widths(g.degree)
    assert w[A] == pytest.approx(2.0) and w[C] == pytest.approx(0.3 + 1.7 / 3)


def test_graph_dot_is_circular_and_labelled():
    g = sets.cooccurrence_graph(recs([A, B]))
    dot = charts.graph_dot(g, ["walk", "jog", "sit"])
    assert "circo" in dot and '"walk"' in dot and "penwidth" in dot


def points(truths, preds):
    return [make_record([], t, np.full(3, 0.5), point=p) for t, p in zip(truths, preds)]


def test_zdcm_examples():
    # true A: predicted B twice, C once, A five times
    r = points([A] * 8, [B, B, C, A, A, A, A, A])
    z = sets.zdcm(r, 3)
    assert z[B, A] == pytest.approx(2 / 3) and z[C, A] == pytest.approx(1 / 3)
    assert np.all(np.diag(z) == 0)
    assert np.all(sets.zdcm(points([A, B], [A, B]), 3) == 0)


def test_set_frequencies_order_and_truncation():
    r = recs([A], [A], [B], [A, B], [A, B], [], [C])
    freqs = sets.set_frequencies(r)
    assert freqs == [((A,), 2), ((A, B), 2), ((), 1), ((B,), 1), ((C,), 1)]
    assert sets.set_frequencies(r, 2) == freqs[:2]


def test_multiset_chart():
    r = recs([A], [A, B], [A])
    freqs, svg = viz.multiset_chart(r, ["a", "b", "c"], max_sets=20)
    assert freqs[0] == ((A,), 2)
    ET.fromstring(svg.render())


def test_box_stats_quartiles():
    s = sets.box_stats([1, 2, 3, 4])
    assert (s["q1"], s["median"], s["q3"]) == (1.75, 2.5, 3.25)
    assert s["outliers"] == []


def test_box_stats_outlier():
    s = sets.box_stats([1, 2, 3, 4, 100])
    assert s["outliers"] == [100.0] and s["whisker_high"] == 4.0


def test_lolliplot_values(tmp_path):
    grid = {"MM": {"NB": 1.5, "RF": 1.22}, "UIM": {"NB": 1.1, "RF": 1.0}}
    charts.write_lolliplot(tmp_path / "lolli", grid)
    text = (tmp_path / "lolli.csv").read_text()
    assert "MM,RF,1.2200" in text
    assert "1.22" in (tmp_path / "lolli.svg").read_text()


def test_boxplot_brackets(tmp_path):
    cov = {"MM": [0.95, 0.96, 0.94], "UIM": [0.8, 0.82, 0.85], "UCM": [0.95, 0.95, 0.96]}
    comp = {"UIM_vs_MM": {"stars": "***"}, "UCM_vs_UIM": {"stars": "**"}}
    charts.write_boxplot(tmp_path / "box", cov, comp)
    root = ET.parse(tmp_path / "box.svg").getroot()
    texts = [t.text for t in root.iter() if t.tag.endswith("text")]
    assert "***" in texts and "**" in texts


def test_cell_charts_deterministic(tmp_path):
    r, n = random_records(np.random.default_rng(3), max_records=40, max_classes=5)
    names = [f"c{i}" for i in range(n)]
    a = charts.write_cell_charts(tmp_path / "a", "x", r, names)
    b = charts.write_cell_charts(tmp_path / "b", "x", r, names)
    assert [p.name for p in a] == [p.name for p in b]
    assert {p.suffix for p in a} == {".svg", ".csv", ".dot", ".json"}
    for p, q in zip(a, b):
        assert p.read_bytes() == q.read_bytes()
        if p.suffix == ".svg":
            ET.parse(p)
