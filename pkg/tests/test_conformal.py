import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conformal_multiuser import classifiers, synth
from conformal_multiuser.classifiers import ScoreModel
from conformal_multiuser.conformal import (
    ConformalModel,
    calibrate,
    nonconformity,
    p_value,
    predict_set,
    quantile_rank,
    read_records,
    threshold_from_scores,
    write_records,
)
from conformal_multiuser.core import apply_scaler, fit_scaler
from oracles import p_value_oracle, rank_threshold


class FixedScores(ScoreModel):
    """Scores looked up by the integer in the first feature."""

    def __init__(self, table):
        self.table = np.asarray(table, dtype=float)
        self.n_classes = self.table.shape[1]
        self.n_features = 1

    def _scores(self, X):
        return self.table[X[:, 0].astype(int)]


def model_with_cal(cal_alphas, epsilon=0.1, test_rows=()):
    """Calibrated model whose calibration nonconformity scores are exactly
    ``cal_alphas`` (class 0 scores 1 - alpha)."""
    rows = [[1.0 - a, a] for a in cal_alphas] + list(test_rows)
    base = FixedScores(rows)
    X_cal = np.arange(len(cal_alphas))[:, None]
    return calibrate(base, X_cal, np.zeros(len(cal_alphas), dtype=int), epsilon), len(cal_alphas)


@pytest.mark.parametrize("score, expected", [(1.0, 0.0), (0.25, 0.75), (0.0, 1.0)])
def test_nonconformity(score, expected):
    assert nonconformity(score) == expected


def test_threshold_mid_rank():
    cal = np.round(np.arange(1, 10) / 10, 10)
    assert quantile_rank(9, 0.5) == 5
    assert threshold_from_scores(cal, 0.5) == 0.5


def test_threshold_clamps_to_one():
    cal = np.round(np.arange(1, 10) / 10, 10)
    assert quantile_rank(9, 0.05) == 10
    assert threshold_from_scores(cal, 0.05) == 1.0


def test_threshold_nineteen_scores():
    cal = [k / 20 for k in range(1, 20)]
    expected = rank_threshold(cal, 0.05)
    assert expected == 0.95
    model, _ = model_with_cal(cal, 0.05)
    assert model.q_hat == pytest.approx(expected, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=40),
    st.floats(0.01, 0.99),
)
def test_threshold_matches_rank_oracle(cal, eps):
    cal = sorted(cal)
    assert threshold_from_scores(np.array(cal), eps) == rank_threshold(cal, eps)


def test_calibrate_sorts_scores():
    model, _ = model_with_cal([0.8, 0.2, 0.5])
    assert list(model.cal_scores) == pytest.approx([0.2, 0.5, 0.8])


def test_calibrate_errors():
    base = FixedScores([[1.0, 0.0]])
    with pytest.raises(ValueError):
        calibrate(base, np.zeros((0, 1)), [], 0.1)
    with pytest.raises(ValueError):
        calibrate(base, [[0]], [0], 1.0)


def fixed_model(row, q_hat):
    return ConformalModel(FixedScores([row]), np.array([0.1]), 0.1, q_hat)


def test_predict_set_single():
    assert predict_set(fixed_model([0.7, 0.25, 0.05], 0.5), [0]).prediction_set == (0,)


def test_predict_set_everything_at_one():
    assert predict_set(fixed_model([0.7, 0.25, 0.05], 1.0), [0]).prediction_set == (0, 1, 2)


def test_predict_set_can_be_empty():
    rec = predict_set(fixed_model([0.4, 0.35, 0.25], 0.5), [0])
    assert rec.prediction_set == ()
    assert rec.point == 0


def test_p_value_examples():
    model, n = model_with_cal([0.2, 0.5, 0.8], test_rows=[[0.5, 0.5], [1.0, 0.0], [0.0, 1.0]])
    assert p_value(model, [n], 0) == pytest.approx(0.75)
    assert p_value(model, [n + 1], 0) == 1.0
    assert p_value(model, [n + 2], 0) == pytest.approx(1 / 4)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]), min_size=1, max_size=30),
    st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]),
)
def test_p_value_matches_oracle(cal, alpha):
    model, _ = model_with_cal(cal)
    got = model.p_values_from_alphas(np.array([alpha]))[0]
    assert got == pytest.approx(p_value_oracle(list(model.cal_scores), alpha), abs=1e-15)


def _trained(seed=0, eps=0.1):
    data = synth.generate(1, 3, 200, 2, 0.0, 0.8, seed=seed)
    rng = np.random.default_rng(seed)
    idx = rng.permutation(data.n_instances)
    tr, ca, te = idx[:300], idx[300:450], idx[450:]
    sc = fit_scaler(data, tr)
    X = apply_scaler(sc, data.features)
    base = classifiers.fit("gnb", X[tr], data.labels[tr], 3)
    return base, X, data.labels, ca, te


def test_monotone_in_epsilon():
    base, X, y, ca, te = _trained()
    strict = calibrate(base, X[ca], y[ca], 0.05)
    loose = calibrate(base, X[ca], y[ca], 0.2)
    assert strict.q_hat >= loose.q_hat
    for a, b in zip(strict.predict(X[te]), loose.predict(X[te])):
        assert set(b.prediction_set) <= set(a.prediction_set)


def test_set_membership_and_p_value_ordering():
    base, X, y, ca, te = _trained(1)
    model = calibrate(base, X[ca], y[ca], 0.1)
    scores = base.predict_scores(X[te])
    for rec, s in zip(model.predict(X[te], y[te]), scores):
        alpha = 1.0 - s
        assert set(rec.prediction_set) == set(np.flatnonzero(alpha <= model.q_hat))
        assert np.all(rec.p_values > 0) and np.all(rec.p_values <= 1)
        order = np.argsort(-s, kind="stable")
        assert np.all(np.diff(rec.p_values[order]) <= 1e-15)
        assert rec.point == int(np.argmax(s))


def test_marginal_coverage_exchangeable():
    """500 calibrate/predict cycles at epsilon = 0.1 on one-user data.

    Classes overlap so that scores are continuous; with well separated
    clusters most calibration scores tie at 0 and coverage overshoots.
    """
    data = synth.generate(1, 3, 100, 2, 0.0, 1.0, seed=3, spread=1.0)
    n = data.n_instances
    coverages = []
    for cycle in range(500):
        rng = np.random.default_rng(cycle)
        idx = rng.permutation(n)
        tr, ca, te = idx[:150], idx[150:225], idx[225:]
        sc = fit_scaler(data, tr)
        X = apply_scaler(sc, data.features)
        base = classifiers.fit("gnb", X[tr], data.labels[tr], 3)
        model = calibrate(base, X[ca], data.labels[ca], 0.1)
        recs = model.predict(X[te], data.labels[te])
        coverages.append(np.mean([r.truth in r.prediction_set for r in recs]))
    mean = float(np.mean(coverages))
    assert mean >= 0.9
    assert abs(mean - 0.9) <= 0.02


def test_records_csv_round_trip(tmp_path):
    base, X, y, ca, te = _trained(2)
    model = calibrate(base, X[ca], y[ca], 0.1)
    recs = model.predict(X[te][:20], y[te][:20], np.zeros(20, dtype=int))
    path = tmp_path / "records.csv"
    write_records(path, recs, ["a", "b", "c"], ["alice"])
    back, classes, users = read_records(path)
    assert classes == ["a", "b", "c"] and users == ["alice"]
    header = path.read_text().splitlines()[0]
    assert header == "user,truth,point,set,p_a,p_b,p_c"
    for r, b in zip(recs, back):
        assert r.prediction_set == b.prediction_set
        assert r.point == b.point and r.truth == b.truth
        assert np.array_equal(r.p_values, b.p_values)
