import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conformal_multiuser.core import (
    MultiUserDataset,
    SplitIndices,
    apply_scaler,
    fit_scaler,
    repetition_seed,
)


def column(values):
    return np.asarray(values, dtype=float)[:, None]


def test_fit_scaler_over_all_rows():
    p = fit_scaler(column([2, 4, 6]), [0, 1, 2])
    assert p.minimum[0] == 2 and p.maximum[0] == 6


def test_fit_scaler_constant_column():
    p = fit_scaler(column([5, 5]), [0, 1])
    assert p.minimum[0] == p.maximum[0] == 5


def test_fit_scaler_uses_only_given_rows():
    p = fit_scaler(column([3, 9]), [0])
    assert p.minimum[0] == p.maximum[0] == 3


def test_fit_scaler_empty_rows():
    with pytest.raises(ValueError):
        fit_scaler(column([1, 2]), [])


@pytest.mark.parametrize(
    "lo, hi, x, expected",
    [(2, 6, 4, 0.5), (5, 5, 5, 0.0), (0, 1, 2, 2.0)],
)
def test_apply_scaler_examples(lo, hi, x, expected):
    p = fit_scaler(column([lo, hi]), [0, 1])
    assert apply_scaler(p, [x])[0] == expected


def test_apply_scaler_dimension_mismatch():
    p = fit_scaler(np.zeros((2, 3)), [0, 1])
    with pytest.raises(ValueError):
        apply_scaler(p, [1.0, 2.0])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 20), st.integers(1, 4)), elements=finite))
def test_scaled_training_rows_in_unit_interval(X):
    rows = np.arange(X.shape[0])
    Z = apply_scaler(fit_scaler(X, rows), X)
    assert np.all(Z >= 0.0) and np.all(Z <= 1.0)


@settings(max_examples=60, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 20), st.just(1)), elements=finite, unique=True))
def test_scaling_preserves_order(X):
    # non-strict: values closer than an ulp of the range may merge
    Z = apply_scaler(fit_scaler(X, np.arange(X.shape[0])), X)
    order = np.argsort(X[:, 0])
    assert np.all(np.diff(Z[order, 0]) >= 0)


def test_dataset_rejects_nan():
    with pytest.raises(ValueError):
        MultiUserDataset(np.array([[np.nan]]), [0], [0], ("a",), ("u",))


def test_dataset_rejects_bad_index():
    with pytest.raises(ValueError):
        MultiUserDataset(np.zeros((1, 1)), [1], [0], ("a",), ("u",))


def test_dataset_is_read_only(small_data):
    with pytest.raises(ValueError):
        small_data.features[0, 0] = 1.0


def test_csv_round_trip(tmp_path, small_data):
    path = tmp_path / "d.csv"
    small_data.to_csv(path)
    back = MultiUserDataset.read_csv(path)
    assert np.array_equal(back.features, small_data.features)
    assert np.array_equal(back.labels, small_data.labels)
    assert np.array_equal(back.users, small_data.users)
    assert back.class_names == small_data.class_names
    assert back.user_names == small_data.user_names


def test_split_indices_reject_overlap():
    with pytest.raises(ValueError):
        SplitIndices([0, 1], [1], [2])


def test_split_indices_reject_empty_test():
    with pytest.raises(ValueError):
        SplitIndices([0], [1], [])


def test_repetition_seed():
    assert repetition_seed(100, 3) == 103
