import numpy as np
import pytest

from conformal_multiuser import synth
from conformal_multiuser.conformal import PredictionRecord


def make_record(members, truth, p_values=None, point=None, user=0, n_classes=None):
    n = n_classes or (len(p_values) if p_values is not None else 3)
    p = np.asarray(p_values if p_values is not None else np.full(n, 0.5), dtype=float)
    return PredictionRecord(tuple(sorted(members)), p, truth if point is None else point, truth, user)


def random_records(rng, max_records=50, max_classes=6):
    n_classes = int(rng.integers(1, max_classes + 1))
    k = int(rng.integers(1, max_records + 1))
    out = []
    for _ in range(k):
        members = [c for c in range(n_classes) if rng.random() < 0.4]
        out.append(
            PredictionRecord(
                tuple(members),
                rng.uniform(0.01, 1.0, size=n_classes),
                int(rng.integers(n_classes)),
                int(rng.integers(n_classes)),
                int(rng.integers(3)),
            )
        )
    return out, n_classes


@pytest.fixture
def small_data():
    return synth.generate(3, 3, 10, 2, 1.0, 0.5, seed=11)


@pytest.fixture(scope="session")
def shift_data():
    return synth.generate(3, 4, 40, 3, 1.5, 0.5, seed=7)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, detail = results[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({detail})")
