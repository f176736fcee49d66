"""Repetition aggregation and Welch's t-test on coverage distributions."""

from __future__ import annotations

import math

import numpy as np

# strategy pairs compared on coverage, per classifier
HYPOTHESIS_PAIRS = (("UIM", "MM"), ("UIM", "UDM"), ("UDM", "MM"), ("UCM", "UIM"))

_STARS = ((0.0001, "****"), (0.001, "***"), (0.01, "**"), (0.05, "*"))


def aggregate(values) -> tuple[float, float]:
    """Mean and sample standard deviation (n - 1 denominator)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least two values")
    return float(v.mean()), float(v.std(ddof=1))


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(0.5 * df, 0.5, df / (df + t * t))


def welch_t_test(a, b) -> tuple[float, float]:
    """Unpaired two-sided Welch test. Returns ``(t, p)``.

    When both samples have zero variance the statistic is undefined; the
    result is ``(0, 1)`` for equal means and ``(+-inf, 0)`` otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0.0:
        if ma == mb:
            return 0.0, 1.0
        return math.copysign(math.inf, ma - mb), 0.0
    t = float((ma - mb) / math.sqrt(se2))
    df = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return t, t_sf_two_sided(t, df)


def significance_stars(p: float) -> str:
    for bound, stars in _STARS:
        if p <= bound:
            return stars
    return "ns"


def compare(a, b) -> dict:
    t, p = welch_t_test(a, b)
    return {
        "t": t,
        "p": p,
        "stars": significance_stars(p),
        "mean_a": float(np.mean(a)),
        "mean_b": float(np.mean(b)),
    }


def hypothesis_report(coverage: dict) -> dict:
    """Welch comparisons for every strategy pair available.

    ``coverage`` maps dataset -> classifier -> strategy -> per-repetition
    coverage list. Pairs whose strategies are missing are skipped.
    """
    out: dict = {}
    for dataset in sorted(coverage):
        for clf in sorted(coverage[dataset]):
            by_strategy = coverage[dataset][clf]
            cell = {}
            for left, right in HYPOTHESIS_PAIRS:
                if left in by_strategy and right in by_strategy:
                    cell[f"{left}_vs_{right}"] = compare(by_strategy[left], by_strategy[right])
            out.setdefault(dataset, {})[clf] = cell
    return out
