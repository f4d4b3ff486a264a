import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.metrics import cohen_kappa_score

from infolimit.confusion import (
    ConfusionCounts, average_rate, check_rate_relation, k_max, kappa, kappa_from_class_sizes,
    kappa_from_rates, rates,
)
from infolimit.errors import DegenerateMatrixError

cells = st.integers(0, 5000)


def _expand(c):
    y_true = [1] * c.n1 + [2] * c.n2
    y_pred = [1] * c.n1_true + [2] * c.n1_leak + [1] * c.n2_leak + [2] * c.n2_true
    return y_true, y_pred


def test_parse_and_str_round_trip():
    c = ConfusionCounts.parse("90, 10, 20, 80")
    assert (c.n1, c.n2, c.n) == (100, 100, 200)
    assert str(c) == "90,10,20,80"
    with pytest.raises(ValueError):
        ConfusionCounts.parse("1,2,3")
    with pytest.raises(ValueError):
        ConfusionCounts(-1, 2, 3, 4)
    with pytest.raises(ValueError):
        ConfusionCounts(0, 0, 3, 4)


def test_kappa_against_sklearn():
    c = ConfusionCounts(1713, 287, 302, 1698)
    assert kappa(c) == pytest.approx(cohen_kappa_score(*_expand(c)), abs=1e-12)


def test_perfect_and_degenerate_matrices():
    assert kappa(ConfusionCounts(10, 0, 0, 5)) == 1.0
    r = rates(ConfusionCounts(10, 0, 0, 5))
    assert r.capped12 and r.capped21 and r.cappedK
    assert r.k12 == r.k_max == pytest.approx(math.log2(15) + math.log2(10 / 15 * 5 / 15))
    # everything predicted as class 1: kappa 0, class-1 leak rate capped
    r = rates(ConfusionCounts(10, 0, 5, 0))
    assert r.kappa == 0.0 and r.capped12 and not r.capped21


def test_negative_kappa_passes_through():
    r = rates(ConfusionCounts(10, 90, 90, 10))
    assert r.kappa < 0
    assert math.isnan(r.k) and not r.cappedK


def test_leak_rate_definition():
    c = ConfusionCounts(70, 30, 10, 90)
    r = rates(c)
    assert r.k12 == pytest.approx(-math.log2(30 * 200 / (100 * 100)))
    assert r.k21 == pytest.approx(-math.log2(10 * 200 / (100 * 100)))
    assert r.k_w == pytest.approx(0.5 * r.k21 + 0.5 * r.k12)


def test_k_max_and_average_rate():
    assert k_max(16384, 0.5) == pytest.approx(12.0)
    assert average_rate(0.75, 12.0) == (pytest.approx(2.0), False)
    assert average_rate(1.0, 12.0) == (12.0, True)


def test_equal_rates_give_exact_kappa():
    # n1_leak / n1 = n2_leak / n2 with equal classes: K12 = K21 = K
    c = ConfusionCounts(900, 100, 100, 900)
    r = rates(c)
    assert r.k12 == r.k21
    assert r.kappa == pytest.approx(1 - 2 ** -r.k12, abs=1e-12)
    assert check_rate_relation(r) == pytest.approx(0.0, abs=1e-12)


@given(cells, cells, cells, cells)
def test_three_kappa_forms_agree(a, b, c, d):
    if a + b == 0 or c + d == 0 or b == 0 or c == 0:
        return
    cm = ConfusionCounts(a, b, c, d)
    try:
        k = kappa(cm)
    except DegenerateMatrixError:
        return
    r = rates(cm)
    assert kappa_from_class_sizes(cm.n1, cm.n2, r.k12, r.k21) == pytest.approx(k, abs=1e-12)
    assert kappa_from_rates(cm.f1, r.k12, r.k21) == pytest.approx(k, abs=1e-12)


@given(st.floats(0.01, 0.99), st.floats(0, 12))
def test_balanced_or_equal_rate_limits(f1, k):
    assert kappa_from_rates(f1, k, k) == pytest.approx(1 - 2 ** -k, abs=1e-12)


def test_kappa_from_rates_domain():
    with pytest.raises(ValueError):
        kappa_from_rates(1.5, 1, 1)
    assert np.isfinite(kappa_from_rates(0.0, 1.0, 2.0))


@given(cells, cells, cells, cells)
def test_class_swap_symmetry(a, b, c, d):
    if a + b == 0 or c + d == 0:
        return
    cm = ConfusionCounts(a, b, c, d)
    try:
        k = kappa(cm)
    except DegenerateMatrixError:
        return
    assert kappa(cm.swapped()) == k
    r, s = rates(cm), rates(cm.swapped())
    assert (r.k12, r.k21) == (s.k21, s.k12)
