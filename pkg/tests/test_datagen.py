import numpy as np
import pytest

from infolimit.analytic import Exponential1D, Gaussian1D, Product
from infolimit.datagen import (
    EXP_REFERENCE, GAUSS_REFERENCE, GenSpec, generate, reference, subsample_to_f1,
)
from infolimit.errors import InfeasibleImbalanceError


def test_reference_shape():
    ds = reference("gauss", 16, n_per_class=8192)
    assert (ds.n, ds.n1, ds.n2, ds.d, ds.f1) == (16384, 8192, 8192, 16, 0.5)
    assert ds.meta["generator"] == "numpy.random.PCG64"


def test_class_means_within_three_standard_errors():
    n = 8192
    g = generate(GenSpec(GAUSS_REFERENCE, n, n, seed=0))
    assert abs(g.class_values(2)[:, 0].mean() - 1.02) <= 3 / np.sqrt(n)
    assert abs(g.class_values(1)[:, 0].mean()) <= 3 / np.sqrt(n)
    e = generate(GenSpec(EXP_REFERENCE, n, n, seed=0))
    assert abs(e.class_values(2)[:, 0].mean() - 2.392) <= 3 * 2.392 / np.sqrt(n)
    assert e.values.min() >= 0


def test_determinism_and_column_prefix():
    a = generate(GenSpec(Product.repeat(EXP_REFERENCE, 4), 50, 60, seed=12))
    b = generate(GenSpec(Product.repeat(EXP_REFERENCE, 4), 50, 60, seed=12))
    assert np.array_equal(a.values, b.values)
    c = generate(GenSpec(Product.repeat(EXP_REFERENCE, 2), 50, 60, seed=12))
    assert np.array_equal(a.values[:, :2], c.values)
    d = generate(GenSpec(Product.repeat(EXP_REFERENCE, 4), 50, 60, seed=13))
    assert not np.array_equal(a.values, d.values)


def test_genspec_validation():
    with pytest.raises(ValueError):
        GenSpec(Product((Gaussian1D(0, 1, 1, 1), Exponential1D(1, 2))), 5, 5)
    with pytest.raises(ValueError):
        GenSpec(GAUSS_REFERENCE, 0, 5)
    with pytest.raises(ValueError):
        GenSpec(GAUSS_REFERENCE, 5, 5, seed=-3)


def test_subsample_balanced_to_quarter():
    ds = reference("gauss", 1, 8192)
    sub = subsample_to_f1(ds, 0.25, seed=0)
    assert (sub.n1, sub.n2) == (2731, 8192)
    assert abs(sub.f1 - 0.25) <= 1 / (2 * sub.n)
    # class 2 rows are kept untouched and in order
    assert np.array_equal(sub.class_values(2), ds.class_values(2))


def test_subsample_rounds_to_nearest():
    ds = generate(GenSpec(GAUSS_REFERENCE, 212, 357, seed=0))
    sub = subsample_to_f1(ds, 0.2, seed=0)
    assert sub.n2 == 357
    assert sub.n1 == round(357 * 0.25)
    assert abs(sub.f1 - 0.2) <= 1 / (2 * sub.n)


def test_subsample_upwards_reduces_class_two():
    ds = generate(GenSpec(GAUSS_REFERENCE, 212, 357, seed=0))
    sub = subsample_to_f1(ds, 0.8, seed=4)
    assert sub.n1 == 212 and sub.n2 == 53
    rows = set(map(tuple, ds.class_values(2)))
    assert all(tuple(r) in rows for r in sub.class_values(2))


def test_subsample_noop_and_deterministic():
    ds = generate(GenSpec(GAUSS_REFERENCE, 100, 100, seed=0))
    assert subsample_to_f1(ds, 0.5) is ds
    a, b = subsample_to_f1(ds, 0.3, seed=8), subsample_to_f1(ds, 0.3, seed=8)
    assert np.array_equal(a.values, b.values)


def test_subsample_infeasible():
    ds = generate(GenSpec(GAUSS_REFERENCE, 100, 100, seed=0))
    with pytest.raises(InfeasibleImbalanceError):
        subsample_to_f1(ds, 0.005)
    with pytest.raises(InfeasibleImbalanceError):
        subsample_to_f1(ds, 1.0)
