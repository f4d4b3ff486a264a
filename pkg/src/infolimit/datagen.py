"""Monte Carlo reference datasets with independent, identically modelled columns."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import Exponential1D, Gaussian1D, Product
from .errors import InfeasibleImbalanceError
from .table import DatasetTable, Variable

GENERATOR = "numpy.random.PCG64"

GAUSS_REFERENCE = Gaussian1D(0.0, 1.0, 1.02, 1.0)
EXP_REFERENCE = Exponential1D(1.0, 2.392)


@dataclass(frozen=True)
class GenSpec:
    model: Product
    n1: int
    n2: int
    seed: int = 0

    def __post_init__(self):
        model = self.model
        if not isinstance(model, Product):
            model = Product((model,))
            object.__setattr__(self, "model", model)
        leaves = model.flatten()
        if any(leaf != leaves[0] for leaf in leaves):
            raise ValueError("every column must use the same density pair")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("class sizes must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def component(self):
        return self.model.flatten()[0]

    @property
    def d(self):
        return self.model.dims


def _draw(rng, component, cls, size):
    if isinstance(component, Gaussian1D):
        mean, sd = (component.mean1, component.sd1) if cls == 1 else (component.mean2, component.sd2)
        return mean + sd * rng.standard_normal(size)
    scale = component.alpha if cls == 1 else component.beta
    # inverse CDF
    return -scale * np.log1p(-rng.random(size))


def generate(spec, name=None):
    """Class-1 rows followed by class-2 rows; column j uses sub-seed ``seed + j``.

    Because each column has its own stream, the first k columns of a d-column
    table equal a k-column table drawn with the same seed.
    """
    comp = spec.component
    cols = []
    for j in range(spec.d):
        rng = np.random.Generator(np.random.PCG64(spec.seed + j))
        c1 = _draw(rng, comp, 1, spec.n1)
        c2 = _draw(rng, comp, 2, spec.n2)
        cols.append(np.concatenate([c1, c2]))
    labels = np.concatenate([np.ones(spec.n1, np.int8), np.full(spec.n2, 2, np.int8)])
    kind = "gauss" if isinstance(comp, Gaussian1D) else "exp"
    return DatasetTable(
        name=name or f"{spec.d}d-{kind}",
        variables=tuple(Variable(f"V{j + 1}") for j in range(spec.d)),
        values=np.column_stack(cols),
        labels=labels,
        class_names=("1", "2"),
        meta={"generator": GENERATOR, "seed": spec.seed, "model": repr(comp),
              "n1": spec.n1, "n2": spec.n2, "d": spec.d},
    )


def reference(kind, d, n_per_class=8192, seed=0):
    comp = {"gauss": GAUSS_REFERENCE, "exp": EXP_REFERENCE}[kind]
    return generate(GenSpec(Product.repeat(comp, d), n_per_class, n_per_class, seed))


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def subsample_to_f1(dataset, f1_target, seed=0):
    """Reduce one class so that the class-1 fraction is close to ``f1_target``.

    Retained rows are untouched and keep their original order.
    """
    if not 0.0 < f1_target < 1.0:
        raise InfeasibleImbalanceError(f"target f1 must lie in (0, 1), got {f1_target}")
    n1, n2 = dataset.n1, dataset.n2
    if abs(f1_target - dataset.f1) <= 1.0 / (2 * dataset.n):
        return dataset
    if f1_target < dataset.f1:
        reduced_label, keep_n = 1, _round_half_up(n2 * f1_target / (1.0 - f1_target))
        available = n1
    else:
        reduced_label, keep_n = 2, _round_half_up(n1 * (1.0 - f1_target) / f1_target)
        available = n2
    if keep_n < 2 or keep_n > available:
        raise InfeasibleImbalanceError(
            f"f1 = {f1_target} needs {keep_n} rows of class {reduced_label}, have {available}")
    rng = np.random.default_rng(seed)
    reduced = np.flatnonzero(dataset.labels == reduced_label)
    kept = rng.choice(reduced, size=keep_n, replace=False)
    mask = dataset.labels != reduced_label
    mask[kept] = True
    out = dataset.take(np.flatnonzero(mask), name=f"{dataset.name}@f1={f1_target:g}")
    out.meta["subsample"] = {"f1_target": f1_target, "seed": seed, "reduced_class": reduced_label}
    return out
