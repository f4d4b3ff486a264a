"""Two-class dataset container shared by every pipeline stage."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

CONTINUOUS = "continuous"
DISCRETE = "discrete"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = CONTINUOUS
    # Discrete columns store an index into this tuple; the tokens are kept so
    # a table can be written back out unchanged.
    categories: tuple = ()

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, DISCRETE):
            raise ValueError(f"unknown variable kind {self.kind!r}")


@dataclass(frozen=True)
class DatasetTable:
    """Rows of a labelled two-class table.

    ``values`` is an (n, d) float array; discrete columns hold category
    indices. ``labels`` holds 1 or 2 per row. Row order is significant: the
    jitter stream and the cross-validation folds are keyed to it.
    """

    name: str
    variables: tuple
    values: np.ndarray
    labels: np.ndarray
    class_names: tuple = ("1", "2")
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        labels = np.asarray(self.labels, dtype=np.int8)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "variables", tuple(self.variables))
        if values.shape[1] != len(self.variables):
            raise ValueError(
                f"{values.shape[1]} value columns for {len(self.variables)} variables")
        if values.shape[0] != labels.shape[0]:
            raise ValueError("values and labels have different row counts")
        if not np.isin(labels, (1, 2)).all():
            raise ValueError("class labels must be 1 or 2")
        if not ((labels == 1).any() and (labels == 2).any()):
            raise ValueError("both classes must be present")
        for j, var in enumerate(self.variables):
            if var.kind == DISCRETE:
                col = values[:, j]
                if (col < 0).any() or (col >= len(var.categories)).any() or (col != np.round(col)).any():
                    raise ValueError(f"discrete column {var.name!r} holds values outside its categories")

    @property
    def n1(self):
        return int((self.labels == 1).sum())

    @property
    def n2(self):
        return int((self.labels == 2).sum())

    @property
    def n(self):
        return int(self.labels.shape[0])

    @property
    def f1(self):
        return self.n1 / self.n

    @property
    def d(self):
        return len(self.variables)

    @property
    def variable_names(self):
        return [v.name for v in self.variables]

    def class_values(self, label):
        return self.values[self.labels == label]

    def select(self, columns):
        """Keep only the named (or indexed) variables, in the given order."""
        idx = [c if isinstance(c, int) else self.variable_names.index(c) for c in columns]
        if not idx:
            raise ValueError("at least one variable is required")
        return replace(self, variables=tuple(self.variables[i] for i in idx),
                       values=self.values[:, idx], meta=dict(self.meta))

    def take(self, rows, name=None):
        rows = np.asarray(rows)
        return replace(self, name=name or self.name, values=self.values[rows],
                       labels=self.labels[rows], meta=dict(self.meta))

    def swap_classes(self):
        return replace(self, labels=(3 - self.labels).astype(np.int8),
                       class_names=self.class_names[::-1], meta=dict(self.meta))

    def summary(self):
        n_cont = sum(v.kind == CONTINUOUS for v in self.variables)
        return {
            "name": self.name, "n1": self.n1, "n2": self.n2, "n": self.n,
            "f1": self.f1, "d": self.d, "continuous": n_cont, "discrete": self.d - n_cont,
            "class_names": list(self.class_names),
        }


def write_csv(table, fh, class_column="class", delimiter=","):
    """Write ``table`` in the layout ``load_csv`` reads back.

    Continuous values are written with ``repr`` precision so a reload is exact.
    """
    writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
    writer.writerow(table.variable_names + [class_column])
    for row, lab in zip(table.values, table.labels):
        out = []
        for v, var in zip(row, table.variables):
            out.append(var.categories[int(v)] if var.kind == DISCRETE else repr(float(v)))
        out.append(table.class_names[lab - 1])
        writer.writerow(out)
