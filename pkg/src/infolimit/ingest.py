"""Loading labelled tables from delimited text, and greedy CDR variable selection."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import InfolimitError, LoadError
from .knn import EstimatorConfig, estimate
from .table import CONTINUOUS, DISCRETE, DatasetTable, Variable

MISSING_TOKENS = frozenset({"", "?", "na", "nan", "null", "none"})
# A numeric column with at most this many distinct integer values is discrete.
DISCRETE_MAX_LEVELS = 20
SELECT_EPSILON = 0.02


@dataclass(frozen=True)
class SchemaSpec:
    class_column: str = "class"
    class1_label: str | None = None
    kinds: dict = field(default_factory=dict)
    missing_policy: str = "drop_row"
    delimiter: str = ","
    name: str | None = None

    def __post_init__(self):
        if self.missing_policy != "drop_row":
            raise ValueError("only the drop_row missing policy is supported")
        for col, kind in self.kinds.items():
            if kind not in (CONTINUOUS, DISCRETE):
                raise ValueError(f"column {col!r}: unknown kind {kind!r}")


def load_schema(path):
    """Read a schema from a small YAML (or JSON) key-value file."""
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    known = {"class_column", "class1_label", "kinds", "missing_policy", "delimiter", "name"}
    unknown = set(raw) - known
    if unknown:
        raise LoadError(f"unknown schema keys: {sorted(unknown)}")
    if raw.get("class1_label") is not None:
        raw["class1_label"] = str(raw["class1_label"])
    return SchemaSpec(**raw)


def _is_missing(token):
    return token.strip().lower() in MISSING_TOKENS


def _as_float(token):
    try:
        return float(token)
    except ValueError:
        return None


def _sort_categories(tokens):
    nums = [_as_float(t) for t in tokens]
    if all(v is not None for v in nums):
        return [t for _, t in sorted(zip(nums, tokens))]
    return sorted(tokens)


def load_csv(path, schema=None):
    """Read a delimited table with a header row into a DatasetTable.

    Rows with any missing value are dropped; the count is kept in
    ``table.meta["dropped_rows"]``.
    """
    schema = schema or SchemaSpec()
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise LoadError(f"{path}: empty file") from None
        raw_rows = [row for row in reader if any(cell.strip() for cell in row)]

    if schema.class_column not in header:
        raise LoadError(f"{path}: class column {schema.class_column!r} not in header {header}")
    for col in schema.kinds:
        if col not in header:
            raise LoadError(f"{path}: schema names unknown column {col!r}")
    ci = header.index(schema.class_column)
    var_idx = [i for i in range(len(header)) if i != ci]

    rows, dropped = [], 0
    for lineno, row in enumerate(raw_rows, start=2):
        if len(row) != len(header):
            raise LoadError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        cells = [c.strip() for c in row]
        if any(_is_missing(c) for c in cells):
            dropped += 1
            continue
        rows.append(cells)
    if not rows:
        raise LoadError(f"{path}: no complete rows")

    class_tokens = [r[ci] for r in rows]
    labels_seen = list(dict.fromkeys(class_tokens))
    if len(labels_seen) > 2:
        raise LoadError(f"{path}: class column has more than two labels: {labels_seen}")
    class1 = schema.class1_label
    if class1 is None:
        class1 = labels_seen[0]
        warnings.warn(f"no class1_label given; using first label seen, {class1!r}")
    if class1 not in labels_seen:
        raise LoadError(f"{path}: class-1 label {class1!r} not found; labels are {labels_seen}")
    others = [lab for lab in labels_seen if lab != class1]
    if not others:
        raise LoadError(f"{path}: class 2 is empty")
    class2 = others[0]
    labels = np.array([1 if t == class1 else 2 for t in class_tokens], dtype=np.int8)

    variables, columns = [], []
    for i in var_idx:
        name = header[i]
        tokens = [r[i] for r in rows]
        nums = [_as_float(t) for t in tokens]
        numeric = all(v is not None for v in nums)
        kind = schema.kinds.get(name)
        if kind is None:
            if not numeric:
                kind = DISCRETE
            else:
                distinct = set(nums)
                integral = all(float(v).is_integer() for v in distinct)
                kind = DISCRETE if integral and len(distinct) <= DISCRETE_MAX_LEVELS else CONTINUOUS
        if kind == CONTINUOUS:
            if not numeric:
                bad = next(t for t, v in zip(tokens, nums) if v is None)
                raise LoadError(f"{path}: non-numeric value {bad!r} in continuous column {name!r}")
            variables.append(Variable(name, CONTINUOUS))
            columns.append(np.array(nums, dtype=float))
        else:
            cats = _sort_categories(list(dict.fromkeys(tokens)))
            index = {c: k for k, c in enumerate(cats)}
            variables.append(Variable(name, DISCRETE, tuple(cats)))
            columns.append(np.array([index[t] for t in tokens], dtype=float))

    return DatasetTable(
        name=schema.name or path.stem,
        variables=tuple(variables),
        values=np.column_stack(columns) if columns else np.empty((len(rows), 0)),
        labels=labels,
        class_names=(class1, class2),
        meta={"source": str(path), "dropped_rows": dropped,
              "class_column": schema.class_column},
    )


# ---------------------------------------------------------------------------
# variable selection


@dataclass
class SelectionResult:
    order: list
    cdr_trace: list
    evaluations: int
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {"order": self.order, "cdr_trace": self.cdr_trace,
                "evaluations": self.evaluations, "warnings": self.warnings}


def invocation_bound(p):
    """Singles plus the later-step bound of (p - 1)(p + 2) / 2."""
    return p + (p - 1) * (p + 2) // 2


def _cdr_or_none(dataset, columns, estimator, notes):
    try:
        return estimate(dataset.select(columns), estimator).cdr
    except InfolimitError as exc:
        msg = f"skipping {columns}: {exc}"
        notes.append(msg)
        warnings.warn(msg)
        return None


def greedy_select(dataset, estimator=None, max_vars=None, epsilon=SELECT_EPSILON):
    """Forward selection by CDR.

    Start from the single variable with the largest CDR, then repeatedly add
    the unused variable giving the largest CDR, stopping once the best gain
    is not above ``epsilon`` bits or ``max_vars`` variables are chosen. Ties
    go to the earlier-declared variable.
    """
    estimator = estimator or EstimatorConfig()
    names = dataset.variable_names
    max_vars = len(names) if max_vars is None else min(max_vars, len(names))
    notes, order, trace = [], [], []
    evaluations = 0
    current = -math.inf
    while len(order) < max_vars:
        best_name, best_cdr = None, None
        for name in names:
            if name in order:
                continue
            evaluations += 1
            cdr = _cdr_or_none(dataset, order + [name], estimator, notes)
            if cdr is None:
                continue
            if best_cdr is None or cdr > best_cdr:
                best_name, best_cdr = name, cdr
        if best_name is None:
            break
        if order and best_cdr - current <= epsilon:
            break
        order.append(best_name)
        trace.append(best_cdr)
        current = best_cdr
    return SelectionResult(order, trace, evaluations, notes)
