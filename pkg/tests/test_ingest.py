import io
import warnings

import numpy as np
import pytest

from infolimit.analytic import Gaussian1D
from infolimit.datagen import GAUSS_REFERENCE, GenSpec, generate, reference
from infolimit.errors import InsufficientDataError, LoadError
from infolimit.ingest import SchemaSpec, greedy_select, invocation_bound, load_csv, load_schema
from infolimit.knn import EstimatorConfig
from infolimit.table import CONTINUOUS, DISCRETE, DatasetTable, Variable, write_csv


def _write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_round_trip_is_exact(tmp_path):
    ds = reference("exp", 3, 40)
    buf = io.StringIO()
    write_csv(ds, buf)
    p = _write(tmp_path, buf.getvalue())
    schema = SchemaSpec(class1_label="1")
    a, b = load_csv(p, schema), load_csv(p, schema)
    assert np.array_equal(a.values, ds.values)
    assert np.array_equal(a.labels, ds.labels)
    assert np.array_equal(a.values, b.values)


def test_missing_rows_dropped_and_counted(tmp_path):
    p = _write(tmp_path, "x,y,class\n1.5,2,M\n2.5,?,B\n3.5,1,\n4.5,3,B\n0.5,NA,M\n6.5,1,B\n")
    ds = load_csv(p, SchemaSpec(class1_label="M"))
    assert ds.meta["dropped_rows"] == 3
    assert (ds.n1, ds.n2) == (1, 2)


def test_kind_inference(tmp_path):
    rows = ["a,b,c,class"]
    for i in range(30):
        rows.append(f"{i % 3},{i * 0.37},{'red' if i % 2 else 'blue'},{'p' if i < 15 else 'q'}")
    ds = load_csv(_write(tmp_path, "\n".join(rows)), SchemaSpec(class1_label="p"))
    kinds = [v.kind for v in ds.variables]
    assert kinds == [DISCRETE, CONTINUOUS, DISCRETE]
    assert ds.variables[0].categories == ("0", "1", "2")
    assert ds.variables[2].categories == ("blue", "red")
    over = load_csv(_write(tmp_path, "\n".join(rows)),
                    SchemaSpec(class1_label="p", kinds={"a": CONTINUOUS}))
    assert over.variables[0].kind == CONTINUOUS


def test_integer_column_with_many_levels_is_continuous(tmp_path):
    rows = ["n,class"] + [f"{i},{1 + i % 2}" for i in range(40)]
    ds = load_csv(_write(tmp_path, "\n".join(rows)), SchemaSpec(class1_label="1"))
    assert ds.variables[0].kind == CONTINUOUS


def test_load_errors(tmp_path):
    p = _write(tmp_path, "x,class\n1,a\n2,b\n")
    with pytest.raises(LoadError, match="not found"):
        load_csv(p, SchemaSpec(class1_label="z"))
    with pytest.raises(LoadError, match="class column"):
        load_csv(p, SchemaSpec(class_column="label", class1_label="a"))
    with pytest.raises(LoadError, match="non-numeric"):
        load_csv(_write(tmp_path, "x,class\n1,a\nfoo,b\n"),
                 SchemaSpec(class1_label="a", kinds={"x": CONTINUOUS}))
    with pytest.raises(LoadError, match="empty"):
        load_csv(_write(tmp_path, "x,class\n1,a\n2,a\n"), SchemaSpec(class1_label="a"))
    with pytest.raises(LoadError, match="more than two"):
        load_csv(_write(tmp_path, "x,class\n1,a\n2,b\n3,c\n"), SchemaSpec(class1_label="a"))


def test_first_label_default_warns(tmp_path):
    p = _write(tmp_path, "x,class\n1,b\n2,a\n")
    with pytest.warns(UserWarning, match="class1_label"):
        ds = load_csv(p)
    assert ds.class_names == ("b", "a")


def test_schema_file(tmp_path):
    p = _write(tmp_path, "class_column: diagnosis\nclass1_label: M\ndelimiter: ';'\n"
                         "kinds:\n  area: continuous\n", "schema.yaml")
    s = load_schema(p)
    assert (s.class_column, s.class1_label, s.delimiter) == ("diagnosis", "M", ";")
    assert s.kinds == {"area": "continuous"}
    with pytest.raises(LoadError):
        load_schema(_write(tmp_path, "colour: red\n", "bad.yaml"))
    with pytest.raises(ValueError):
        SchemaSpec(missing_policy="impute")


def test_delimiter(tmp_path):
    ds = load_csv(_write(tmp_path, "x;class\n1.5;a\n2.5;b\n"),
                  SchemaSpec(class1_label="a", delimiter=";"))
    assert ds.values[:, 0].tolist() == [1.5, 2.5]


def _informative_plus_null(n=4000, seed=0):
    v1 = generate(GenSpec(GAUSS_REFERENCE, n, n, seed))
    v2 = generate(GenSpec(Gaussian1D(0, 1, 0, 1), n, n, seed + 100))
    return DatasetTable("pair", (Variable("V1"), Variable("V2")),
                        np.column_stack([v1.values[:, 0], v2.values[:, 0]]), v1.labels)


def test_greedy_picks_informative_variable_and_stops():
    res = greedy_select(_informative_plus_null(), EstimatorConfig(repeats_m=3))
    assert res.order == ["V1"]
    assert res.evaluations == 3
    assert res.evaluations <= invocation_bound(2)


def test_greedy_single_variable():
    res = greedy_select(reference("gauss", 1, 300), EstimatorConfig(repeats_m=1))
    assert res.order == ["V1"] and len(res.cdr_trace) == 1


def test_greedy_bound_trace_and_determinism():
    ds = reference("gauss", 4, 600)
    cfg = EstimatorConfig(repeats_m=1)
    a, b = greedy_select(ds, cfg, epsilon=-1.0), greedy_select(ds, cfg, epsilon=-1.0)
    assert a.order == b.order and a.cdr_trace == b.cdr_trace
    assert len(a.order) == 4
    assert a.evaluations == 4 + 3 + 2 + 1 <= invocation_bound(4)
    limited = greedy_select(ds, cfg, max_vars=2)
    assert len(limited.order) <= 2
    assert all(y > x for x, y in zip(limited.cdr_trace, limited.cdr_trace[1:]))


def test_greedy_ties_follow_declaration_order():
    x = reference("gauss", 1, 300).values[:, 0]
    ds = DatasetTable("dup", (Variable("first"), Variable("second")),
                      np.column_stack([x, x]), reference("gauss", 1, 300).labels)
    assert greedy_select(ds, EstimatorConfig(repeats_m=1)).order[0] == "first"


def test_greedy_skips_failing_candidates(monkeypatch):
    import infolimit.ingest as ingest

    real = ingest.estimate

    def flaky(ds, cfg):
        if "V2" in ds.variable_names:
            raise InsufficientDataError("boom")
        return real(ds, cfg)

    monkeypatch.setattr(ingest, "estimate", flaky)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        res = greedy_select(reference("gauss", 3, 300), EstimatorConfig(repeats_m=1), epsilon=-1)
    assert "V2" not in res.order
    assert res.warnings
