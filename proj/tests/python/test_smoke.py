"""Python API smoke tests against a tiny generated lake."""

import csv
import io
import os

import pytest

import blend


@pytest.fixture(scope="module")
def lake_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("lake")
    tables = {
        "t0.csv": "city,pop\nBerlin,3.6\nParis,2.1\nRome,2.8\n",
        "t1.csv": "name,country\nberlin,de\nmadrid,es\n",
        "t2.csv": "a,b,c\nx1,y1,q1\nx2,y2,q2\nx3,y3,q3\n",
        "t3.csv": "a,b\nx1,y1\nx2,y2\n",
        "t4.csv": "k,v\nBerlin,10\nParis,20\nRome,30\n",
    }
    for name, body in tables.items():
        (path / name).write_text(body)
    return path


@pytest.fixture(scope="module")
def index(lake_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("idx") / "index"
    summary = blend.build_index(str(lake_dir), str(out))
    assert summary["tables"] == 5
    assert summary["cells"] > 0
    return blend.Index(str(out))


def test_index_metadata(index):
    assert index.table_count == 5
    assert index.table_path(0) == "t0.csv"
    dump = index.dump()
    header = dump.splitlines()[0]
    assert header == "cell_value,table_id,column_id,row_id,super_key_hex,quadrant"
    rows = list(csv.reader(io.StringIO(dump)))
    assert len(rows) == 1 + index.cell_count


def test_seek_sc_matches_case_insensitively(index):
    hits = index.seek_sc(["BERLIN", "paris"], k=5)
    assert hits[0]["table_id"] == 0
    assert hits[0]["score"] == 2.0
    assert hits[0]["detail"] == {"column": 0}
    tables = {h["table_id"] for h in hits}
    assert {0, 1, 4} <= tables


def test_seek_mc_validates_alignment(index):
    hits = index.seek_mc([["x1", "x2"], ["y1", "y2"]], k=5)
    assert [h["table_id"] for h in hits] == [2, 3]
    assert all(h["score"] == 2.0 for h in hits)
    assert hits[0]["detail"] == {"columns": [0, 1]}


def test_seek_corr_ranks_by_absolute_qcr(index):
    # t0.pop anti-correlates (qcr -1), t4.v correlates (qcr +1): tie on |qcr|,
    # table id breaks it
    hits = index.seek_corr(["Berlin", "Paris", "Rome"], ["1", "2", "3"], k=5, h=0)
    assert [h["table_id"] for h in hits] == [0, 4]
    assert hits[0]["detail"]["qcr"] == -1.0
    assert hits[1]["detail"]["qcr"] == 1.0
    assert all(h["score"] == 1.0 for h in hits)

    # raising min support above the 3 matched pairs empties the result
    assert index.seek_corr(["Berlin", "Paris", "Rome"], ["1", "2", "3"],
                           k=5, h=0, m=4) == []


def test_plan_api_runs_augmentation(index):
    plan = blend.Plan()
    plan.add("input", blend.Input())
    plan.add("example", blend.Seekers.MC([["x1", "x2"], ["y1", "y2"]], k=5),
             ["input"])
    plan.add("query", blend.Seekers.SC(["q1", "q2"], k=5), ["input"])
    plan.add("combiner", blend.Combiners.Intersection(k=5),
             ["example", "query"])
    plan.add("terminal", blend.Terminal(), ["combiner"])
    assert plan.validate() == []

    results = plan.run(index)
    assert [r["table_id"] for r in results] == [2]

    builder = blend.augmentation_plan([["x1", "x2"], ["y1", "y2"]],
                                      ["q1", "q2"], k=5)
    assert builder.run(index) == results

    optimized = plan.run_report(index, optimize=True)
    baseline = plan.run_report(index, optimize=False)
    assert optimized[1] <= baseline[1]  # rewriting never scans more


def test_plan_json_round_trip(index):
    plan = blend.union_plan([["Berlin", "Paris"], ["3.6", "2.1"]], k=3)
    text = plan.to_json()
    again = blend.Plan.from_json(text)
    assert again.to_json() == text
    assert again.run(index) == plan.run(index)


def test_errors_surface_as_python_exceptions(index):
    with pytest.raises(ValueError):
        blend.Plan().run(index)  # no terminal
    plan = blend.Plan()
    plan.add("input", blend.Input())
    with pytest.raises(ValueError):
        plan.add("input", blend.Input())  # duplicate name


def test_seek_corr_with_support_one(index):
    hits = index.seek_corr(["Berlin", "Paris", "Rome"], ["1", "2", "3"],
                           k=5, h=0, m=1)
    by_table = {h["table_id"]: h for h in hits}
    assert by_table[4]["detail"]["qcr"] == 1.0
    assert by_table[4]["detail"]["key_column"] == 0
    assert by_table[4]["detail"]["num_column"] == 1
