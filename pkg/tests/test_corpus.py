"""Ingestion: loaders, rejects, family merge, counts, gov flags, taxonomy."""

import numpy as np
import pandas as pd
import pytest

import techspace as ts
from techspace.corpus import I4T_CATEGORIES


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


# ---------------------------------------------------------------------------
# patents

def test_load_patents_rejects(tmp_path):
    path = _write(tmp_path, "patents.csv", "\n".join([
        "patent_id,family_id,firm_id,year,cpc_codes",
        "P1,FAM1,F1,2010,G06F16",         # ok
        ",FAM1,F1,2010,G06F16",           # missing id (row 3)
        "P2,FAM1,F1,20xx,G06F16",         # bad year (row 4)
        "P3,FAM1,F1,2030,G06F16",         # out of range (row 5)
        "P4,FAM1,F1,2010,|",              # empty CPC (row 6)
        "P1,FAM2,F1,2011,H04L9",          # duplicate id (row 7)
    ]))
    schema = ts.SchemaConfig(year_range=(2000, 2020))
    records, rejects = ts.load_patents(path, schema)
    assert list(records["patent_id"]) == ["P1"]
    assert dict(zip(rejects["row_number"], rejects["reason"])) == {
        3: "missing patent_id", 4: "bad year", 5: "year out of range",
        6: "empty CPC", 7: "duplicate",
    }


def test_load_patents_missing_column_raises(tmp_path):
    path = _write(tmp_path, "p.csv", "patent_id,firm_id,year\nP1,F1,2010\n")
    with pytest.raises(ts.ValidationError):
        ts.load_patents(path)


def test_schema_renames_and_separator(tmp_path):
    path = _write(tmp_path, "p.csv", "\n".join([
        "pid,family_id,firm_id,appyear,classes",
        "P1,FAM1,F1,2010,G06F16;H04L9",
    ]))
    schema = ts.SchemaConfig(
        columns={"patent_id": "pid", "year": "appyear", "cpc_codes": "classes"},
        cpc_separator=";")
    records, rejects = ts.load_patents(path, schema)
    assert rejects.empty
    assert records.loc[0, "cpc_codes"] == "G06F16|H04L9"


def test_load_patents_jsonl(tmp_path):
    path = _write(tmp_path, "p.jsonl",
                  '{"patent_id":"P1","family_id":"FAM1","firm_id":"F1",'
                  '"year":2010,"cpc_codes":"G06F16"}\n')
    records, rejects = ts.load_patents(path)
    assert len(records) == 1 and rejects.empty


# ---------------------------------------------------------------------------
# family merge and counts

def _records(rows):
    return pd.DataFrame(rows, columns=["patent_id", "family_id", "firm_id",
                                       "year", "cpc_codes"])


def test_merge_families_union_and_earliest_year():
    # Four members of one family: code set is the union A-D, year the earliest.
    records = _records([
        ("P1", "FAM1", "F1", 2012, "A111|B222"),
        ("P2", "FAM1", "F1", 2010, "B222|C333"),
        ("P3", "FAM1", "F1", 2011, "D444"),
        ("P4", "FAM1", "F2", 2013, "A111"),  # same family, other firm: separate
    ])
    fam = ts.merge_families(records)
    assert len(fam) == 2
    row = fam[fam["firm_id"] == "F1"].iloc[0]
    assert row["year"] == 2010
    assert row["codes"] == ("A111", "B222", "C333", "D444")


def test_build_counts_distinct_families_per_truncated_code():
    records = _records([
        # one family with two codes sharing the 4-char truncation: counts once
        ("P1", "FAM1", "F1", 2010, "G06F16|G06F21"),
        ("P2", "FAM2", "F1", 2010, "G06F1"),
        ("P3", "FAM3", "F1", 2011, "H04L9"),
    ])
    cube = ts.build_counts(ts.merge_families(records), cpc_level=4)
    df = cube.df.set_index(["firm_id", "tech_code", "year"])["count"]
    assert df[("F1", "G06F", 2010)] == 2  # FAM1 once + FAM2 once
    assert df[("F1", "H04L", 2011)] == 1


@pytest.mark.parametrize("level,expected", [
    (3, "G06"), (4, "G06F"), ("full", "G06F16"),
])
def test_truncate_code_levels(level, expected):
    assert ts.truncate_code("G06F16", level) == expected


def test_build_counts_rejects_bad_level():
    with pytest.raises(ts.ValidationError):
        ts.build_counts(ts.merge_families(_records([])), cpc_level=5)


def test_cube_year_slice_raises_on_empty_year(small_corpus):
    with pytest.raises(ts.DataError):
        small_corpus["cube"].year_slice(1999)


# ---------------------------------------------------------------------------
# government support

def test_gov_share_boundary(tmp_path):
    path = _write(tmp_path, "support.csv", "\n".join([
        "project_id,firm_id,contribution_share,year,cpc_codes",
        "G1,F1,0.5,2010,G06F16",    # exactly half: NOT flagged
        "G2,F1,0.51,2010,G06F16",   # strictly above half: flagged
        "G3,F2,0.49,2010,G06F16",
    ]))
    flags, rejects = ts.load_gov_support(path)
    assert rejects.empty
    assert set(zip(flags["firm_id"], flags["tech_code"], flags["year"])) == {
        ("F1", "G06F", 2010),
    }


def test_gov_persistence_window(tmp_path):
    path = _write(tmp_path, "support.csv", "\n".join([
        "project_id,firm_id,contribution_share,year,cpc_codes",
        "G1,F1,0.9,2010,G06F16",
    ]))
    flags, _ = ts.load_gov_support(path, persistence_window=3)
    assert sorted(flags["year"]) == [2010, 2011, 2012]


# ---------------------------------------------------------------------------
# taxonomy

def test_taxonomy_longest_prefix(tmp_path):
    path = _write(tmp_path, "tax.csv", "\n".join([
        "cpc_prefix,category",
        "G06,cloud computing",
        "G06N,artificial intelligence",
    ]))
    tax = ts.load_taxonomy(path)
    assert tax.classify("G06N") == "artificial intelligence"
    assert tax.classify("G06F") == "cloud computing"
    assert tax.classify("H04L") is None


def test_taxonomy_rejects_unknown_category(tmp_path):
    path = _write(tmp_path, "tax.csv",
                  "cpc_prefix,category\nG06,not a real category\n")
    with pytest.raises(ts.ValidationError):
        ts.load_taxonomy(path)


def test_ten_categories_declared():
    assert len(I4T_CATEGORIES) == 10
    assert "artificial intelligence" in I4T_CATEGORIES
    assert "additive manufacturing" in I4T_CATEGORIES
