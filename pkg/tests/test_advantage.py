"""RTA, the advantage threshold, and entry-event detection."""

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import techspace as ts
from techspace.synthlab.oracles import oracle_rta


def _count_matrix(rng, n, m, density=0.5, high=9):
    counts = rng.integers(0, high + 1, size=(n, m)).astype(float)
    counts[rng.random((n, m)) > density] = 0
    counts[counts.sum(axis=1) == 0, 0] = 1  # no inactive firms
    return counts


def test_rta_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        counts = _count_matrix(rng, 8, 6)
        np.testing.assert_allclose(ts.rta_from_matrix(counts),
                                   oracle_rta(counts), atol=1e-13)


def test_rta_share_weighted_average_is_one():
    # sum_i RTA[i, a] * (firm i's share of all patents) == 1 for every tech
    rng = np.random.default_rng(1)
    counts = _count_matrix(rng, 10, 7)
    rta = ts.rta_from_matrix(counts)
    shares = counts.sum(axis=1) / counts.sum()
    np.testing.assert_allclose(shares @ rta, np.ones(7), atol=1e-12)


def test_rta_scale_invariance():
    rng = np.random.default_rng(2)
    counts = _count_matrix(rng, 6, 5)
    np.testing.assert_allclose(ts.rta_from_matrix(counts),
                               ts.rta_from_matrix(counts * 17.0), atol=1e-12)


def test_rta_zero_total_raises():
    with pytest.raises(ts.DataError):
        ts.rta_from_matrix(np.zeros((3, 3)))


def test_advantage_threshold_is_inclusive():
    sl = ts.RtaSlice(year=2010, firms=["F1"], techs=["T1", "T2", "T3"],
                     values=np.array([[0.999999, 1.0, 1.000001]]))
    adv = ts.advantage_matrix(sl)
    assert adv.values.tolist() == [[0, 1, 1]]


# ---------------------------------------------------------------------------
# entry scanning

def _oracle_scan(values, persistence):
    out = []
    for t in range(1, len(values) - persistence + 1):
        window = values[t:t + persistence + 1]
        if len(window) == persistence + 1 and values[t - 1] < 1.0 \
                and all(v >= 1.0 for v in window):
            out.append(t)
    return out


def test_scan_entry_series_examples():
    assert ts.scan_entry_series([0.5, 1.0, 1.2, 1.1], persistence=2) == [1]
    assert ts.scan_entry_series([1.2, 1.0, 1.2, 1.1], persistence=2) == []
    # drop inside the persistence window cancels the event
    assert ts.scan_entry_series([0.5, 1.0, 0.9, 1.1], persistence=2) == []
    # boundary: exactly 1.0 counts as holding advantage
    assert ts.scan_entry_series([0.99, 1.0, 1.0, 1.0], persistence=2) == [1]
    assert ts.scan_entry_series([1.0, 1.2, 1.2, 1.2], persistence=2) == []


@given(st.lists(st.sampled_from([0.0, 0.5, 0.99, 1.0, 1.01, 2.0]),
                min_size=0, max_size=12),
       st.integers(min_value=0, max_value=3))
@settings(max_examples=300, deadline=None)
def test_scan_entry_series_matches_oracle(values, persistence):
    assert ts.scan_entry_series(values, persistence) == \
        _oracle_scan(values, persistence)


def _slices(series_by_cell, years):
    """Build one-firm-one-tech RtaSlices from {(firm, tech): {year: value}}."""
    firms = sorted({f for f, _ in series_by_cell})
    techs = sorted({t for _, t in series_by_cell})
    out = {}
    for y in years:
        vals = np.zeros((len(firms), len(techs)))
        for (f, t), series in series_by_cell.items():
            vals[firms.index(f), techs.index(t)] = series.get(y, 0.0)
        out[y] = ts.RtaSlice(year=y, firms=firms, techs=techs, values=vals)
    return out


def test_detect_entries_missing_years_count_as_zero():
    # firm absent in 2009 (rta 0) then advantaged 2010-2012: entry at 2010
    slices = _slices({("F1", "T1"): {2010: 1.5, 2011: 1.2, 2012: 1.3}},
                     years=[2009, 2010, 2011, 2012])
    events = ts.detect_entries(slices, persistence=2)
    assert list(zip(events["firm_id"], events["tech_code"],
                    events["event_year"])) == [("F1", "T1", 2010)]


def test_detect_entries_refuses_gapped_windows():
    # 2011 missing from the corpus: no window may span the gap
    slices = _slices({("F1", "T1"): {2010: 1.5, 2012: 1.2, 2013: 1.3}},
                     years=[2009, 2010, 2012, 2013])
    events = ts.detect_entries(slices, persistence=2)
    assert events.empty


def test_competitor_counts_exclude_self(small_corpus):
    cube = small_corpus["cube"]
    year = cube.years()[0]
    adv = ts.advantage_matrix(ts.compute_rta(cube, year))
    industry_of = dict(zip(small_corpus["firms"]["firm_id"],
                           small_corpus["firms"]["industry_code"]))
    from techspace.advantage import competitors_for
    comp = competitors_for(adv, industry_of)
    # brute force for one cell
    i, j = 0, 0
    firm, tech = adv.firms[i], adv.techs[j]
    expected = sum(
        1 for k, other in enumerate(adv.firms)
        if other != firm and industry_of[other] == industry_of[firm]
        and adv.values[k, j] == 1)
    assert comp[i, j] == expected
