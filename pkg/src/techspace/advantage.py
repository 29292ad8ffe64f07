"""Revealed technological advantage, entry events, and competitor counts.

RTA is the Balassa ratio of a firm's share of a technology to the whole
corpus share. The binary advantage matrix thresholds RTA at 1 (inclusive).
An entry event is the first attainment of advantage from below that persists
for a configurable number of forward years.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .corpus import CountCube
from .errors import DataError

__all__ = [
    "RtaSlice",
    "AdvantageMatrix",
    "compute_rta",
    "advantage_matrix",
    "scan_entry_series",
    "detect_entries",
    "rta_lookup",
    "num_rta",
    "competitor_counts",
]


@dataclass(frozen=True)
class RtaSlice:
    """Firm x technology RTA values for one year.

    Firms with zero patents in the year are not present (0/0 is undefined).
    """

    year: int
    firms: list[str]
    techs: list[str]
    values: np.ndarray  # shape (len(firms), len(techs)), nonnegative

    def to_triplets(self) -> pd.DataFrame:
        i, j = np.nonzero(self.values)
        return pd.DataFrame({
            "firm_id": np.asarray(self.firms)[i],
            "tech_code": np.asarray(self.techs)[j],
            "value": self.values[i, j],
        })


@dataclass(frozen=True)
class AdvantageMatrix:
    """Binary firm x technology matrix: 1 where RTA >= 1."""

    year: int
    firms: list[str]
    techs: list[str]
    values: np.ndarray  # dtype int8, entries in {0, 1}

    def firm_row(self, firm: str) -> np.ndarray:
        try:
            return self.values[self.firms.index(firm)]
        except ValueError:
            raise DataError(f"unknown firm {firm!r}") from None

    def to_triplets(self) -> pd.DataFrame:
        i, j = np.nonzero(self.values)
        return pd.DataFrame({
            "firm_id": np.asarray(self.firms)[i],
            "tech_code": np.asarray(self.techs)[j],
            "value": self.values[i, j],
        })


def rta_from_matrix(counts: np.ndarray) -> np.ndarray:
    """RTA of a dense nonnegative count matrix (rows with activity only).

    rta[i, a] = (P[i,a] / P[i,:]) / (P[:,a] / P[:,:]). Columns with no
    activity yield 0 for every firm.
    """
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        raise DataError("no activity")
    firm_tot = counts.sum(axis=1, keepdims=True)
    tech_tot = counts.sum(axis=0, keepdims=True)
    if np.any(firm_tot == 0):
        raise DataError("rta_from_matrix requires rows with at least one patent")
    with np.errstate(divide="ignore", invalid="ignore"):
        rta = (counts / firm_tot) / (tech_tot / total)
    rta[:, tech_tot[0] == 0] = 0.0
    return rta


def compute_rta(cube: CountCube, year: int) -> RtaSlice:
    """RTA slice for one year; errors when the year has no activity."""
    firms, techs, counts = cube.year_slice(year)
    return RtaSlice(year=year, firms=firms, techs=techs, values=rta_from_matrix(counts))


def advantage_matrix(rta: RtaSlice) -> AdvantageMatrix:
    """Threshold an RTA slice at 1 (inclusive)."""
    return AdvantageMatrix(
        year=rta.year,
        firms=rta.firms,
        techs=rta.techs,
        values=(rta.values >= 1.0).astype(np.int8),
    )


def scan_entry_series(values, persistence: int = 2) -> list[int]:
    """Indices t of entry events in a contiguous RTA series.

    An event at index t requires values[t-1] < 1 and values[t..t+persistence]
    all >= 1. Positions lacking the backward or full forward window yield no
    event; appending values after t+persistence never changes earlier events.
    """
    v = np.asarray(values, dtype=float)
    out = []
    for t in range(1, len(v) - persistence):
        if v[t - 1] < 1.0 and np.all(v[t : t + persistence + 1] >= 1.0):
            out.append(t)
    return out


def rta_lookup(slices: dict[int, RtaSlice]) -> dict[int, dict]:
    """Index helper: year -> (firm index, tech index, values) for fast access."""
    out = {}
    for year, sl in slices.items():
        out[year] = {
            "firms": {f: i for i, f in enumerate(sl.firms)},
            "techs": {t: j for j, t in enumerate(sl.techs)},
            "values": sl.values,
        }
    return out


def detect_entries(slices: dict[int, RtaSlice], lead: int = 0,
                   persistence: int = 2) -> pd.DataFrame:
    """Entry events over a per-year family of RTA slices.

    Missing (firm, tech, year) cells count as RTA = 0: a firm absent in a
    year cannot hold advantage. Event years lacking the t-1 backward year or
    the full forward window inside the covered year span yield no event.
    ``lead`` shifts the reported event_year by a constant offset.

    Returns a DataFrame (firm_id, tech_code, event_year).
    """
    years = sorted(slices)
    if not years:
        return pd.DataFrame(columns=["firm_id", "tech_code", "event_year"])
    firms = sorted({f for sl in slices.values() for f in sl.firms})
    techs = sorted({t for sl in slices.values() for t in sl.techs})
    fi = {f: i for i, f in enumerate(firms)}
    ti = {t: j for j, t in enumerate(techs)}
    series = np.zeros((len(years), len(firms), len(techs)))
    for k, year in enumerate(years):
        sl = slices[year]
        rows = [fi[f] for f in sl.firms]
        cols = [ti[t] for t in sl.techs]
        series[np.ix_([k], rows, cols)] = sl.values

    # contiguity guard: event windows must not span gaps in the year list
    year_arr = np.asarray(years)
    events = []
    for k in range(1, len(years) - persistence):
        window_years = year_arr[k - 1 : k + persistence + 1]
        if window_years[-1] - window_years[0] != persistence + 1:
            continue
        ok = (series[k - 1] < 1.0) & np.all(series[k : k + persistence + 1] >= 1.0, axis=0)
        for i, j in zip(*np.nonzero(ok)):
            events.append((firms[i], techs[j], years[k] + lead))
    return pd.DataFrame(events, columns=["firm_id", "tech_code", "event_year"])


def num_rta(adv: AdvantageMatrix, firm: str) -> int:
    """Number of technologies in which the firm holds advantage."""
    return int(adv.firm_row(firm).sum())


def competitor_counts(adv: AdvantageMatrix, industry_of: dict[str, str],
                      exclude_self: bool = True) -> pd.DataFrame:
    """Advantage-holding firm counts per (industry, technology).

    Returns a DataFrame (industry_code, tech_code, n_holders). A focal
    firm's competitor count for a technology is its industry's count minus
    its own advantage flag when ``exclude_self`` (a firm is not its own
    competitor); use :func:`competitors_for` for the per-firm view.
    """
    missing = sorted(set(adv.firms) - set(industry_of))
    if missing:
        raise DataError(f"firms without industry: {', '.join(missing)}")
    industries = np.asarray([industry_of[f] for f in adv.firms])
    rows = []
    for ind in sorted(set(industries)):
        holders = adv.values[industries == ind].sum(axis=0)
        for j, tech in enumerate(adv.techs):
            rows.append((ind, tech, int(holders[j])))
    out = pd.DataFrame(rows, columns=["industry_code", "tech_code", "n_holders"])
    out.attrs["exclude_self"] = exclude_self
    return out


def competitors_for(adv: AdvantageMatrix, industry_of: dict[str, str],
                    exclude_self: bool = True) -> np.ndarray:
    """Per-(firm, tech) competitor counts aligned with ``adv.values``."""
    missing = sorted(set(adv.firms) - set(industry_of))
    if missing:
        raise DataError(f"firms without industry: {', '.join(missing)}")
    industries = np.asarray([industry_of[f] for f in adv.firms])
    counts = np.zeros_like(adv.values, dtype=np.int64)
    for ind in np.unique(industries):
        mask = industries == ind
        holders = adv.values[mask].sum(axis=0)
        counts[mask] = holders
    if exclude_self:
        counts = counts - adv.values
    return counts
