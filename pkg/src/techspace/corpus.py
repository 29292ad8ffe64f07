"""Input ingestion: patents, firms, government support, and the I4T taxonomy.

All loaders return a clean table plus a rejects report instead of raising on
malformed rows; structural problems (missing columns, unreadable files) do
raise. Tables are plain pandas DataFrames and are never mutated downstream.

Row numbers in rejects reports count the header as row 1, so the first data
row is row 2 (matching what a spreadsheet shows).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError, ValidationError

#: The ten Industry-4.0 technology categories (output-side CPC taxonomy).
I4T_CATEGORIES = (
    "additive manufacturing",
    "artificial intelligence",
    "augmented reality",
    "autonomous robots",
    "autonomous vehicles",
    "cloud computing",
    "cybersecurity",
    "quantum computers",
    "machine tools",
    "system integration",
)

PATENT_COLUMNS = ("patent_id", "family_id", "firm_id", "year", "cpc_codes")
FIRM_COLUMNS = (
    "firm_id",
    "founding_year",
    "industry_code",
    "year",
    "employees",
    "profit_ratio",
    "debt_ratio",
)
SUPPORT_COLUMNS = ("project_id", "firm_id", "contribution_share", "year", "cpc_codes")


@dataclass
class SchemaConfig:
    """Binds canonical column names to the columns of a concrete export.

    ``columns`` maps canonical name -> actual column name in the file;
    unmapped names are assumed to match. ``year_range`` (inclusive) rejects
    patent rows outside the corpus window when set.
    """

    columns: dict[str, str] = field(default_factory=dict)
    year_range: tuple[int, int] | None = None
    cpc_separator: str = "|"

    def actual(self, canonical: str) -> str:
        return self.columns.get(canonical, canonical)


def _read_table(path, schema: SchemaConfig, required: tuple[str, ...]) -> pd.DataFrame:
    """Read a CSV or JSONL file, rename to canonical columns, check presence."""
    if str(path).endswith((".jsonl", ".ndjson")):
        df = pd.read_json(path, lines=True, dtype=str)
    else:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    rename = {schema.actual(c): c for c in required if schema.actual(c) != c}
    df = df.rename(columns=rename)
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise ValidationError(f"missing required column(s): {', '.join(missing)}")
    # header is row 1 of the file
    df.index = np.arange(2, len(df) + 2)
    return df


def _to_numeric(series: pd.Series) -> pd.Series:
    return pd.to_numeric(series.replace("", np.nan), errors="coerce")


def _finish(df: pd.DataFrame, keep: pd.Series, reasons: list[tuple[int, str]],
            columns: tuple[str, ...]) -> tuple[pd.DataFrame, pd.DataFrame]:
    rejects = pd.DataFrame(sorted(reasons), columns=["row_number", "reason"])
    out = df.loc[keep, list(columns)].reset_index(drop=True)
    return out, rejects


def load_patents(path, schema: SchemaConfig | None = None) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Load patent applications, returning (records, rejects).

    A record keeps ``cpc_codes`` as the raw separator-joined string; use
    :func:`merge_families` / :func:`build_counts` to get code sets and counts.
    Duplicated ``patent_id`` rows keep the first occurrence.
    """
    schema = schema or SchemaConfig()
    df = _read_table(path, schema, PATENT_COLUMNS)
    reasons: list[tuple[int, str]] = []
    keep = pd.Series(True, index=df.index)

    year = _to_numeric(df["year"])
    bad_year = year.isna()
    if schema.year_range is not None:
        lo, hi = schema.year_range
        out_of_range = ~bad_year & ((year < lo) | (year > hi))
    else:
        out_of_range = pd.Series(False, index=df.index)

    empty_id = df["patent_id"].str.strip() == ""
    codes = df["cpc_codes"].str.strip()
    empty_cpc = codes.str.replace(schema.cpc_separator, "", regex=False).str.strip() == ""
    dup = df["patent_id"].duplicated() & ~empty_id

    for mask, reason in (
        (empty_id, "missing patent_id"),
        (bad_year, "bad year"),
        (out_of_range, "year out of range"),
        (empty_cpc, "empty CPC"),
        (dup, "duplicate"),
    ):
        mask = mask & keep
        reasons += [(int(i), reason) for i in df.index[mask]]
        keep &= ~mask

    df = df.assign(year=year.astype("Int64"))
    records, rejects = _finish(df, keep, reasons, PATENT_COLUMNS)
    records["year"] = records["year"].astype(int)
    if schema.cpc_separator != "|":
        records["cpc_codes"] = records["cpc_codes"].str.replace(
            schema.cpc_separator, "|", regex=False
        )
    return records, rejects


def load_firms(path, schema: SchemaConfig | None = None) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Load per-firm-year financials, returning (records, rejects).

    Rejects rows with unparseable numbers, negative employee counts, or an
    observation year earlier than the firm's founding year.
    """
    schema = schema or SchemaConfig()
    df = _read_table(path, schema, FIRM_COLUMNS)
    reasons: list[tuple[int, str]] = []
    keep = pd.Series(True, index=df.index)

    founding = _to_numeric(df["founding_year"])
    year = _to_numeric(df["year"])
    employees = _to_numeric(df["employees"])
    profit = _to_numeric(df["profit_ratio"])
    debt = _to_numeric(df["debt_ratio"])

    bad_year = founding.isna() | year.isna()
    pre_founding = ~bad_year & (year < founding)
    neg_emp = employees.notna() & (employees < 0)

    for mask, reason in (
        (bad_year, "bad year"),
        (pre_founding, "year before founding"),
        (neg_emp, "negative employees"),
    ):
        mask = mask & keep
        reasons += [(int(i), reason) for i in df.index[mask]]
        keep &= ~mask

    df = df.assign(
        founding_year=founding, year=year, employees=employees,
        profit_ratio=profit, debt_ratio=debt,
    )
    records, rejects = _finish(df, keep, reasons, FIRM_COLUMNS)
    records["founding_year"] = records["founding_year"].astype(int)
    records["year"] = records["year"].astype(int)
    return records, rejects


def load_taxonomy(path) -> "I4TMap":
    """Load the CPC-prefix -> I4T-category map."""
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in ("cpc_prefix", "category") if c not in df.columns]
    if missing:
        raise ValidationError(f"missing required column(s): {', '.join(missing)}")
    return I4TMap(dict(zip(df["cpc_prefix"], df["category"])))


@dataclass
class I4TMap:
    """Longest-prefix classification of CPC codes into I4T categories."""

    prefixes: dict[str, str]

    def __post_init__(self):
        bad = sorted({c for c in self.prefixes.values() if c not in I4T_CATEGORIES})
        if bad:
            raise ValidationError(f"unknown I4T categories: {', '.join(bad)}")
        self._by_length = sorted(self.prefixes, key=len, reverse=True)

    def classify(self, code: str) -> str | None:
        """Category of a CPC code (possibly truncated), or None for non-I4T."""
        for prefix in self._by_length:
            if code.startswith(prefix):
                return self.prefixes[prefix]
        return None

    @property
    def categories(self) -> list[str]:
        return [c for c in I4T_CATEGORIES if c in set(self.prefixes.values())]


def merge_families(records: pd.DataFrame) -> pd.DataFrame:
    """Collapse patents into one entry per (family_id, firm_id).

    The entry's code set is the union of CPC codes over family members and
    its year is the earliest application year. Returns columns
    (family_id, firm_id, year, codes) where codes is a sorted tuple.
    Idempotent on its own output shape: one entry per family stays one entry.
    """
    if records.empty:
        return pd.DataFrame(columns=["family_id", "firm_id", "year", "codes"])
    exploded = records.assign(code=records["cpc_codes"].str.split("|")).explode("code")
    exploded = exploded[exploded["code"].str.strip() != ""]
    exploded["code"] = exploded["code"].str.strip()
    codes = (
        exploded.groupby(["family_id", "firm_id"])["code"]
        .agg(lambda s: tuple(sorted(set(s))))
        .rename("codes")
    )
    years = records.groupby(["family_id", "firm_id"])["year"].min()
    out = pd.concat([years, codes], axis=1).reset_index()
    return out.sort_values(["family_id", "firm_id"], ignore_index=True)


def truncate_code(code: str, cpc_level) -> str:
    if cpc_level == "full":
        return code
    return code[: int(cpc_level)]


def build_counts(family_tech: pd.DataFrame, cpc_level=4) -> "CountCube":
    """Count distinct family entries containing each truncated code.

    A family entry contributes at most 1 to each (firm, truncated code, year)
    cell, regardless of how many of its codes share the truncation.
    """
    if cpc_level not in (3, 4, "full"):
        raise ValidationError(f"cpc_level must be 3, 4 or 'full', got {cpc_level!r}")
    if family_tech.empty:
        return CountCube(pd.DataFrame(columns=["firm_id", "tech_code", "year", "count"]))
    rows = family_tech.reset_index(drop=True)
    exploded = rows.assign(entry=rows.index).explode("codes", ignore_index=True)
    exploded["tech_code"] = exploded["codes"].map(lambda c: truncate_code(c, cpc_level))
    exploded = exploded.drop_duplicates(["entry", "tech_code"])
    counts = (
        exploded.groupby(["firm_id", "tech_code", "year"])
        .size()
        .rename("count")
        .reset_index()
        .sort_values(["firm_id", "tech_code", "year"], ignore_index=True)
    )
    return CountCube(counts)


def load_gov_support(path, schema: SchemaConfig | None = None, cpc_level=4,
                     persistence_window: int = 1) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Build the government-support flag table, returning (flags, rejects).

    A (firm, technology, year) cell is flagged when some support record with
    contribution share strictly above 0.5 links the firm, a CPC code that
    truncates to the technology, and the year. ``persistence_window`` extends
    the flag over that many years starting at the project start year.
    """
    schema = schema or SchemaConfig()
    df = _read_table(path, schema, SUPPORT_COLUMNS)
    reasons: list[tuple[int, str]] = []
    keep = pd.Series(True, index=df.index)

    share = _to_numeric(df["contribution_share"])
    year = _to_numeric(df["year"])
    bad_share = share.isna() | (share < 0) | (share > 1)
    bad_year = year.isna()
    for mask, reason in ((bad_share, "share outside [0,1]"), (bad_year, "bad year")):
        mask = mask & keep
        reasons += [(int(i), reason) for i in df.index[mask]]
        keep &= ~mask

    rejects = pd.DataFrame(sorted(reasons), columns=["row_number", "reason"])
    kept = df.loc[keep].assign(contribution_share=share, year=year)
    kept = kept[kept["contribution_share"] > 0.5]

    cells: set[tuple[str, str, int]] = set()
    for firm, yr, codes in zip(kept["firm_id"], kept["year"].astype(int),
                               kept["cpc_codes"].str.split(schema.cpc_separator)):
        for code in codes:
            code = code.strip()
            if not code:
                continue
            tech = truncate_code(code, cpc_level)
            for offset in range(persistence_window):
                cells.add((firm, tech, yr + offset))
    flags = pd.DataFrame(sorted(cells), columns=["firm_id", "tech_code", "year"])
    flags["gov"] = 1
    return flags, rejects


class CountCube:
    """Patent counts per (firm, technology, year), stored sparsely.

    Immutable after construction; all entries are positive integers.
    """

    def __init__(self, counts: pd.DataFrame):
        required = {"firm_id", "tech_code", "year", "count"}
        if not required.issubset(counts.columns):
            raise ValidationError(f"CountCube needs columns {sorted(required)}")
        counts = counts.loc[counts["count"] > 0].reset_index(drop=True)
        if len(counts):
            counts["year"] = counts["year"].astype(int)
            counts["count"] = counts["count"].astype(int)
        self._df = counts

    @property
    def df(self) -> pd.DataFrame:
        return self._df

    def years(self) -> list[int]:
        return sorted(self._df["year"].unique()) if len(self._df) else []

    def techs(self) -> list[str]:
        return sorted(self._df["tech_code"].unique()) if len(self._df) else []

    def firms(self) -> list[str]:
        return sorted(self._df["firm_id"].unique()) if len(self._df) else []

    def year_slice(self, year: int) -> tuple[list[str], list[str], np.ndarray]:
        """Dense (firms, techs, counts matrix) for one year.

        Firms and techs are those active (nonzero) in the year, sorted.
        """
        sub = self._df[self._df["year"] == year]
        if sub.empty:
            raise DataError(f"no activity in year {year}")
        firms = sorted(sub["firm_id"].unique())
        techs = sorted(sub["tech_code"].unique())
        fi = {f: i for i, f in enumerate(firms)}
        ti = {t: j for j, t in enumerate(techs)}
        mat = np.zeros((len(firms), len(techs)), dtype=np.int64)
        mat[sub["firm_id"].map(fi), sub["tech_code"].map(ti)] = sub["count"]
        return firms, techs, mat

    def window_slice(self, years: list[int]) -> tuple[list[str], list[str], np.ndarray]:
        """Dense pooled counts over a set of years."""
        sub = self._df[self._df["year"].isin(years)]
        if sub.empty:
            raise DataError(f"no activity in years {years}")
        pooled = sub.groupby(["firm_id", "tech_code"])["count"].sum().reset_index()
        firms = sorted(pooled["firm_id"].unique())
        techs = sorted(pooled["tech_code"].unique())
        fi = {f: i for i, f in enumerate(firms)}
        ti = {t: j for j, t in enumerate(techs)}
        mat = np.zeros((len(firms), len(techs)), dtype=np.int64)
        mat[pooled["firm_id"].map(fi), pooled["tech_code"].map(ti)] = pooled["count"]
        return firms, techs, mat
