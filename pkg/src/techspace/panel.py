"""Entry-prediction panel assembly, Box-Cox-by-year transforms, and splits.

A panel row is one (firm, technology, observation year t) candidate pair
carrying the density, complexity, government-support and control variables
measured at t and the binary outcome "entered the technology at t+2".
"""

from __future__ import annotations

import logging

import numpy as np
import pandas as pd
from scipy import stats

from .advantage import advantage_matrix, compute_rta, competitors_for, detect_entries
from .complexity import DEFAULT_ITERATIONS, DEFAULT_TCI_SCALE, mor, tci_transform
from .corpus import CountCube, I4TMap
from .errors import ValidationError
from .relatedness import density_matrix, proximity_for_year

log = logging.getLogger(__name__)

PANEL_COLUMNS = [
    "firm_id", "tech_code", "year", "entry", "omega", "tci", "gov", "age",
    "num_employee", "num_competitor", "num_rta", "profit_ratio", "debt_ratio",
    "industry_code", "i4t_category",
]

BINARY_COLUMNS = ("entry", "gov")
FINANCIAL_COLUMNS = ("employees", "profit_ratio", "debt_ratio")


def assemble_panel(cube: CountCube, firms: pd.DataFrame, gov_flags: pd.DataFrame,
                   taxonomy: I4TMap | None = None, years: list[int] | None = None, *,
                   include_incumbents: bool = False, persistence: int = 2,
                   entry_lead: int = 2, proximity_window: int = 1,
                   density_mean_window: int = 1, n_max: int = DEFAULT_ITERATIONS,
                   tci_scale: float = DEFAULT_TCI_SCALE) -> pd.DataFrame:
    """Build the estimation panel from the corpus tables.

    One row per candidate (firm, tech, t): by default pairs where the firm
    does not already hold advantage at t (``include_incumbents`` adds the
    rest). The outcome ``entry`` is 1 when an entry event occurs at
    t + ``entry_lead`` and persists ``persistence`` further years, so only
    observation years with the full forward window in the corpus are kept.
    Firm-years with missing financials are excluded, not imputed.
    """
    corpus_years = set(cube.years())
    candidate_years = sorted(years) if years is not None else sorted(corpus_years)
    horizon = entry_lead + persistence
    usable = [t for t in candidate_years
              if all(t + k in corpus_years for k in range(horizon + 1))]
    dropped = sorted(set(candidate_years) - set(usable))
    if dropped:
        log.warning("dropping observation years lacking the forward window: %s", dropped)

    slices = {y: compute_rta(cube, y) for y in sorted(corpus_years)}
    events = detect_entries(slices, persistence=persistence)
    event_set = set(zip(events["firm_id"], events["tech_code"], events["event_year"]))
    gov_set = set(zip(gov_flags["firm_id"], gov_flags["tech_code"], gov_flags["year"])) \
        if len(gov_flags) else set()

    firm_info = _firm_info_by_year(firms)

    frames = []
    omega_history: dict[int, tuple[dict, dict, np.ndarray]] = {}
    for t in usable:
        adv = advantage_matrix(slices[t])
        prox = proximity_for_year(cube, t, proximity_window, adv)
        omega = density_matrix(adv, prox)
        omega_history[t] = (
            {f: i for i, f in enumerate(adv.firms)},
            {c: j for j, c in enumerate(adv.techs)},
            omega,
        )
        omega_eff = _mean_density(omega_history, t, adv, density_mean_window) \
            if density_mean_window > 1 else omega

        tci = tci_transform(mor(adv, n_max=n_max), year=t, scale=tci_scale).lookup()
        info = firm_info.get(t, {})
        industry_of = {f: info[f]["industry_code"] if f in info else "" for f in adv.firms}
        competitors = competitors_for(adv, industry_of)
        n_rta = adv.values.sum(axis=1)

        mask = np.ones_like(adv.values, dtype=bool) if include_incumbents \
            else adv.values == 0
        # technologies absent from the complexity ranking (pruned) have no TCI
        tci_col = np.array([tci.get(c, np.nan) for c in adv.techs])
        mask &= ~np.isnan(tci_col)[np.newaxis, :]
        known = np.array([f in info for f in adv.firms])
        mask &= known[:, np.newaxis]

        ii, jj = np.nonzero(mask)
        if not len(ii):
            continue
        firm_ids = np.asarray(adv.firms)[ii]
        tech_ids = np.asarray(adv.techs)[jj]
        frames.append(pd.DataFrame({
            "firm_id": firm_ids,
            "tech_code": tech_ids,
            "year": t,
            "entry": [int((f, c, t + entry_lead) in event_set)
                      for f, c in zip(firm_ids, tech_ids)],
            "omega": omega_eff[ii, jj],
            "tci": tci_col[jj],
            "gov": [int((f, c, t) in gov_set) for f, c in zip(firm_ids, tech_ids)],
            "age": [t - info[f]["founding_year"] for f in firm_ids],
            "num_employee": [info[f]["employees"] for f in firm_ids],
            "num_competitor": competitors[ii, jj],
            "num_rta": n_rta[ii],
            "profit_ratio": [info[f]["profit_ratio"] for f in firm_ids],
            "debt_ratio": [info[f]["debt_ratio"] for f in firm_ids],
            "industry_code": [info[f]["industry_code"] for f in firm_ids],
            "i4t_category": [taxonomy.classify(c) or "" for c in tech_ids]
            if taxonomy else "",
        }))
    if not frames:
        return pd.DataFrame(columns=PANEL_COLUMNS)
    return pd.concat(frames, ignore_index=True)[PANEL_COLUMNS]


def _firm_info_by_year(firms: pd.DataFrame) -> dict[int, dict[str, dict]]:
    """year -> firm -> controls; firm-years with any missing financial dropped."""
    complete = firms.dropna(subset=list(FINANCIAL_COLUMNS))
    out: dict[int, dict[str, dict]] = {}
    for row in complete.itertuples(index=False):
        out.setdefault(int(row.year), {})[row.firm_id] = {
            "founding_year": int(row.founding_year),
            "industry_code": row.industry_code,
            "employees": float(row.employees),
            "profit_ratio": float(row.profit_ratio),
            "debt_ratio": float(row.debt_ratio),
        }
    return out


def _mean_density(history: dict, t: int, adv, window: int) -> np.ndarray:
    """Average the density over the trailing ``window`` years where present."""
    acc = np.zeros_like(history[t][2])
    n = np.zeros_like(acc)
    fi_t, ti_t, _ = history[t]
    for y in range(t - window + 1, t + 1):
        if y not in history:
            continue
        fi, ti, omega = history[y]
        f_common = [(fi_t[f], fi[f]) for f in fi_t if f in fi]
        t_common = [(ti_t[c], ti[c]) for c in ti_t if c in ti]
        if not f_common or not t_common:
            continue
        ft, fy = map(list, zip(*f_common))
        tt, ty = map(list, zip(*t_common))
        acc[np.ix_(ft, tt)] += omega[np.ix_(fy, ty)]
        n[np.ix_(ft, tt)] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = acc / n
    mean[n == 0] = 0.0
    return mean


def box_cox_by_year(panel: pd.DataFrame, variables: list[str],
                    lambda_grid: np.ndarray | None = None) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Box-Cox transform selected variables within each year, then center.

    Per (variable, year): data are shifted by (1 - min) when the minimum is
    nonpositive, the exponent is chosen from ``lambda_grid`` (default -2..2
    in steps of 0.1) by profile log-likelihood, the transform applied
    ((x^l - 1)/l, or ln x at l = 0), and the result centered to mean 0
    within the year. Binary variables and tci must not be passed. Returns
    (transformed panel, report) where the report has one row per
    (variable, year) with the chosen lambda, shift, and pre/post moments.
    """
    banned = [v for v in variables if v in BINARY_COLUMNS or v == "tci"]
    if banned:
        raise ValidationError(f"refusing to Box-Cox binary/tci columns: {banned}")
    missing = [v for v in variables if v not in panel.columns]
    if missing:
        raise ValidationError(f"unknown panel columns: {missing}")
    grid = np.round(np.arange(-2.0, 2.0 + 1e-9, 0.1), 10) if lambda_grid is None \
        else np.asarray(lambda_grid, dtype=float)

    out = panel.copy()
    out[list(variables)] = out[list(variables)].astype(float)
    report_rows = []
    for variable in variables:
        for year, idx in panel.groupby("year").groups.items():
            x = panel.loc[idx, variable].to_numpy(dtype=float)
            pre_mean, pre_sd = x.mean(), x.std()
            if pre_sd == 0:
                transformed = x - pre_mean
                lam, shift, flag = np.nan, 0.0, "constant, passed through centered"
            else:
                shift = 1.0 - x.min() if x.min() <= 0 else 0.0
                xs = x + shift
                llf = np.array([stats.boxcox_llf(l, xs) for l in grid])
                lam = float(grid[int(np.argmax(llf))])
                transformed = boxcox_apply(xs, lam)
                transformed = transformed - transformed.mean()
                flag = ""
            out.loc[idx, variable] = transformed
            report_rows.append({
                "variable": variable, "year": year, "lambda": lam, "shift": shift,
                "pre_mean": pre_mean, "pre_sd": pre_sd,
                "post_mean": float(transformed.mean()), "post_sd": float(transformed.std()),
                "flag": flag,
            })
    report = pd.DataFrame(report_rows)
    return out, report


def boxcox_apply(x: np.ndarray, lam: float) -> np.ndarray:
    """The Box-Cox map for positive data: (x^lam - 1)/lam, ln x at lam = 0."""
    x = np.asarray(x, dtype=float)
    if lam == 0:
        return np.log(x)
    return (np.power(x, lam) - 1.0) / lam


def split(panel: pd.DataFrame, key: str, scheme: str) -> dict[str, pd.DataFrame]:
    """Partition rows by a numeric key.

    ``decile-extremes`` returns the bottom and top 10% (by row count);
    ``quartiles`` returns four consecutive groups cut at the 25/50/75
    positions of the stable sort order. Ties are broken by original row
    order (stable sort), so the groups always partition their selection.
    """
    if key not in panel.columns:
        raise ValidationError(f"unknown split key {key!r}")
    n = len(panel)
    order = panel[key].to_numpy().argsort(kind="stable")
    if scheme == "decile-extremes":
        k = n // 10
        if k < 1:
            raise ValidationError("fewer rows than groups for decile-extremes split")
        return {
            "bottom10": panel.iloc[order[:k]],
            "top10": panel.iloc[order[n - k:]],
        }
    if scheme == "quartiles":
        if n < 4:
            raise ValidationError("fewer rows than groups for quartile split")
        cuts = [0, n // 4, n // 2, 3 * n // 4, n]
        return {
            f"q{g + 1}": panel.iloc[order[cuts[g]:cuts[g + 1]]]
            for g in range(4)
        }
    raise ValidationError(f"unknown split scheme {scheme!r}")
