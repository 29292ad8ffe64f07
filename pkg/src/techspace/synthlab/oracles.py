"""Naive reference implementations used only for verification.

Everything here recomputes pipeline quantities from first principles with
explicit Python loops and dictionaries, deliberately avoiding the vectorized
code paths in the main modules. Keep these slow and obvious; they are the
ground truth for the fast implementations, so they must never import from
the corpus/advantage/relatedness/complexity/panel modules.
"""

from __future__ import annotations

import math

import numpy as np
import pandas as pd

I4T_RANK_TIEBREAK = None  # ranks break ties by technology code, ascending


# ---------------------------------------------------------------------------
# elementary measures

def oracle_rta(counts: np.ndarray) -> np.ndarray:
    """Balassa ratio computed cell by cell."""
    counts = np.asarray(counts, dtype=float)
    n_firms, n_techs = counts.shape
    total = sum(counts[i][a] for i in range(n_firms) for a in range(n_techs))
    out = np.zeros_like(counts)
    for i in range(n_firms):
        firm_total = sum(counts[i])
        for a in range(n_techs):
            tech_total = sum(counts[j][a] for j in range(n_firms))
            if firm_total > 0 and tech_total > 0:
                out[i][a] = (counts[i][a] / firm_total) / (tech_total / total)
    return out


def oracle_proximity(holders: dict[str, set[str]], techs: list[str]) -> dict:
    """phi[(a, b)] = min of the two conditional co-advantage probabilities.

    ``holders`` maps tech -> set of firms holding advantage in it.
    """
    phi = {}
    for a in techs:
        for b in techs:
            if a == b:
                phi[(a, b)] = 1.0
                continue
            n_a = len(holders.get(a, set()))
            n_b = len(holders.get(b, set()))
            n_ab = len(holders.get(a, set()) & holders.get(b, set()))
            if n_a == 0 or n_b == 0:
                phi[(a, b)] = 0.0
            else:
                phi[(a, b)] = min(n_ab / n_a, n_ab / n_b)
    return phi


def oracle_density(held: set[str], phi: dict, techs: list[str], target: str) -> float:
    """Direct evaluation of the density ratio for one firm and technology."""
    num = sum(phi[(target, b)] for b in techs if b in held)
    den = sum(phi[(target, b)] for b in techs)
    return num / den if den > 0 else 0.0


def oracle_entries(series: list[float], persistence: int = 2) -> list[int]:
    """Exhaustive sliding-window scan; index t is an event iff the value is
    below 1 at t-1 and at or above 1 at t, t+1, ..., t+persistence."""
    events = []
    for t in range(len(series)):
        if t - 1 < 0 or t + persistence >= len(series):
            continue
        if series[t - 1] >= 1.0:
            continue
        if all(series[t + k] >= 1.0 for k in range(persistence + 1)):
            events.append(t)
    return events


# ---------------------------------------------------------------------------
# method of reflections

def _mean(xs):
    return sum(xs) / len(xs)


def _sd(xs):
    m = _mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


def _corr(xs, ys):
    mx, my = _mean(xs), _mean(ys)
    sx, sy = _sd(xs), _sd(ys)
    if sx == 0 or sy == 0:
        return 0.0
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / (len(xs) * sx * sy)


def oracle_mor(firms: list[str], techs: list[str], matrix, n_max: int = 20) -> dict:
    """Reflections recursion by explicit loops.

    Returns {"firms", "techs", "firm_scores", "tech_scores"} where the score
    entries are lists indexed by iteration (0 = degree counts). Standardizes
    each iteration (population sd). Orientation is fixed once at the end:
    the final technology vector anti-correlates with ubiquity, the final
    firm vector correlates with diversification, and every earlier iterate
    is aligned positively with the oriented final vector of its kind.
    """
    m = [list(map(float, row)) for row in np.asarray(matrix)]
    firms, techs = list(firms), list(techs)
    # iterative pruning of zero rows/columns
    changed = True
    while changed:
        changed = False
        keep_rows = [i for i in range(len(firms)) if sum(m[i]) > 0]
        if len(keep_rows) != len(firms):
            firms = [firms[i] for i in keep_rows]
            m = [m[i] for i in keep_rows]
            changed = True
        keep_cols = [a for a in range(len(techs))
                     if sum(m[i][a] for i in range(len(firms))) > 0]
        if len(keep_cols) != len(techs):
            techs = [techs[a] for a in keep_cols]
            m = [[row[a] for a in keep_cols] for row in m]
            changed = True

    kf0 = [sum(row) for row in m]
    kt0 = [sum(m[i][a] for i in range(len(firms))) for a in range(len(techs))]
    firm_scores = [list(kf0)]
    tech_scores = [list(kt0)]
    prev_f, prev_t = list(kf0), list(kt0)

    def standardize(xs):
        mu, sd = _mean(xs), _sd(xs)
        if sd == 0:
            return [x - mu for x in xs]
        return [(x - mu) / sd for x in xs]

    for _ in range(n_max):
        new_f = standardize([
            sum(m[i][a] * prev_t[a] for a in range(len(techs))) / kf0[i]
            for i in range(len(firms))
        ])
        new_t = standardize([
            sum(m[i][a] * prev_f[i] for i in range(len(firms))) / kt0[a]
            for a in range(len(techs))
        ])
        prev_f, prev_t = new_f, new_t
        firm_scores.append(list(new_f))
        tech_scores.append(list(new_t))

    tol = 1e-9

    def orient_sign(v, anchor, want_negative):
        c = _corr(v, anchor)
        if abs(c) > tol:
            wrong = c > 0 if want_negative else c < 0
            return -1.0 if wrong else 1.0
        for x in v:
            if abs(x) > tol:
                return -1.0 if x < 0 else 1.0
        return 1.0

    s_t = orient_sign(tech_scores[n_max], kt0, True)
    s_f = orient_sign(firm_scores[n_max], kf0, False)
    tech_scores[n_max] = [s_t * x for x in tech_scores[n_max]]
    firm_scores[n_max] = [s_f * x for x in firm_scores[n_max]]
    for n in range(1, n_max):
        st = orient_sign(tech_scores[n], tech_scores[n_max], False)
        sf = orient_sign(firm_scores[n], firm_scores[n_max], False)
        tech_scores[n] = [st * x for x in tech_scores[n]]
        firm_scores[n] = [sf * x for x in firm_scores[n]]

    return {"firms": firms, "techs": techs,
            "firm_scores": firm_scores, "tech_scores": tech_scores}


def oracle_tci(techs: list[str], scores: list[float], scale: float = 100.0) -> dict:
    """Min-max rescale + log transform + complexity ranks (1 = most complex)."""
    lo, hi = min(scores), max(scores)
    order = sorted(range(len(techs)), key=lambda j: (-scores[j], techs[j]))
    ranks = {}
    for pos, j in enumerate(order):
        ranks[techs[j]] = pos + 1
    out = {}
    for j, tech in enumerate(techs):
        rescaled = (scores[j] - lo) / (hi - lo)
        out[tech] = {"raw": scores[j], "rank": ranks[tech],
                     "tci": math.log(1.0 + scale * rescaled)}
    return out


# ---------------------------------------------------------------------------
# corpus reconstruction and full panel

def _truncate(code: str, level) -> str:
    return code if level == "full" else code[: int(level)]


def _corpus_stage(patents: pd.DataFrame, cpc_level) -> dict:
    """Family merge, counts, per-year RTA / advantage sets, by loops."""
    families: dict[tuple, dict] = {}
    for row in patents.itertuples(index=False):
        key = (row.family_id, row.firm_id)
        codes = {c.strip() for c in str(row.cpc_codes).split("|") if c.strip()}
        if key not in families:
            families[key] = {"year": int(row.year), "codes": set(codes)}
        else:
            families[key]["year"] = min(families[key]["year"], int(row.year))
            families[key]["codes"] |= codes
    counts: dict[tuple, int] = {}
    for (family, firm), info in families.items():
        truncs = {_truncate(c, cpc_level) for c in info["codes"]}
        for tech in truncs:
            cell = (firm, tech, info["year"])
            counts[cell] = counts.get(cell, 0) + 1

    years = sorted({y for (_, _, y) in counts})
    per_year = {}
    for year in years:
        cells = {(f, t): n for (f, t, y), n in counts.items() if y == year}
        firms = sorted({f for f, _ in cells})
        techs = sorted({t for _, t in cells})
        total = sum(cells.values())
        firm_tot = {f: sum(n for (g, _), n in cells.items() if g == f) for f in firms}
        tech_tot = {t: sum(n for (_, u), n in cells.items() if u == t) for t in techs}
        rta = {}
        for f in firms:
            for t in techs:
                n = cells.get((f, t), 0)
                rta[(f, t)] = (n / firm_tot[f]) / (tech_tot[t] / total)
        held = {f: {t for t in techs if rta[(f, t)] >= 1.0} for f in firms}
        holders = {t: {f for f in firms if t in held[f]} for t in techs}
        per_year[year] = {"firms": firms, "techs": techs, "rta": rta,
                          "held": held, "holders": holders,
                          "counts": cells}
    return {"counts": counts, "per_year": per_year, "years": years}


def _gov_cells(support: pd.DataFrame, cpc_level, window: int = 1) -> set[tuple]:
    cells = set()
    for row in support.itertuples(index=False):
        share = float(row.contribution_share)
        if not (0 <= share <= 1) or share <= 0.5:
            continue
        for code in str(row.cpc_codes).split("|"):
            code = code.strip()
            if code:
                for k in range(window):
                    cells.add((row.firm_id, _truncate(code, cpc_level),
                               int(row.year) + k))
    return cells


def oracle_entry_events(per_year: dict, years: list[int],
                        persistence: int = 2) -> set[tuple]:
    """All (firm, tech, year) entry events, scanning each pair's series."""
    all_firms = sorted({f for y in years for f in per_year[y]["firms"]})
    all_techs = sorted({t for y in years for t in per_year[y]["techs"]})
    events = set()
    for firm in all_firms:
        for tech in all_techs:
            for t in years:
                window = [t - 1] + [t + k for k in range(persistence + 1)]
                if any(w not in per_year for w in window):
                    continue
                vals = [per_year[w]["rta"].get((firm, tech), 0.0) for w in window]
                if vals[0] < 1.0 and all(v >= 1.0 for v in vals[1:]):
                    events.add((firm, tech, t))
    return events


def oracle_panel(patents: pd.DataFrame, firms: pd.DataFrame, support: pd.DataFrame,
                 taxonomy=None, cpc_level=4, persistence: int = 2,
                 entry_lead: int = 2, include_incumbents: bool = False,
                 tci_scale: float = 100.0, n_max: int = 20) -> pd.DataFrame:
    """Panel rows built by exhaustive nested loops from the raw tables."""
    stage = _corpus_stage(patents, cpc_level)
    per_year, years = stage["per_year"], stage["years"]
    gov = _gov_cells(support, cpc_level)
    events = oracle_entry_events(per_year, years, persistence)

    info: dict[tuple, dict] = {}
    for row in firms.itertuples(index=False):
        vals = (row.employees, row.profit_ratio, row.debt_ratio)
        if any(v is None or (isinstance(v, float) and math.isnan(v)) for v in vals):
            continue
        info[(row.firm_id, int(row.year))] = {
            "founding_year": int(row.founding_year),
            "industry_code": row.industry_code,
            "employees": float(row.employees),
            "profit_ratio": float(row.profit_ratio),
            "debt_ratio": float(row.debt_ratio),
        }

    horizon = entry_lead + persistence
    rows = []
    for t in years:
        if any(t + k not in per_year for k in range(horizon + 1)):
            continue
        snap = per_year[t]
        phi = oracle_proximity(snap["holders"], snap["techs"])
        mat = [[1.0 if tech in snap["held"][f] else 0.0 for tech in snap["techs"]]
               for f in snap["firms"]]
        scores = oracle_mor(snap["firms"], snap["techs"], mat, n_max)
        tci = oracle_tci(scores["techs"], scores["tech_scores"][n_max], tci_scale)

        for firm in snap["firms"]:
            if (firm, t) not in info:
                continue
            fin = info[(firm, t)]
            held = snap["held"][firm]
            n_rta = len(held)
            for tech in snap["techs"]:
                if not include_incumbents and tech in held:
                    continue
                if tech not in tci:
                    continue
                competitors = sum(
                    1 for other in snap["firms"]
                    if other != firm
                    and info.get((other, t), {}).get("industry_code") == fin["industry_code"]
                    and tech in snap["held"][other]
                )
                rows.append({
                    "firm_id": firm,
                    "tech_code": tech,
                    "year": t,
                    "entry": int((firm, tech, t + entry_lead) in events),
                    "omega": oracle_density(held, phi, snap["techs"], tech),
                    "tci": tci[tech]["tci"],
                    "gov": int((firm, tech, t) in gov),
                    "age": t - fin["founding_year"],
                    "num_employee": fin["employees"],
                    "num_competitor": competitors,
                    "num_rta": n_rta,
                    "profit_ratio": fin["profit_ratio"],
                    "debt_ratio": fin["debt_ratio"],
                    "industry_code": fin["industry_code"],
                    "i4t_category": (taxonomy.classify(tech) or "") if taxonomy else "",
                })
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# regression and figure-2 references

def oracle_ols(y, x, add_intercept: bool = True) -> np.ndarray:
    """OLS coefficients by a direct normal-equations solve."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if add_intercept:
        x = np.column_stack([x, np.ones(len(y))])
    return np.linalg.solve(x.T @ x, x.T @ y)


def oracle_ols_dummies(panel: pd.DataFrame, dependent: str, regressors: list[str],
                       fe_columns: list[str]) -> dict:
    """Fixed effects via explicit dummy columns (drop-first) plus intercept.

    Returns coefficients and homoskedastic standard errors for the
    regressors only.
    """
    data = panel[[dependent, *regressors, *fe_columns]].dropna()
    y = data[dependent].to_numpy(dtype=float)
    blocks = [data[list(regressors)].to_numpy(dtype=float)]
    for col in fe_columns:
        levels = sorted(data[col].unique())
        for level in levels[1:]:
            blocks.append((data[col] == level).to_numpy(dtype=float)[:, np.newaxis])
    blocks.append(np.ones((len(data), 1)))
    x = np.column_stack(blocks)
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ beta
    dof = len(y) - np.linalg.matrix_rank(x)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.pinv(x.T @ x)
    k = len(regressors)
    return {"coef": beta[:k], "se": np.sqrt(np.diag(cov))[:k], "df": dof,
            "ssr": float(resid @ resid)}


def oracle_figure2(patents: pd.DataFrame, taxonomy, periods, cpc_level=4,
                   n_max: int = 20) -> pd.DataFrame:
    """Category/period patent totals and mean complexity ranks by loops."""
    stage = _corpus_stage(patents, cpc_level)
    counts = stage["counts"]
    categories = taxonomy.categories
    rows = []
    for lo, hi in periods:
        label = f"{lo}-{hi}"
        cells = {(f, t): 0 for (f, t, y) in counts if lo <= y <= hi}
        for (f, t, y), n in counts.items():
            if lo <= y <= hi:
                cells[(f, t)] += n
        ranks, tech_totals = {}, {}
        if cells:
            firms = sorted({f for f, _ in cells})
            techs = sorted({t for _, t in cells})
            dense = [[cells.get((f, t), 0) for t in techs] for f in firms]
            rta = oracle_rta(np.asarray(dense, dtype=float))
            mat = (rta >= 1.0).astype(float)
            scores = oracle_mor(firms, techs, mat, n_max)
            final = scores["tech_scores"][n_max]
            order = sorted(range(len(scores["techs"])),
                           key=lambda j: (-final[j], scores["techs"][j]))
            for pos, j in enumerate(order):
                ranks[scores["techs"][j]] = pos + 1
            for (f, t), n in cells.items():
                tech_totals[t] = tech_totals.get(t, 0) + n
        for category in categories:
            members = [t for t in sorted(tech_totals)
                       if taxonomy.classify(t) == category]
            total = sum(tech_totals[t] for t in members)
            member_ranks = [ranks[t] for t in members if t in ranks]
            rows.append({
                "category": category,
                "period": label,
                "total_patents": int(total),
                "log_total_patents": math.log(total) if total > 0 else float("nan"),
                "mean_complexity_rank": (sum(member_ranks) / len(member_ranks)
                                         if member_ranks else float("nan")),
                "note": "" if total > 0 else "no patents in period",
            })
    return pd.DataFrame(rows)


def oracle_suite(patents: pd.DataFrame, firms: pd.DataFrame, support: pd.DataFrame,
                 taxonomy=None, cpc_level=4, persistence: int = 2,
                 entry_lead: int = 2, n_max: int = 20) -> dict:
    """Reference values for every numeric stage of a small corpus.

    Returns per-year proximity dicts, held/holders sets, RTA dicts, entry
    events, MOR scores, and the full panel, all computed by naive loops.
    """
    stage = _corpus_stage(patents, cpc_level)
    per_year = stage["per_year"]
    out = {"years": stage["years"], "per_year": {}}
    for year, snap in per_year.items():
        phi = oracle_proximity(snap["holders"], snap["techs"])
        mat = [[1.0 if t in snap["held"][f] else 0.0 for t in snap["techs"]]
               for f in snap["firms"]]
        omega = {
            (f, t): oracle_density(snap["held"][f], phi, snap["techs"], t)
            for f in snap["firms"] for t in snap["techs"]
        }
        out["per_year"][year] = {
            "rta": snap["rta"], "held": snap["held"], "holders": snap["holders"],
            "proximity": phi, "density": omega,
            "mor": oracle_mor(snap["firms"], snap["techs"], mat, n_max),
            "firms": snap["firms"], "techs": snap["techs"],
        }
    out["entries"] = oracle_entry_events(per_year, stage["years"], persistence)
    out["panel"] = oracle_panel(patents, firms, support, taxonomy, cpc_level,
                                persistence, entry_lead)
    return out
