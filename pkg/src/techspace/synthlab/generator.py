"""Synthetic corpus generator with planted entry dynamics.

The generator grows a firm-by-technology patent corpus year by year. Initial
portfolios come from a latent capability model (firm skill minus technology
difficulty); each year, non-held cells convert to entry with a logistic
probability in the cell's current density, technology complexity, and a
government-support flag. Converted cells receive enough patents from two
years later onward to push their revealed advantage over 1 and keep it
there, so the pipeline's entry detector recovers the planted conversions.

Covariates entering the conversion draw are computed from the realized
counts with the same definitions the pipeline uses, and every candidate cell
is recorded in a truth table together with its realized entry outcome, so an
independent regression on the truth table gives the population benchmark the
pipeline estimates should reproduce.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import expit

from ..advantage import AdvantageMatrix, detect_entries, RtaSlice, rta_from_matrix
from ..complexity import mor, tci_transform
from ..corpus import I4T_CATEGORIES
from ..errors import ValidationError
from ..relatedness import density_matrix, proximity

ENTRY_LEAD = 2
PERSISTENCE = 2


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs of the synthetic corpus; the seed fully determines the output."""

    n_firms: int = 30
    n_techs: int = 25
    years: tuple[int, ...] = tuple(range(2007, 2015))
    # entry model (logit scale)
    base_rate: float = -6.5
    b_omega: float = 5.0
    b_tci: float = 0.35
    b_gov: float = 1.5
    gov_rate: float = 0.05
    #: apply the gov effect only to cells with below-median density that year
    gov_low_density_only: bool = False
    # capability model
    skill_sd: float = 1.0
    difficulty_sd: float = 1.0
    holding_offset: float = -1.6
    holding_slope: float = 1.1
    base_count_mean: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if not self.years or self.n_firms < 2 or self.n_techs < 2:
            raise ValidationError("need at least 2 firms, 2 techs, 1 year")
        years = sorted(self.years)
        if years != list(range(years[0], years[-1] + 1)):
            raise ValidationError("years must be contiguous")
        if len(years) < ENTRY_LEAD + PERSISTENCE + 2:
            raise ValidationError(
                "year span too short for any entry window: need at least "
                f"{ENTRY_LEAD + PERSISTENCE + 2} consecutive years")
        if not 0 <= self.gov_rate <= 1:
            raise ValidationError("gov_rate must be in [0, 1]")
        worst = expit(self.base_rate + abs(self.b_omega) + abs(self.b_tci) * math.log(101)
                      + abs(self.b_gov))
        if worst > 0.95:
            raise ValidationError(
                f"infeasible params: entry probability saturates at {worst:.3f}")
        if self.b_gov != 0 and self.gov_rate == 0:
            warnings.warn("b_gov is nonzero but gov_rate is 0: "
                          "the gov coefficient is unidentifiable")


def tech_codes(n: int) -> list[str]:
    """Deterministic 4-character CPC-like codes C000, C001, ..."""
    return [f"C{i:03d}" for i in range(n)]


def firm_ids(n: int) -> list[str]:
    return [f"F{i:04d}" for i in range(n)]


def _initial_portfolio(params: GeneratorParams, rng: np.random.Generator) -> np.ndarray:
    skill = rng.normal(0.0, params.skill_sd, params.n_firms)
    difficulty = rng.normal(0.0, params.difficulty_sd, params.n_techs)
    p = expit(params.holding_offset
              + params.holding_slope * (skill[:, None] - difficulty[None, :]))
    held = rng.random(p.shape) < p
    # every firm patents somewhere, every technology is patented by someone
    for i in range(params.n_firms):
        if not held[i].any():
            held[i, int(np.argmax(p[i]))] = True
    for a in range(params.n_techs):
        if not held[:, a].any():
            held[int(np.argmax(p[:, a])), a] = True
    return held


def _satisfy_rta(counts: np.ndarray, cells: list[tuple[int, int]],
                 boost: dict[tuple[int, int], int], max_rounds: int = 200) -> None:
    """Grow ``boost`` counts until every listed cell has RTA >= 1.

    Mutates ``counts`` and ``boost`` in place; boosts never shrink, keeping
    the realized series monotone across years.
    """
    for _ in range(max_rounds):
        if not cells:
            return
        total = counts.sum()
        row = counts.sum(axis=1)
        col = counts.sum(axis=0)
        deficient = []
        for i, a in cells:
            if counts[i, a] * total < row[i] * col[a]:
                deficient.append((i, a))
        if not deficient:
            return
        for i, a in deficient:
            # closed-form need assuming other counts fixed
            denom = total - row[i] - col[a] + counts[i, a]
            other_r = row[i] - counts[i, a]
            other_c = col[a] - counts[i, a]
            if denom > 0:
                need = math.ceil(other_r * other_c / denom) + 1
            else:
                need = counts[i, a] * 2 + 1
            add = max(need - counts[i, a], 1)
            counts[i, a] += add
            boost[(i, a)] = boost.get((i, a), 0) + add
            row[i] += add
            col[a] += add
            total += add


def gen_corpus(params: GeneratorParams, out_dir) -> dict[str, Path]:
    """Generate a corpus and write its input files; returns the paths.

    Emits patents.csv, firms.csv, support.csv, taxonomy.csv in the ingestion
    schemas plus truth_panel.csv with the generator-side candidate rows
    (firm, tech, year, omega, tci, gov, gov_effect, entry).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(params.seed)
    firms = firm_ids(params.n_firms)
    techs = tech_codes(params.n_techs)
    years = sorted(params.years)
    last = years[-1]

    held0 = _initial_portfolio(params, rng)
    base = np.where(held0, 1 + rng.poisson(params.base_count_mean, held0.shape), 0)

    # boosts[(i, a)] = {"start": year, "count": n}; active from start onward
    boosts: dict[tuple[int, int], dict] = {}
    scheduled: set[tuple[int, int]] = set()
    counts_by_year: dict[int, np.ndarray] = {}
    truth_rows = []
    support_rows = []
    gov_seq = 0

    for t in years:
        counts = base.copy()
        active = [(cell, b) for cell, b in boosts.items() if b["start"] <= t]
        for (i, a), b in active:
            counts[i, a] += b["count"]
        # keep every realized (planted) entry cell over the advantage threshold
        patch: dict[tuple[int, int], int] = {}
        _satisfy_rta(counts, [cell for cell, _ in active], patch)
        for cell, add in patch.items():
            boosts[cell]["count"] += add
        counts_by_year[t] = counts

        if t + ENTRY_LEAD + PERSISTENCE > last:
            continue  # no conversion draws without the full forward window

        rta = rta_from_matrix(counts)
        adv = AdvantageMatrix(year=t, firms=firms, techs=techs,
                              values=(rta >= 1.0).astype(np.int8))
        prox = proximity(adv)
        omega = density_matrix(adv, prox)
        tci = tci_transform(mor(adv), year=t).lookup()
        tci_col = np.array([tci.get(c, np.nan) for c in techs])

        cand_i, cand_j = np.nonzero((adv.values == 0)
                                    & ~np.isnan(tci_col)[np.newaxis, :])
        keep = np.array([(i, a) not in scheduled for i, a in zip(cand_i, cand_j)])
        cand_i, cand_j = cand_i[keep], cand_j[keep]
        gov = rng.random(len(cand_i)) < params.gov_rate
        om = omega[cand_i, cand_j]
        if params.gov_low_density_only and len(om):
            gov_effect = gov & (om < np.median(om))
        else:
            gov_effect = gov
        p = expit(params.base_rate + params.b_omega * om
                  + params.b_tci * tci_col[cand_j]
                  + params.b_gov * gov_effect)
        converted = rng.random(len(cand_i)) < p

        for k in range(len(cand_i)):
            i, a = int(cand_i[k]), int(cand_j[k])
            if gov[k]:
                support_rows.append((f"G{gov_seq:06d}", firms[i], 0.6, t, techs[a]))
                gov_seq += 1
            if converted[k]:
                boosts[(i, a)] = {"start": t + ENTRY_LEAD, "count": 1}
                scheduled.add((i, a))
            truth_rows.append({
                "firm_id": firms[i], "tech_code": techs[a], "year": t,
                "omega": om[k], "tci": tci_col[a], "gov": int(gov[k]),
                "gov_effect": int(gov_effect[k]), "converted": int(converted[k]),
            })

    # realized entry outcomes, exactly as the pipeline will see them
    slices = {
        t: RtaSlice(year=t, firms=firms, techs=techs,
                    values=rta_from_matrix(counts_by_year[t]))
        for t in years
    }
    events = detect_entries(slices, persistence=PERSISTENCE)
    event_set = set(zip(events["firm_id"], events["tech_code"], events["event_year"]))
    truth = pd.DataFrame(truth_rows)
    if len(truth):
        truth["entry"] = [
            int((f, c, y + ENTRY_LEAD) in event_set)
            for f, c, y in zip(truth["firm_id"], truth["tech_code"], truth["year"])
        ]

    paths = {
        "patents": out_dir / "patents.csv",
        "firms": out_dir / "firms.csv",
        "support": out_dir / "support.csv",
        "taxonomy": out_dir / "taxonomy.csv",
        "truth": out_dir / "truth_panel.csv",
    }
    _write_patents(paths["patents"], counts_by_year, firms, techs)
    _write_firms(paths["firms"], params, rng, firms, years)
    pd.DataFrame(support_rows, columns=[
        "project_id", "firm_id", "contribution_share", "year", "cpc_codes",
    ]).to_csv(paths["support"], index=False)
    _write_taxonomy(paths["taxonomy"], techs)
    truth.to_csv(paths["truth"], index=False)
    return paths


def _write_patents(path, counts_by_year, firms, techs) -> None:
    seq = 0
    chunks = []
    for t in sorted(counts_by_year):
        counts = counts_by_year[t]
        ii, jj = np.nonzero(counts)
        reps = counts[ii, jj]
        n = int(reps.sum())
        ids = [f"P{seq + k:08d}" for k in range(n)]
        seq += n
        chunks.append(pd.DataFrame({
            "patent_id": ids,
            "family_id": ids,  # single-member families
            "firm_id": np.repeat(np.asarray(firms)[ii], reps),
            "year": t,
            "cpc_codes": np.repeat(np.asarray(techs)[jj], reps),
        }))
    pd.concat(chunks, ignore_index=True).to_csv(path, index=False)


def _write_firms(path, params, rng, firms, years) -> None:
    founding = years[0] - 1 - rng.integers(0, 30, len(firms))
    industry = rng.integers(0, 8, len(firms))
    size = np.exp(rng.normal(4.5, 1.0, len(firms)))
    rows = []
    for i, firm in enumerate(firms):
        for t in years:
            rows.append({
                "firm_id": firm,
                "founding_year": int(founding[i]),
                "industry_code": f"IND{industry[i]}",
                "year": t,
                "employees": int(round(size[i] * (1 + 0.05 * rng.normal()))) + 1,
                "profit_ratio": round(float(rng.normal(0.05, 0.12)), 6),
                "debt_ratio": round(float(rng.uniform(0.1, 0.9)), 6),
            })
    pd.DataFrame(rows).to_csv(path, index=False)


def _write_taxonomy(path, techs) -> None:
    """Map the first two dozen codes round-robin onto the ten I4T categories."""
    n_i4t = min(len(techs), 20)
    rows = [
        {"cpc_prefix": techs[k], "category": I4T_CATEGORIES[k % len(I4T_CATEGORIES)]}
        for k in range(n_i4t)
    ]
    pd.DataFrame(rows).to_csv(path, index=False)
