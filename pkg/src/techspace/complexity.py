"""Method of Reflections complexity scores and the TCI transform.

The reflections recursion alternately averages scores across the bipartite
firm-technology advantage matrix, starting from degree counts
(diversification for firms, ubiquity for technologies). Raw iterates
converge to a constant vector, so each iteration is standardized to mean 0
and standard deviation 1 before the next; reported vectors are oriented so
that technology scores correlate negatively with ubiquity (higher score =
less ubiquitous = more complex) and firm scores positively with
diversification.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .advantage import AdvantageMatrix, advantage_matrix, rta_from_matrix
from .corpus import CountCube, I4TMap
from .errors import NumericError

__all__ = [
    "ComplexityScores",
    "TciSlice",
    "prune_degenerates",
    "mor",
    "tci_transform",
    "complexity_ranks",
    "figure2_dataset",
]

DEFAULT_ITERATIONS = 20
DEFAULT_TCI_SCALE = 100.0
DEFAULT_PERIODS = ((2007, 2010), (2011, 2014), (2015, 2018))


@dataclass(frozen=True)
class ComplexityScores:
    """Per-iteration firm and technology score vectors.

    ``firm_scores[N]`` / ``tech_scores[N]`` hold iteration N, with row 0 the
    raw integer degree counts and rows 1..n_max standardized and oriented.
    """

    firms: list[str]
    techs: list[str]
    firm_scores: np.ndarray  # shape (n_max + 1, n_firms)
    tech_scores: np.ndarray  # shape (n_max + 1, n_techs)
    n_max: int
    removed_firms: list[str] = field(default_factory=list)
    removed_techs: list[str] = field(default_factory=list)

    @property
    def diversification(self) -> np.ndarray:
        return self.firm_scores[0]

    @property
    def ubiquity(self) -> np.ndarray:
        return self.tech_scores[0]

    def final_tech_scores(self) -> np.ndarray:
        return self.tech_scores[self.n_max]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for n in range(self.n_max + 1):
            rows.append(pd.DataFrame({
                "id": self.firms, "side": "firm", "iteration": n,
                "score": self.firm_scores[n],
            }))
            rows.append(pd.DataFrame({
                "id": self.techs, "side": "tech", "iteration": n,
                "score": self.tech_scores[n],
            }))
        return pd.concat(rows, ignore_index=True)


def prune_degenerates(adv: AdvantageMatrix) -> tuple[AdvantageMatrix, list[str], list[str]]:
    """Drop all-zero rows and columns until none remain (fixpoint).

    Returns (pruned matrix, removed firm ids, removed tech ids). Needed
    because the reflections recursion divides by the degree counts.
    """
    m = adv.values
    firms = np.asarray(adv.firms)
    techs = np.asarray(adv.techs)
    keep_f = np.ones(len(firms), dtype=bool)
    keep_t = np.ones(len(techs), dtype=bool)
    while True:
        sub = m[np.ix_(keep_f, keep_t)]
        zero_f = sub.sum(axis=1) == 0
        zero_t = sub.sum(axis=0) == 0
        if not zero_f.any() and not zero_t.any():
            break
        keep_f[np.flatnonzero(keep_f)[zero_f]] = False
        keep_t[np.flatnonzero(keep_t)[zero_t]] = False
    pruned = AdvantageMatrix(
        year=adv.year,
        firms=list(firms[keep_f]),
        techs=list(techs[keep_t]),
        values=m[np.ix_(keep_f, keep_t)],
    )
    return pruned, list(firms[~keep_f]), list(techs[~keep_t])


def _standardize(v: np.ndarray) -> np.ndarray:
    sd = v.std()
    if sd == 0:
        return v - v.mean()
    return (v - v.mean()) / sd


_SIGN_TOL = 1e-9


def _orient_sign(v: np.ndarray, anchor: np.ndarray, want_negative: bool) -> float:
    """Sign (+1/-1) that flips v so corr(v, anchor) has the wanted sign.

    When the correlation is too close to zero to be a reliable signal (or
    either vector is constant), fall back to making the first element of v
    with magnitude above tolerance positive, so the choice is deterministic
    and independent of floating-point noise in the correlation.
    """
    c = 0.0
    if v.std() > 0 and anchor.std() > 0:
        c = float(np.corrcoef(v, anchor)[0, 1])
    if abs(c) > _SIGN_TOL:
        wrong = c > 0 if want_negative else c < 0
        return -1.0 if wrong else 1.0
    big = np.flatnonzero(np.abs(v) > _SIGN_TOL)
    if big.size and v[big[0]] < 0:
        return -1.0
    return 1.0


def mor(adv: AdvantageMatrix, n_max: int = DEFAULT_ITERATIONS) -> ComplexityScores:
    """Run the reflections recursion for ``n_max`` iterations.

    Degenerate (all-zero) rows and columns are pruned first; an empty matrix
    after pruning is an error.
    """
    pruned, removed_f, removed_t = prune_degenerates(adv)
    if not pruned.firms or not pruned.techs:
        raise NumericError("advantage matrix is empty after pruning")
    m = pruned.values.astype(float)
    k_f0 = m.sum(axis=1)
    k_t0 = m.sum(axis=0)

    firm_scores = np.empty((n_max + 1, len(k_f0)))
    tech_scores = np.empty((n_max + 1, len(k_t0)))
    firm_scores[0] = k_f0
    tech_scores[0] = k_t0

    prev_f, prev_t = k_f0.astype(float), k_t0.astype(float)
    for n in range(1, n_max + 1):
        new_f = _standardize((m @ prev_t) / k_f0)
        new_t = _standardize((m.T @ prev_f) / k_t0)
        prev_f, prev_t = new_f, new_t
        firm_scores[n] = new_f
        tech_scores[n] = new_t

    # Fix orientation globally once the recursion is done: the final
    # technology vector must anti-correlate with ubiquity (higher score =
    # more complex), the final firm vector must correlate with
    # diversification.  Earlier iterates are then aligned with the oriented
    # final vector of the same kind so the whole trajectory is coherent.
    s_t = _orient_sign(tech_scores[n_max], k_t0, want_negative=True)
    s_f = _orient_sign(firm_scores[n_max], k_f0, want_negative=False)
    tech_scores[n_max] *= s_t
    firm_scores[n_max] *= s_f
    for n in range(1, n_max):
        tech_scores[n] *= _orient_sign(
            tech_scores[n], tech_scores[n_max], want_negative=False
        )
        firm_scores[n] *= _orient_sign(
            firm_scores[n], firm_scores[n_max], want_negative=False
        )

    return ComplexityScores(
        firms=list(pruned.firms), techs=list(pruned.techs),
        firm_scores=firm_scores, tech_scores=tech_scores, n_max=n_max,
        removed_firms=removed_f, removed_techs=removed_t,
    )


@dataclass(frozen=True)
class TciSlice:
    """Per-technology complexity for one year: raw score, rank, TCI value.

    Ranks are a permutation of 1..n_techs with 1 = most complex; ties in the
    raw score are broken by technology code. The transform is monotone in
    the raw score.
    """

    year: int
    table: pd.DataFrame  # columns tech_code, raw, rank, tci

    def lookup(self) -> dict[str, float]:
        return dict(zip(self.table["tech_code"], self.table["tci"]))


def complexity_ranks(techs: list[str], scores: np.ndarray) -> np.ndarray:
    """Dense ranks, 1 = highest score; ties broken by technology code."""
    order = sorted(range(len(techs)), key=lambda j: (-scores[j], techs[j]))
    ranks = np.empty(len(techs), dtype=np.int64)
    ranks[order] = np.arange(1, len(techs) + 1)
    return ranks


def tci_transform(scores: ComplexityScores, year: int,
                  scale: float = DEFAULT_TCI_SCALE) -> TciSlice:
    """Rescale final technology scores to [0, 1] and map x -> ln(1 + scale*x).

    The default scale of 100 puts the most complex technology at
    ln(101) ~= 4.615.
    """
    raw = scores.final_tech_scores()
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        raise NumericError("degenerate complexity: constant score vector")
    rescaled = (raw - lo) / (hi - lo)
    tci = np.log1p(scale * rescaled)
    table = pd.DataFrame({
        "tech_code": scores.techs,
        "raw": raw,
        "rank": complexity_ranks(scores.techs, raw),
        "tci": tci,
    }).sort_values("rank", ignore_index=True)
    return TciSlice(year=year, table=table)


def figure2_dataset(cube: CountCube, taxonomy: I4TMap,
                    periods=DEFAULT_PERIODS, n_max: int = DEFAULT_ITERATIONS) -> pd.DataFrame:
    """Per (I4T category, period): pooled patent volume and mean complexity rank.

    For each period the counts are pooled over its years, the advantage
    matrix recomputed, and the technologies ranked by final reflections
    score (rank 1 = most complex). Each category row carries the log of its
    pooled patent total and the mean rank of its member codes; categories
    with no patents in a period are flagged rather than dropped.
    """
    corpus_years = cube.years()
    rows = []
    for lo, hi in periods:
        label = f"{lo}-{hi}"
        years = [y for y in corpus_years if lo <= y <= hi]
        if years:
            firms, techs, counts = cube.window_slice(years)
            adv = AdvantageMatrix(
                year=lo, firms=firms, techs=techs,
                values=(rta_from_matrix(counts) >= 1.0).astype(np.int8),
            )
            scores = mor(adv, n_max=n_max)
            ranks = dict(zip(scores.techs,
                             complexity_ranks(scores.techs, scores.final_tech_scores())))
            tech_totals = dict(zip(techs, counts.sum(axis=0)))
        else:
            ranks, tech_totals = {}, {}
        for category in taxonomy.categories:
            members = [t for t in tech_totals if taxonomy.classify(t) == category]
            total = int(sum(tech_totals[t] for t in members))
            member_ranks = [ranks[t] for t in members if t in ranks]
            rows.append({
                "category": category,
                "period": label,
                "total_patents": total,
                "log_total_patents": float(np.log(total)) if total > 0 else float("nan"),
                "mean_complexity_rank": (sum(member_ranks) / len(member_ranks)
                                         if member_ranks else float("nan")),
                "note": "" if total > 0 else "no patents in period",
            })
    return pd.DataFrame(rows)
