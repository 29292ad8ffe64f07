"""Technology proximity and relatedness density.

Proximity between two technologies is the minimum of the two conditional
probabilities of co-advantage across firms. Density is the proximity-weighted
share of a firm's held technologies around a target technology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .advantage import AdvantageMatrix, advantage_matrix, compute_rta, rta_from_matrix
from .corpus import CountCube
from .errors import DataError

__all__ = ["ProximityMatrix", "proximity", "density", "density_matrix", "density_panel"]


@dataclass(frozen=True)
class ProximityMatrix:
    """Symmetric technology x technology proximity in [0, 1], diagonal 1."""

    techs: list[str]
    values: np.ndarray

    def to_dense_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=self.techs, columns=self.techs)

    def to_triplets(self) -> pd.DataFrame:
        iu, ju = np.triu_indices(len(self.techs), k=1)
        keep = self.values[iu, ju] > 0
        return pd.DataFrame({
            "tech_a": np.asarray(self.techs)[iu[keep]],
            "tech_b": np.asarray(self.techs)[ju[keep]],
            "value": self.values[iu, ju][keep],
        })


def proximity(adv: AdvantageMatrix) -> ProximityMatrix:
    """Minimum pairwise conditional probability of co-advantage.

    phi[a, b] = min(n_ab / n_a, n_ab / n_b) with n_a the number of firms
    holding a and n_ab the number holding both. Technologies nobody holds
    get 0 against everything; the diagonal is fixed at 1.
    """
    if not len(adv.firms):
        raise DataError("empty advantage matrix")
    m = adv.values.astype(float)
    co = m.T @ m                       # n_ab; diagonal is n_a
    n = np.diag(co).copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = co / n[np.newaxis, :]   # Pr(a | b) in cell (a, b)
    phi = np.minimum(cond, cond.T)
    phi[~np.isfinite(phi)] = 0.0
    np.fill_diagonal(phi, 1.0)
    return ProximityMatrix(techs=list(adv.techs), values=phi)


def density_matrix(adv: AdvantageMatrix, prox: ProximityMatrix) -> np.ndarray:
    """Density for every (firm, tech) cell, aligned with ``adv.values``.

    omega[i, a] = sum_b phi[a, b] * U[i, b] / sum_b phi[a, b], with the sum
    running over all technologies including a itself. Technologies whose
    proximity row sums to 0 get density 0.
    """
    if list(adv.techs) != list(prox.techs):
        raise DataError("advantage and proximity matrices cover different technologies")
    denom = prox.values.sum(axis=0)
    numer = adv.values.astype(float) @ prox.values
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = numer / denom[np.newaxis, :]
    omega[:, denom == 0] = 0.0
    return omega


def density(adv: AdvantageMatrix, prox: ProximityMatrix, firm: str, tech: str) -> float:
    """Density of related technologies around ``tech`` for one firm."""
    if tech not in prox.techs:
        raise DataError(f"unknown technology {tech!r}")
    j = prox.techs.index(tech)
    row = adv.firm_row(firm).astype(float)
    denom = prox.values[j].sum()
    if denom == 0:
        return 0.0
    return float(row @ prox.values[j] / denom)


def density_panel(cube: CountCube, years: list[int] | None = None,
                  proximity_window: int = 1) -> pd.DataFrame:
    """Density for all (firm, tech, year) cells of a corpus.

    Advantage is recomputed per year; proximity uses the trailing window of
    ``proximity_window`` years ending at the focal year (1 = same-year, the
    default). The proximity matrix is aligned to the focal year's technology
    set. Returns a DataFrame (firm_id, tech_code, year, omega).
    """
    years = list(years) if years is not None else cube.years()
    frames = []
    for year in years:
        adv = advantage_matrix(compute_rta(cube, year))
        prox = proximity_for_year(cube, year, proximity_window, adv)
        omega = density_matrix(adv, prox)
        i, j = np.meshgrid(np.arange(len(adv.firms)), np.arange(len(adv.techs)),
                           indexing="ij")
        frames.append(pd.DataFrame({
            "firm_id": np.asarray(adv.firms)[i.ravel()],
            "tech_code": np.asarray(adv.techs)[j.ravel()],
            "year": year,
            "omega": omega.ravel(),
        }))
    if not frames:
        return pd.DataFrame(columns=["firm_id", "tech_code", "year", "omega"])
    return pd.concat(frames, ignore_index=True)


def proximity_for_year(cube: CountCube, year: int, proximity_window: int = 1,
                       adv: AdvantageMatrix | None = None) -> ProximityMatrix:
    """Proximity matrix for a focal year, aligned to that year's tech set.

    With a window of 1 this is the proximity of the year's own advantage
    matrix. A larger window pools counts over the trailing ``window`` years
    (those present in the corpus) before thresholding RTA, then restricts
    rows/columns to the focal year's technologies, padding missing ones with
    zero proximity.
    """
    if adv is None:
        adv = advantage_matrix(compute_rta(cube, year))
    if proximity_window <= 1:
        return proximity(adv)
    window_years = [y for y in cube.years() if year - proximity_window < y <= year]
    firms, techs, counts = cube.window_slice(window_years)
    pooled_adv = AdvantageMatrix(
        year=year, firms=firms, techs=techs,
        values=(rta_from_matrix(counts) >= 1.0).astype(np.int8),
    )
    pooled = proximity(pooled_adv)
    # align to the focal year's technology list
    idx = {t: k for k, t in enumerate(pooled.techs)}
    n = len(adv.techs)
    values = np.zeros((n, n))
    present = [(j, idx[t]) for j, t in enumerate(adv.techs) if t in idx]
    if present:
        js, ks = zip(*present)
        values[np.ix_(js, js)] = pooled.values[np.ix_(ks, ks)]
    np.fill_diagonal(values, 1.0)
    return ProximityMatrix(techs=list(adv.techs), values=values)
