"""Shared fixtures: synthetic corpora, loaded tables, and helpers."""

from __future__ import annotations

import pathlib

import numpy as np
import pandas as pd
import pytest

import techspace as ts
from techspace.synthlab import GeneratorParams, gen_corpus

GOLDEN_DIR = pathlib.Path(__file__).resolve().parent.parent / "data" / "golden"


def random_advantage(rng: np.random.Generator, n_firms: int, n_techs: int,
                     p: float = 0.3) -> ts.AdvantageMatrix:
    """Random binary matrix with no empty rows or columns."""
    values = (rng.random((n_firms, n_techs)) < p).astype(np.int8)
    for i in np.flatnonzero(values.sum(axis=1) == 0):
        values[i, rng.integers(n_techs)] = 1
    for j in np.flatnonzero(values.sum(axis=0) == 0):
        values[rng.integers(n_firms), j] = 1
    return ts.AdvantageMatrix(
        year=2010,
        firms=[f"F{i:03d}" for i in range(n_firms)],
        techs=[f"T{j:03d}" for j in range(n_techs)],
        values=values,
    )


def load_corpus(paths: dict) -> dict:
    """Parse a generated corpus into the pipeline's working tables."""
    patents, _ = ts.load_patents(paths["patents"])
    firms, _ = ts.load_firms(paths["firms"])
    gov, _ = ts.load_gov_support(paths["support"])
    taxonomy = ts.load_taxonomy(paths["taxonomy"])
    cube = ts.build_counts(ts.merge_families(patents))
    return {"patents": patents, "firms": firms, "gov": gov,
            "taxonomy": taxonomy, "cube": cube,
            "raw": {k: pd.read_csv(v) for k, v in paths.items()}}


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> dict:
    """A 12-firm, 8-tech corpus plus its loaded tables."""
    out = tmp_path_factory.mktemp("small_corpus")
    paths = gen_corpus(
        GeneratorParams(n_firms=12, n_techs=8,
                        years=tuple(range(2007, 2014)), seed=3), out)
    corpus = load_corpus(paths)
    corpus["paths"] = paths
    return corpus


@pytest.fixture(scope="session")
def golden_corpus() -> dict:
    """The committed corpus under data/golden."""
    paths = {k: GOLDEN_DIR / f"{k}.csv"
             for k in ("patents", "firms", "support", "taxonomy")}
    paths["truth"] = GOLDEN_DIR / "truth_panel.csv"
    corpus = load_corpus(paths)
    corpus["paths"] = paths
    return corpus


@pytest.fixture(scope="session")
def golden_panel(golden_corpus) -> pd.DataFrame:
    c = golden_corpus
    return ts.assemble_panel(c["cube"], c["firms"], c["gov"], c["taxonomy"])
