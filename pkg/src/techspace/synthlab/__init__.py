"""Synthetic corpora with planted ground truth and brute-force oracles."""

from .generator import GeneratorParams, gen_corpus
from .oracles import (
    oracle_density,
    oracle_entries,
    oracle_figure2,
    oracle_mor,
    oracle_ols,
    oracle_ols_dummies,
    oracle_panel,
    oracle_proximity,
    oracle_rta,
    oracle_suite,
    oracle_tci,
)

__all__ = [
    "GeneratorParams",
    "gen_corpus",
    "oracle_rta",
    "oracle_proximity",
    "oracle_density",
    "oracle_mor",
    "oracle_tci",
    "oracle_entries",
    "oracle_panel",
    "oracle_ols",
    "oracle_ols_dummies",
    "oracle_figure2",
    "oracle_suite",
]
