"""Proximity and relatedness density."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import techspace as ts
from techspace.synthlab.oracles import oracle_density, oracle_proximity

from conftest import random_advantage


def _holders(adv):
    return {t: {adv.firms[i] for i in np.flatnonzero(adv.values[:, j])}
            for j, t in enumerate(adv.techs)}


def test_proximity_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(10):
        adv = random_advantage(rng, 9, 6)
        prox = ts.proximity(adv)
        phi = oracle_proximity(_holders(adv), adv.techs)
        for i, a in enumerate(adv.techs):
            for j, b in enumerate(adv.techs):
                assert prox.values[i, j] == pytest.approx(phi[(a, b)], abs=1e-13)


def test_proximity_known_values():
    # T1 held by {F1,F2}, T2 by {F2,F3}, T3 by {F1,F2,F3}
    values = np.array([[1, 0, 1], [1, 1, 1], [0, 1, 1]], dtype=np.int8)
    adv = ts.AdvantageMatrix(year=0, firms=["F1", "F2", "F3"],
                             techs=["T1", "T2", "T3"], values=values)
    prox = ts.proximity(adv)
    assert prox.values[0, 1] == pytest.approx(0.5)      # min(1/2, 1/2)
    assert prox.values[0, 2] == pytest.approx(2 / 3)    # min(2/2, 2/3)
    assert np.allclose(np.diag(prox.values), 1.0)


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_proximity_properties(seed):
    rng = np.random.default_rng(seed)
    adv = random_advantage(rng, 8, 7)
    prox = ts.proximity(adv)
    v = prox.values
    assert np.allclose(v, v.T)                      # symmetric
    assert (v >= 0).all() and (v <= 1).all()        # bounded
    assert np.allclose(np.diag(v), 1.0)             # self-proximity 1


def test_density_matches_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10):
        adv = random_advantage(rng, 9, 6)
        prox = ts.proximity(adv)
        dens = ts.density_matrix(adv, prox)
        phi = oracle_proximity(_holders(adv), adv.techs)
        for i, f in enumerate(adv.firms):
            held = {adv.techs[j] for j in np.flatnonzero(adv.values[i])}
            for j, t in enumerate(adv.techs):
                ref = oracle_density(held, phi, adv.techs, t)
                assert dens[i, j] == pytest.approx(ref, abs=1e-13)


def test_density_includes_self_and_is_bounded():
    rng = np.random.default_rng(2)
    adv = random_advantage(rng, 10, 8)
    dens = ts.density_matrix(adv, ts.proximity(adv))
    assert (dens >= 0).all() and (dens <= 1 + 1e-12).all()
    # a firm holding everything has density exactly 1 everywhere
    values = np.ones((2, 3), dtype=np.int8)
    full = ts.AdvantageMatrix(year=0, firms=["A", "B"],
                              techs=["T1", "T2", "T3"], values=values)
    np.testing.assert_allclose(ts.density_matrix(full, ts.proximity(full)), 1.0)


def test_density_zero_denominator_is_zero():
    # a tech with proximity 0 to every tech (incl. broken diagonal) won't
    # occur from proximity(); test the guard directly
    values = np.array([[1, 0], [0, 1]], dtype=np.int8)
    adv = ts.AdvantageMatrix(year=0, firms=["A", "B"], techs=["T1", "T2"],
                             values=values)
    prox = ts.ProximityMatrix(techs=["T1", "T2"],
                              values=np.zeros((2, 2)))
    dens = ts.density_matrix(adv, prox)
    assert (dens == 0).all()


def test_density_mismatched_techs_raises():
    adv = ts.AdvantageMatrix(year=0, firms=["A"], techs=["T1"],
                             values=np.ones((1, 1), dtype=np.int8))
    prox = ts.ProximityMatrix(techs=["T1", "T2"], values=np.eye(2))
    with pytest.raises(ts.DataError):
        ts.density_matrix(adv, prox)


def test_density_panel_matches_single_year(small_corpus):
    cube = small_corpus["cube"]
    year = cube.years()[2]
    panel = ts.density_panel(cube, years=[year])
    adv = ts.advantage_matrix(ts.compute_rta(cube, year))
    dens = ts.density_matrix(adv, ts.proximity(adv))
    sub = panel.set_index(["firm_id", "tech_code"])["omega"]
    for i, f in enumerate(adv.firms):
        for j, t in enumerate(adv.techs):
            assert sub[(f, t)] == pytest.approx(dens[i, j], abs=1e-12)
