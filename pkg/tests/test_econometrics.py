"""Fixed-effects OLS, VIF, correlation tables, Welch tests."""

import numpy as np
import pandas as pd
import pytest
from scipy import stats

import techspace as ts
from techspace.synthlab.oracles import oracle_ols_dummies


def _design(rng, n=200, n_ind=5, n_years=4):
    df = pd.DataFrame({
        "x1": rng.normal(size=n),
        "x2": rng.normal(size=n),
        "industry_code": rng.choice([f"IND{i}" for i in range(n_ind)], size=n),
        "year": rng.choice(np.arange(2007, 2007 + n_years), size=n),
    })
    ind_eff = {f"IND{i}": rng.normal() for i in range(n_ind)}
    year_eff = {y: rng.normal() for y in np.arange(2007, 2007 + n_years)}
    df["y"] = (0.5 * df.x1 - 0.25 * df.x2
               + df.industry_code.map(ind_eff)
               + df.year.map(year_eff)
               + rng.normal(scale=0.3, size=n))
    return df


@pytest.mark.parametrize("fe", [("year",), ("industry",), ("year", "industry")])
def test_within_transform_equals_dummy_ols(fe):
    rng = np.random.default_rng(0)
    for _ in range(5):
        df = _design(rng)
        spec = ts.RegressionSpec(dependent="y", regressors=("x1", "x2"),
                                 fixed_effects=fe)
        result = ts.ols_fe(df, spec)
        fe_cols = ["year" if f == "year" else "industry_code" for f in fe]
        ref = oracle_ols_dummies(df, "y", ["x1", "x2"], fe_cols)
        np.testing.assert_allclose(
            [result.coef("x1"), result.coef("x2")], ref["coef"], atol=1e-8)
        np.testing.assert_allclose(
            [result.se("x1"), result.se("x2")], ref["se"], atol=1e-8)
        assert result.df_resid == ref["df"]


def test_no_fixed_effects_matches_closed_form():
    rng = np.random.default_rng(1)
    df = _design(rng)
    spec = ts.RegressionSpec(dependent="y", regressors=("x1", "x2"),
                             fixed_effects=())
    result = ts.ols_fe(df, spec)
    x = np.column_stack([df.x1, df.x2, np.ones(len(df))])
    beta = np.linalg.solve(x.T @ x, x.T @ df.y)
    assert result.coef("x1") == pytest.approx(beta[0], abs=1e-10)
    assert result.coef("x2") == pytest.approx(beta[1], abs=1e-10)


def test_robust_hc1_standard_errors():
    rng = np.random.default_rng(2)
    df = _design(rng)
    spec = ts.RegressionSpec(dependent="y", regressors=("x1", "x2"),
                             fixed_effects=(), robust=True)
    result = ts.ols_fe(df, spec)
    # closed-form HC1 on the same design
    x = np.column_stack([df.x1, df.x2, np.ones(len(df))])
    beta = np.linalg.solve(x.T @ x, x.T @ df.y)
    u = df.y.to_numpy() - x @ beta
    n, k = x.shape
    xtx_inv = np.linalg.inv(x.T @ x)
    meat = x.T @ (x * (u ** 2)[:, None])
    cov = n / (n - k) * xtx_inv @ meat @ xtx_inv
    np.testing.assert_allclose([result.se("x1"), result.se("x2")],
                               np.sqrt(np.diag(cov))[:2], atol=1e-10)


def test_perfect_collinearity_raises_with_names():
    rng = np.random.default_rng(3)
    df = _design(rng)
    df["x3"] = 2.0 * df["x1"]
    spec = ts.RegressionSpec(dependent="y", regressors=("x1", "x2", "x3"),
                             fixed_effects=())
    with pytest.raises(ts.NumericError, match="x3"):
        ts.ols_fe(df, spec)


def test_zero_variance_after_absorption_raises():
    rng = np.random.default_rng(4)
    df = _design(rng)
    df["yr_dup"] = df["year"].astype(float)  # constant within year FE
    spec = ts.RegressionSpec(dependent="y", regressors=("x1", "yr_dup"),
                             fixed_effects=("year",))
    with pytest.raises(ts.NumericError):
        ts.ols_fe(df, spec)


def test_spec_validation():
    with pytest.raises(ts.ValidationError):
        ts.RegressionSpec(dependent="y", regressors=("y",), fixed_effects=())
    with pytest.raises(ts.ValidationError):
        ts.RegressionSpec(dependent="y", regressors=("x",),
                          fixed_effects=("region",))


def test_stars_and_text_output():
    rng = np.random.default_rng(5)
    df = _design(rng, n=500)
    spec = ts.RegressionSpec(dependent="y", regressors=("x1", "x2"),
                             fixed_effects=("year", "industry"))
    result = ts.ols_fe(df, spec)
    text = result.to_text()
    assert "Note: *p<0.1; **p<0.05; ***p<0.01" in text
    assert "Observations: 500" in text
    row = result.table.set_index("term").loc["x1"]
    if row["p"] < 0.01:
        assert row["stars"] == "***"


def test_r_squared_matches_dummy_ols():
    rng = np.random.default_rng(6)
    df = _design(rng)
    spec = ts.RegressionSpec(dependent="y", regressors=("x1", "x2"),
                             fixed_effects=("year",))
    result = ts.ols_fe(df, spec)
    ref = oracle_ols_dummies(df, "y", ["x1", "x2"], ["year"])
    tss = float(((df.y - df.y.mean()) ** 2).sum())
    assert result.r_squared == pytest.approx(1.0 - ref["ssr"] / tss, abs=1e-10)


# ---------------------------------------------------------------------------
# VIF and correlations

def test_vif_exact_at_r_06():
    # two regressors with sample correlation exactly 0.6: VIF = 1.5625
    x1 = np.array([1.0, -1.0, 1.0, -1.0])
    z = np.array([1.0, 1.0, -1.0, -1.0])
    df = pd.DataFrame({"a": x1, "b": 0.6 * x1 + 0.8 * z})
    table = ts.vif(df, ["a", "b"])
    by_term = table.set_index("regressor")["vif"]
    assert by_term["a"] == pytest.approx(1.5625, abs=1e-10)
    assert by_term["b"] == pytest.approx(1.5625, abs=1e-10)
    assert by_term["(mean)"] == pytest.approx(1.5625, abs=1e-10)


def test_vif_orthogonal_is_one():
    df = pd.DataFrame({"a": [1.0, -1.0, 1.0, -1.0], "b": [1.0, 1.0, -1.0, -1.0]})
    table = ts.vif(df, ["a", "b"]).set_index("regressor")["vif"]
    assert table["a"] == pytest.approx(1.0, abs=1e-12)


def test_correlation_table_flags_constant_columns():
    df = pd.DataFrame({"a": [1.0, 2.0, 3.0], "b": [2.0, 4.0, 6.0],
                       "c": [5.0, 5.0, 5.0]})
    corr = ts.correlation_table(df, ["a", "b", "c"])
    assert corr.loc["a", "b"] == pytest.approx(1.0)
    assert np.isnan(corr.loc["a", "c"]) and np.isnan(corr.loc["c", "b"])
    assert corr.loc["c", "c"] == 1.0  # diagonal is pinned even when constant
    assert corr.attrs["constant_columns"] == ["c"]


def test_summary_stats_values():
    df = pd.DataFrame({"a": [1.0, 2.0, 3.0, 4.0]})
    row = ts.summary_stats(df, ["a"]).iloc[0]
    assert row["N"] == 4
    assert row["mean"] == pytest.approx(2.5)
    assert row["sd"] == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    assert row["min"] == 1.0 and row["max"] == 4.0


# ---------------------------------------------------------------------------
# Welch one-sided t-test

def test_welch_matches_scipy():
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 1.0, size=40)
    b = rng.normal(0.5, 2.0, size=55)
    t, p, df = ts.welch_one_sided(a, b, direction="a<b")
    ref = stats.ttest_ind(a, b, equal_var=False, alternative="less")
    assert t == pytest.approx(ref.statistic, abs=1e-12)
    assert p == pytest.approx(ref.pvalue, abs=1e-12)
    assert df == pytest.approx(ref.df, abs=1e-9)


def test_welch_directions_are_complementary():
    rng = np.random.default_rng(8)
    a = rng.normal(size=30)
    b = rng.normal(size=30)
    _, p_less, _ = ts.welch_one_sided(a, b, direction="a<b")
    _, p_greater, _ = ts.welch_one_sided(a, b, direction="a>b")
    assert p_less + p_greater == pytest.approx(1.0, abs=1e-12)


def test_welch_degenerate_raises():
    with pytest.raises(ts.NumericError):
        ts.welch_one_sided([1.0], [2.0, 3.0], direction="a<b")
