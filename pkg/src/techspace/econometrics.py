"""Fixed-effects linear probability estimation and diagnostics.

The estimator is OLS on within-transformed (fixed-effect demeaned) data,
equivalent to dummy-variable OLS, with conventional standard errors by
default and an HC1 heteroskedasticity-robust option. Diagnostics cover
variance inflation factors, pairwise correlations, one-sided Welch t-tests,
and pooled summary statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from .errors import NumericError, ValidationError

__all__ = [
    "RegressionSpec",
    "RegressionResult",
    "ols_fe",
    "vif",
    "correlation_table",
    "welch_one_sided",
    "summary_stats",
]

FE_COLUMNS = {"year": "year", "industry": "industry_code"}


@dataclass(frozen=True)
class RegressionSpec:
    dependent: str
    regressors: tuple[str, ...]
    fixed_effects: tuple[str, ...] = ()
    robust: bool = False
    estimator: str = "lpm"

    def __post_init__(self):
        if self.dependent in self.regressors:
            raise ValidationError("dependent variable cannot be a regressor")
        bad = [f for f in self.fixed_effects if f not in FE_COLUMNS]
        if bad:
            raise ValidationError(f"unknown fixed effects: {bad}")
        if self.estimator != "lpm":
            raise ValidationError(f"unsupported estimator {self.estimator!r}")


@dataclass(frozen=True)
class RegressionResult:
    """Coefficient table plus fit statistics for one estimated model."""

    spec: RegressionSpec
    table: pd.DataFrame  # columns term, coef, se, t, p, stars
    nobs: int
    df_resid: int
    r_squared: float
    adj_r_squared: float
    resid_std_error: float

    def coef(self, term: str) -> float:
        return float(self.table.set_index("term").loc[term, "coef"])

    def se(self, term: str) -> float:
        return float(self.table.set_index("term").loc[term, "se"])

    def pvalue(self, term: str) -> float:
        return float(self.table.set_index("term").loc[term, "p"])

    def to_text(self) -> str:
        lines = [f"Dependent variable: {self.spec.dependent}"]
        width = max(len(t) for t in self.table["term"]) + 2
        for row in self.table.itertuples(index=False):
            lines.append(f"{row.term:<{width}}{row.coef: .6f}{row.stars:<4}"
                         f"({row.se:.6f})")
        fe = ", ".join(self.spec.fixed_effects) or "none"
        lines += [
            f"Fixed effects: {fe}",
            f"Observations: {self.nobs:,}",
            f"Adjusted R2: {self.adj_r_squared:.6f}",
            f"Residual Std. Error: {self.resid_std_error:.6f}",
            "Note: *p<0.1; **p<0.05; ***p<0.01",
        ]
        return "\n".join(lines)


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def _group_codes(values: np.ndarray) -> tuple[np.ndarray, int]:
    _, codes = np.unique(values, return_inverse=True)
    return codes, int(codes.max()) + 1


def _demean_once(z: np.ndarray, codes: np.ndarray, n_groups: int) -> np.ndarray:
    counts = np.bincount(codes, minlength=n_groups).astype(float)
    out = np.empty_like(z)
    for c in range(z.shape[1]):
        means = np.bincount(codes, weights=z[:, c], minlength=n_groups) / counts
        out[:, c] = z[:, c] - means[codes]
    return out


def _within_transform(z: np.ndarray, groups: list[tuple[np.ndarray, int]],
                      tol: float = 1e-13, max_sweeps: int = 10_000) -> np.ndarray:
    """Demean columns of z by one or more group structures.

    Single factor is exact in one pass; two factors use alternating
    projections iterated to convergence (equivalent to dummy-variable OLS).
    """
    if len(groups) == 1:
        codes, n_g = groups[0]
        return _demean_once(z, codes, n_g)
    scale = max(1.0, float(np.abs(z).max()))
    cur = z
    for _ in range(max_sweeps):
        new = cur
        for codes, n_g in groups:
            new = _demean_once(new, codes, n_g)
        if np.abs(new - cur).max() <= tol * scale:
            return new
        cur = new
    return cur


def _n_components(codes_a: np.ndarray, codes_b: np.ndarray, n_a: int, n_b: int) -> int:
    """Connected components of the bipartite group graph (union-find)."""
    parent = list(range(n_a + n_b))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in set(zip(codes_a.tolist(), codes_b.tolist())):
        ra, rb = find(a), find(n_a + b)
        if ra != rb:
            parent[rb] = ra
    return len({find(i) for i in range(n_a + n_b)})


def _collinear_columns(x: np.ndarray, names: list[str]) -> list[str]:
    """Names of columns that add no rank beyond the preceding ones."""
    bad, kept = [], np.empty((x.shape[0], 0))
    for j, name in enumerate(names):
        cand = np.column_stack([kept, x[:, j]])
        if np.linalg.matrix_rank(cand) > kept.shape[1]:
            kept = cand
        else:
            bad.append(name)
    return bad


def ols_fe(panel: pd.DataFrame, spec: RegressionSpec) -> RegressionResult:
    """Estimate a linear probability model with absorbed fixed effects.

    Coefficients solve least squares on within-transformed data; standard
    errors are homoskedastic by default (``spec.robust`` switches to HC1).
    R-squared is computed against the grand mean of the dependent variable,
    so it matches the dummy-variable regression including the intercept.
    """
    fe_cols = [FE_COLUMNS[f] for f in spec.fixed_effects]
    used = [spec.dependent, *spec.regressors, *fe_cols]
    missing = [c for c in used if c not in panel.columns]
    if missing:
        raise ValidationError(f"panel lacks columns: {missing}")
    data = panel[used].dropna()
    n = len(data)
    k = len(spec.regressors)
    if n < k + 2:
        raise NumericError(f"too few rows after listwise deletion: {n}")

    y = data[spec.dependent].to_numpy(dtype=float)
    x = data[list(spec.regressors)].to_numpy(dtype=float)

    groups = []
    for col in fe_cols:
        codes, n_g = _group_codes(data[col].to_numpy())
        groups.append((codes, n_g))

    if groups:
        z = _within_transform(np.column_stack([y, x]), groups)
        y_w, x_w = z[:, 0], z[:, 1:]
        names = list(spec.regressors)
        if len(groups) == 1:
            absorbed = groups[0][1]
        else:
            absorbed = groups[0][1] + groups[1][1] - _n_components(
                groups[0][0], groups[1][0], groups[0][1], groups[1][1])
        zero_var = [nm for j, nm in enumerate(names) if np.allclose(x_w[:, j], 0)]
        if zero_var:
            raise NumericError(
                f"zero-variance regressor(s) after FE absorption: {zero_var}")
    else:
        y_w = y
        x_w = np.column_stack([x, np.ones(n)])
        names = [*spec.regressors, "intercept"]
        absorbed = 0
        zero_var = [nm for j, nm in enumerate(spec.regressors)
                    if np.allclose(x[:, j], x[0, j])]
        if zero_var:
            raise NumericError(f"zero-variance regressor(s): {zero_var}")

    if np.linalg.matrix_rank(x_w) < x_w.shape[1]:
        bad = _collinear_columns(x_w, names)
        raise NumericError(f"perfect collinearity among regressors: {bad}")

    xtx = x_w.T @ x_w
    beta = np.linalg.solve(xtx, x_w.T @ y_w)
    resid = y_w - x_w @ beta
    n_params = len(names) + absorbed
    df_resid = n - n_params
    if df_resid <= 0:
        raise NumericError("no residual degrees of freedom")
    ssr = float(resid @ resid)
    xtx_inv = np.linalg.inv(xtx)
    if spec.robust:
        meat = (x_w * (resid ** 2)[:, np.newaxis]).T @ x_w
        cov = xtx_inv @ meat @ xtx_inv * (n / df_resid)
    else:
        cov = xtx_inv * (ssr / df_resid)
    se = np.sqrt(np.diag(cov))
    tval = beta / se
    pval = 2 * stats.t.sf(np.abs(tval), df_resid)

    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ssr / sst if sst > 0 else float("nan")
    adj = 1.0 - (1.0 - r2) * (n - 1) / df_resid

    table = pd.DataFrame({
        "term": names, "coef": beta, "se": se, "t": tval, "p": pval,
        "stars": [_stars(p) for p in pval],
    })
    return RegressionResult(
        spec=spec, table=table, nobs=n, df_resid=df_resid, r_squared=r2,
        adj_r_squared=adj, resid_std_error=float(np.sqrt(ssr / df_resid)),
    )


def vif(panel: pd.DataFrame, regressors: list[str]) -> pd.DataFrame:
    """Variance inflation factors from auxiliary regressions.

    VIF_j = 1 / (1 - R2_j) where R2_j regresses regressor j on the others
    (with intercept). Perfectly collinear regressors are reported as
    infinite and flagged. A final row carries the mean VIF.
    """
    if len(regressors) < 2:
        raise ValidationError("VIF needs at least two regressors")
    data = panel[list(regressors)].dropna().to_numpy(dtype=float)
    rows = []
    for j, name in enumerate(regressors):
        yj = data[:, j]
        xj = np.column_stack([np.delete(data, j, axis=1), np.ones(len(data))])
        beta, *_ = np.linalg.lstsq(xj, yj, rcond=None)
        resid = yj - xj @ beta
        sst = float(((yj - yj.mean()) ** 2).sum())
        if sst == 0:
            rows.append({"regressor": name, "vif": float("inf"),
                         "flag": "constant regressor"})
            continue
        r2 = 1.0 - float(resid @ resid) / sst
        if r2 >= 1.0 - 1e-12:
            rows.append({"regressor": name, "vif": float("inf"),
                         "flag": "perfect collinearity"})
        else:
            rows.append({"regressor": name, "vif": 1.0 / (1.0 - r2), "flag": ""})
    rows.append({
        "regressor": "(mean)",
        "vif": float(np.mean([r["vif"] for r in rows])),
        "flag": "",
    })
    return pd.DataFrame(rows)


def correlation_table(panel: pd.DataFrame, variables: list[str]) -> pd.DataFrame:
    """Pairwise Pearson correlations on listwise-complete rows.

    Constant columns yield NaN off-diagonal entries; their names are listed
    in ``result.attrs['constant_columns']``. The diagonal is fixed at 1.
    """
    data = panel[list(variables)].dropna().to_numpy(dtype=float)
    centered = data - data.mean(axis=0)
    sd = np.sqrt((centered ** 2).mean(axis=0))
    cov = centered.T @ centered / len(data)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(sd, sd)
    corr[~np.isfinite(corr)] = np.nan
    np.fill_diagonal(corr, 1.0)
    out = pd.DataFrame(corr, index=variables, columns=variables)
    out.attrs["constant_columns"] = [v for v, s in zip(variables, sd) if s == 0]
    return out


def welch_one_sided(sample_a, sample_b, direction: str) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test with a one-sided alternative.

    ``direction`` is ``"a<b"`` or ``"a>b"`` (the alternative hypothesis).
    Returns (t, p, Satterthwaite degrees of freedom).
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise NumericError("both samples must have at least two observations")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0 and vb == 0:
        raise NumericError("degenerate samples: zero variance")
    sa2, sb2 = va / len(a), vb / len(b)
    t = (a.mean() - b.mean()) / np.sqrt(sa2 + sb2)
    df = (sa2 + sb2) ** 2 / (sa2 ** 2 / (len(a) - 1) + sb2 ** 2 / (len(b) - 1))
    if direction in ("a<b", "less"):
        p = float(stats.t.cdf(t, df))
    elif direction in ("a>b", "greater"):
        p = float(stats.t.sf(t, df))
    else:
        raise ValidationError(f"direction must be 'a<b' or 'a>b', got {direction!r}")
    return float(t), p, float(df)


def summary_stats(panel: pd.DataFrame, variables: list[str] | None = None) -> pd.DataFrame:
    """Pooled (N, mean, sd, min, max) per variable; sd uses ddof=1."""
    variables = variables or [c for c in panel.columns
                              if pd.api.types.is_numeric_dtype(panel[c])]
    rows = []
    for v in variables:
        x = panel[v].dropna().to_numpy(dtype=float)
        rows.append({
            "variable": v, "N": len(x),
            "mean": float(x.mean()) if len(x) else float("nan"),
            "sd": float(x.std(ddof=1)) if len(x) > 1 else 0.0,
            "min": float(x.min()) if len(x) else float("nan"),
            "max": float(x.max()) if len(x) else float("nan"),
        })
    return pd.DataFrame(rows)
