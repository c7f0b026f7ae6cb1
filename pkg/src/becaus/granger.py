"""Granger-causality baseline and stationarity screening.

Both statistics are computed from scratch with plain OLS so every number is
inspectable; they are pinned to a reference statistical implementation by
frozen cross-implementation fixtures in the test suite (1e-6 agreement).

The unit-root test regresses the differenced series on a constant, the
lagged level, and lagged differences; the lag count is chosen by AIC over
candidates aligned at max_lag (same sample for every candidate, ties to the
smaller lag), then the chosen model is refit on the longest sample it
allows. Critical values and p-values come from the finite-sample response
surfaces and cdf polynomials of MacKinnon (1994, 2010), embedded below as
data for the constant-only regression of a single series.

A deliberate policy decision, because exact trajectories hit it constantly:
when the unrestricted regression fits perfectly (RSS_u below 1e-16 * TSS)
the F-test's error variance is zero and no verdict is defined, so
granger_test raises a typed error instead of fabricating a statistic, and
granger_screen records the pair as "no causality detected, degenerate".
Deterministic linear data therefore never yields a (spurious) detection
from a perfect fit, and the screen stays total.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import (
    DegenerateRegressionError,
    DegenerateVarianceError,
    DimensionMismatchError,
    RankDeficientRegressionError,
    SeriesTooShortError,
)

__all__ = [
    "StationarityReport",
    "GrangerResult",
    "adf_test",
    "granger_test",
    "granger_screen",
]

DEGENERATE_RSS_RTOL = 1e-16
RANK_DEFICIENT_RTOL = 1e-10

# MacKinnon response-surface and cdf-polynomial constants, constant-only
# regression, one series. Identical values ship in standard stats packages.
_TAU_MAX = 2.74
_TAU_MIN = -18.83
_TAU_STAR = -1.61
_TAU_SMALLP = (2.1659, 1.4412, 0.038269)
_TAU_LARGEP = (1.7339, 0.93202, -0.12745, -0.010368)
_TAU_CRIT = {
    "1%": (-3.43035, -6.5393, -16.786, -79.433),
    "5%": (-2.86154, -2.8903, -4.234, -40.04),
    "10%": (-2.56677, -1.5384, -2.809, 0.0),
}


def _unit_root_pvalue(stat: float) -> float:
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return 0.0
    coef = _TAU_SMALLP if stat <= _TAU_STAR else _TAU_LARGEP
    arg = sum(c * stat ** i for i, c in enumerate(coef))
    return float(stats.norm.cdf(arg))


def _critical_values(nobs: int) -> dict:
    return {k: float(sum(c / nobs ** i for i, c in enumerate(cs)))
            for k, cs in _TAU_CRIT.items()}


def _ols(y, X):
    """Returns (beta, rss, singular values)."""
    beta, _, _, sv = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ beta
    return beta, float(r @ r), sv


def _aic(n: int, rss: float, k: int) -> float:
    # gaussian OLS information criterion; constant terms kept so candidate
    # values are comparable across implementations
    return n * (np.log(2 * np.pi) + np.log(rss / n) + 1.0) + 2.0 * k


@dataclass(frozen=True)
class StationarityReport:
    statistic: float
    p_value: float
    stationary: bool
    used_lag: int
    nobs: int
    critical_values: dict
    alpha: float

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "stationary": self.stationary, "used_lag": self.used_lag,
                "nobs": self.nobs, "critical_values": dict(self.critical_values),
                "alpha": self.alpha}


def adf_test(x, max_lag: int | None = None, alpha: float = 0.05) -> StationarityReport:
    """Unit-root test; stationary means the unit root is rejected at alpha."""
    x = np.asarray(x, dtype=float).ravel()
    nobs = x.shape[0]
    if nobs and np.ptp(x) == 0.0:
        raise DegenerateVarianceError("constant series has no unit-root statistic")
    if max_lag is None:
        max_lag = min(int(np.ceil(12.0 * (nobs / 100.0) ** 0.25)), nobs // 2 - 2)
        if max_lag < 0:
            raise SeriesTooShortError(f"series length {nobs} too short")
    if nobs < max_lag + 10:
        raise SeriesTooShortError(
            f"series length {nobs} < max_lag + 10 = {max_lag + 10}")

    xdiff = np.diff(x)

    def design(lag):
        # rows t = lag .. len(xdiff)-1; columns: const, level, lag diffs
        n = xdiff.shape[0] - lag
        cols = [np.ones(n), x[lag:nobs - 1]]
        cols += [xdiff[lag - j:xdiff.shape[0] - j] for j in range(1, lag + 1)]
        return xdiff[lag:], np.column_stack(cols)

    # lag choice on the max_lag-aligned sample so every candidate sees the
    # same observations
    y_al, X_al = design(max_lag)
    n_al = y_al.shape[0]
    best = None
    for lag in range(max_lag + 1):
        Xc = X_al[:, :2 + lag]
        _, rss, _ = _ols(y_al, Xc)
        if rss <= 0.0:
            raise DegenerateRegressionError("perfect fit in unit-root regression")
        cand = (_aic(n_al, rss, np.linalg.matrix_rank(Xc)), lag)
        if best is None or cand < best:
            best = cand
    used_lag = best[1]

    y, X = design(used_lag)
    beta, rss, sv = _ols(y, X)
    n, k = X.shape
    if n <= k:
        raise SeriesTooShortError("no residual degrees of freedom")
    sigma2 = rss / (n - k)
    cov = sigma2 * np.linalg.pinv(X.T @ X)
    stat = float(beta[1] / np.sqrt(cov[1, 1]))
    p = _unit_root_pvalue(stat)
    return StationarityReport(statistic=stat, p_value=p, stationary=bool(p < alpha),
                              used_lag=used_lag, nobs=n,
                              critical_values=_critical_values(n), alpha=alpha)


@dataclass(frozen=True)
class GrangerResult:
    cause: str
    effect: str
    lag_order: int
    f_statistic: float | None
    p_value: float | None
    verdict: bool
    alpha: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"cause": self.cause, "effect": self.effect,
                "lag_order": self.lag_order, "f_statistic": self.f_statistic,
                "p_value": self.p_value, "verdict": self.verdict,
                "alpha": self.alpha, "degenerate": self.degenerate}


def _lag_columns(series, L, T):
    # columns series(t-1) .. series(t-L) for t = L .. T-1, one block per lag
    out = []
    for i in range(1, L + 1):
        out.append(series[L - i:T - i])
    return out


def granger_test(cause, effect, lag_order: int, alpha: float = 0.05,
                 cause_name: str = "cause", effect_name: str = "effect",
                 ) -> GrangerResult:
    """Does the cause's past improve linear prediction of the effect?

    Restricted model: effect on an intercept and its own lag_order lags.
    Unrestricted: plus all lags of every cause component (block F-test for
    vector causes). Raises a degenerate-regression error on a numerically
    perfect unrestricted fit and a rank-deficiency error on collinear lags.
    """
    cause = np.asarray(cause, dtype=float)
    effect = np.asarray(effect, dtype=float).ravel()
    if cause.ndim == 1:
        cause = cause[:, None]
    if cause.shape[0] != effect.shape[0]:
        raise DimensionMismatchError(
            f"series lengths differ: {cause.shape[0]} vs {effect.shape[0]}")
    L = int(lag_order)
    if L < 1:
        raise DimensionMismatchError(f"lag_order must be >= 1, got {lag_order}")
    T = effect.shape[0]
    dc = cause.shape[1]
    if T < L * (1 + dc) + 10:
        raise SeriesTooShortError(
            f"series length {T} < lag_order*(1+cause_dim) + 10 = {L * (1 + dc) + 10}")

    y = effect[L:]
    n = y.shape[0]
    Xr = np.column_stack([np.ones(n)] + _lag_columns(effect, L, T))
    Xu = np.column_stack([Xr] + sum((_lag_columns(cause[:, j], L, T)
                                     for j in range(dc)), []))

    tss = float(np.sum((y - y.mean()) ** 2))
    if tss <= 0.0:
        raise DegenerateVarianceError("effect series is constant over the window")
    _, rss_r, _ = _ols(y, Xr)
    _, rss_u, sv = _ols(y, Xu)
    # degeneracy first: a perfect fit usually also looks rank-deficient, and
    # the perfect fit is the reason there is no verdict
    if rss_u < DEGENERATE_RSS_RTOL * tss:
        raise DegenerateRegressionError(
            f"unrestricted model fits exactly (RSS/TSS = {rss_u / tss:.2e}); "
            "F-test undefined")
    if sv[-1] < RANK_DEFICIENT_RTOL * sv[0]:
        raise RankDeficientRegressionError(
            f"collinear lag regressors (condition {sv[0] / sv[-1]:.2e})")

    dof = n - Xu.shape[1]
    if dof <= 0:
        raise SeriesTooShortError("no residual degrees of freedom")
    q = L * dc
    F = ((rss_r - rss_u) / q) / (rss_u / dof)
    p = float(stats.f.sf(F, q, dof))
    return GrangerResult(cause=cause_name, effect=effect_name, lag_order=L,
                         f_statistic=float(F), p_value=p,
                         verdict=bool(p < alpha), alpha=alpha)


def _difference_until_stationary(x, alpha, max_diff):
    d = 0
    while d < max_diff:
        try:
            if adf_test(x, alpha=alpha).stationary:
                break
        except DegenerateVarianceError:
            break  # constant after differencing; nothing left to test
        x = np.diff(x)
        d += 1
    return x, d


def granger_screen(theta, psi, lags=(1, 2, 3, 4, 5), alpha: float = 0.05,
                   difference_nonstationary: bool = True, max_diff: int = 2) -> dict:
    """All component-pairwise tests in both directions over a lag sweep.

    Nonstationary components are differenced (up to max_diff) before
    testing. Pairs where the F-test has no defined verdict, either an
    exact unrestricted fit or an exactly collinear lag design (both are
    what deterministic coupling produces once the lag order reaches the
    system order), are recorded with verdict False and the degenerate
    flag set instead of aborting the sweep. granger_test itself still
    raises for both, so single-test callers see the failure.
    """
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if theta.ndim == 1:
        theta = theta[:, None]
    if psi.ndim == 1:
        psi = psi[:, None]

    names = ([f"theta_{i}" for i in range(theta.shape[1])]
             + [f"psi_{i}" for i in range(psi.shape[1])])
    columns = [theta[:, i] for i in range(theta.shape[1])]
    columns += [psi[:, i] for i in range(psi.shape[1])]

    stationarity = {}
    diff_order = {}
    prepared = {}
    for name, col in zip(names, columns):
        rep = adf_test(col, alpha=alpha)
        stationarity[name] = rep
        if difference_nonstationary and not rep.stationary:
            col, d = _difference_until_stationary(col, alpha, max_diff)
            diff_order[name] = d
        else:
            diff_order[name] = 0
        prepared[name] = col

    n_theta = theta.shape[1]
    records = []
    for i in range(n_theta):
        for j in range(psi.shape[1]):
            a, b = names[i], names[n_theta + j]
            for cause, effect in ((a, b), (b, a)):
                x = prepared[cause]
                y = prepared[effect]
                L_common = min(x.shape[0], y.shape[0])
                for lag in lags:
                    try:
                        rec = granger_test(x[-L_common:], y[-L_common:], lag,
                                           alpha, cause_name=cause,
                                           effect_name=effect)
                    except (DegenerateRegressionError,
                            RankDeficientRegressionError):
                        rec = GrangerResult(cause=cause, effect=effect,
                                            lag_order=lag, f_statistic=None,
                                            p_value=None, verdict=False,
                                            alpha=alpha, degenerate=True)
                    records.append(rec)

    detected = {}
    for rec in records:
        key = f"{rec.cause}->{rec.effect}"
        detected.setdefault(key, False)
        detected[key] = detected[key] or rec.verdict
    return {"records": records, "stationarity": stationarity,
            "diff_order": diff_order, "detected_any_lag": detected}
