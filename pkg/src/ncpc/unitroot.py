"""Augmented Dickey-Fuller and Phillips-Perron tests, intercept case."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.stats import norm

from .estimate import bartlett_weights, default_bandwidth
from .exceptions import DegenerateRegression, SeriesTooShort
from .series import QuarterlySeries

# MacKinnon (1994) asymptotic response surface for the Dickey-Fuller tau
# statistic, constant-only regression, one integrated series. Polynomials
# in tau map to a standard-normal quantile.
_TAU_MIN = -18.83
_TAU_MAX = 2.74
_TAU_STAR = -1.61
_SMALLP = (2.1659, 1.4412, 3.8269e-2)
_LARGEP = (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)

DEFAULT_MAX_LAG = 13


def mackinnon_p(tau: float) -> float:
    """Approximate left-tail p-value of a Dickey-Fuller t statistic (intercept)."""
    if math.isnan(tau):
        raise ValueError("test statistic is NaN")
    if tau > _TAU_MAX:
        return 1.0
    if tau < _TAU_MIN:
        return 0.0
    coefs = _SMALLP if tau <= _TAU_STAR else _LARGEP
    return float(norm.cdf(np.polynomial.polynomial.polyval(tau, coefs)))


def sic(residuals, k: int, n: int) -> float:
    """Schwarz criterion ``log(RSS / n) + k * log(n) / n``."""
    if n <= k:
        raise ValueError("SIC needs more observations than parameters")
    e = np.asarray(residuals, dtype=float)
    return math.log(float(e @ e) / n) + k * math.log(n) / n


@dataclass(frozen=True)
class UnitRootResult:
    test: str
    statistic: float
    p_value: float
    lags_or_bandwidth: int
    nobs: int
    deterministic: str = "intercept"


def _values(s) -> np.ndarray:
    if isinstance(s, QuarterlySeries):
        return s.trim().longest_run().values
    x = np.asarray(s, dtype=float).reshape(-1)
    if np.isnan(x).any():
        raise ValueError("unit-root input contains missing values")
    return x


def _ols(X: np.ndarray, y: np.ndarray):
    """Coefficients, residuals and classical standard errors."""
    n, k = X.shape
    if n <= k:
        raise SeriesTooShort(f"{n} observations for {k} parameters")
    q, r = linalg.qr(X, mode="economic")
    d = np.abs(np.diag(r))
    if d.min() <= d.max() * n * np.finfo(float).eps:
        raise DegenerateRegression("unit-root regression has a degenerate regressor")
    beta = linalg.solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    s2 = float(resid @ resid) / (n - k)
    if s2 <= np.finfo(float).tiny:
        raise DegenerateRegression("unit-root regression fits exactly (zero residual variance)")
    rinv = linalg.solve_triangular(r, np.eye(k))
    se = np.sqrt(s2 * np.sum(rinv**2, axis=1))
    return beta, resid, se


def _adf_design(x: np.ndarray, lags: int, first: int):
    """Rows ``t = first..n-1`` of the ADF regression with ``lags`` augmentations."""
    dx = np.diff(x)
    # dx[t-1] = x[t] - x[t-1]
    t = np.arange(first, x.size)
    cols = [np.ones(t.size), x[t - 1]]
    cols += [dx[t - 1 - i] for i in range(1, lags + 1)]
    return np.column_stack(cols), dx[t - 1]


def adf(s, max_lag: int = DEFAULT_MAX_LAG, *, lags: int | None = None) -> UnitRootResult:
    """Intercept-only ADF test with SIC lag selection.

    Every candidate lag ``0..max_lag`` is fitted on the common sample that
    the largest lag allows; the selected lag is then re-estimated on its own
    maximal sample. Pass ``lags`` to skip selection.
    """
    x = _values(s)
    n = x.size
    if lags is not None:
        if lags < 0:
            raise ValueError("lags must be nonnegative")
        chosen = lags
    else:
        if max_lag < 0:
            raise ValueError("max_lag must be nonnegative")
        n_common = n - 1 - max_lag
        if n_common <= max_lag + 3:
            raise SeriesTooShort(f"{n} observations cannot support max_lag={max_lag}")
        best = None
        for L in range(max_lag + 1):
            X, y = _adf_design(x, L, max_lag + 1)
            _, resid, _ = _ols(X, y)
            crit = sic(resid, X.shape[1], y.size)
            if best is None or crit < best[0]:
                best = (crit, L)
        chosen = best[1]
    if n - 1 - chosen <= chosen + 2:
        raise SeriesTooShort(f"{n} observations cannot support {chosen} lags")
    X, y = _adf_design(x, chosen, chosen + 1)
    beta, _, se = _ols(X, y)
    tau = float(beta[1] / se[1])
    return UnitRootResult("adf", tau, mackinnon_p(tau), chosen, y.size)


def newey_west_auto_bandwidth(resid: np.ndarray) -> int:
    """Data-dependent Bartlett bandwidth of Newey and West (1994), truncated to an integer."""
    e = np.asarray(resid, dtype=float)
    T = e.size
    pilot = default_bandwidth(T)
    sig = np.array([e[j:] @ e[: T - j] / T for j in range(pilot + 1)])
    s0 = sig[0] + 2.0 * sig[1:].sum()
    s1 = 2.0 * np.sum(np.arange(1, pilot + 1) * sig[1:])
    if s0 <= 0:
        return 0
    gamma = 1.1447 * ((s1 / s0) ** 2) ** (1.0 / 3.0)
    return int(min(math.floor(gamma * T ** (1.0 / 3.0)), T - 1))


def long_run_variance(resid: np.ndarray, bandwidth: int) -> float:
    """Bartlett-kernel long-run variance, divisor ``n``, no demeaning."""
    e = np.asarray(resid, dtype=float)
    n = e.size
    lrv = float(e @ e) / n
    for ell, w in enumerate(bartlett_weights(bandwidth), start=1):
        lrv += 2.0 * w * float(e[ell:] @ e[:-ell]) / n
    return lrv


def pp(s, bandwidth: int | None = None, *, bandwidth_method: str = "fixed") -> UnitRootResult:
    """Intercept-only Phillips-Perron Z-tau test.

    ``bandwidth=None`` picks it automatically: ``"fixed"`` uses
    ``floor(4 * (n / 100) ** (2 / 9))``, ``"auto"`` the data-dependent
    Newey-West (1994) rule.
    """
    x = _values(s)
    if x.size < 10:
        raise SeriesTooShort(f"Phillips-Perron needs at least 10 observations, got {x.size}")
    X, y = _adf_design(x, 0, 1)
    n, k = X.shape
    beta, resid, se = _ols(X, y)
    if bandwidth is None:
        if bandwidth_method == "fixed":
            bandwidth = default_bandwidth(n)
        elif bandwidth_method == "auto":
            bandwidth = newey_west_auto_bandwidth(resid)
        else:
            raise ValueError("bandwidth_method must be 'fixed' or 'auto'")
    if bandwidth < 0:
        raise ValueError("bandwidth must be nonnegative")
    gamma0 = float(resid @ resid) / n
    s = math.sqrt(float(resid @ resid) / (n - k))
    lam2 = long_run_variance(resid, bandwidth)
    if lam2 <= 0:
        raise DegenerateRegression("non-positive long-run variance estimate")
    lam = math.sqrt(lam2)
    t_gamma = beta[1] / se[1]
    z_tau = math.sqrt(gamma0 / lam2) * t_gamma - 0.5 * (lam2 - gamma0) / lam * (n * se[1] / s)
    z_tau = float(z_tau)
    return UnitRootResult("pp", z_tau, mackinnon_p(z_tau), int(bandwidth), n)
