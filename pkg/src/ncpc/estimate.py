"""Phillips-curve regressions with a recession interaction and HAC inference.

The estimated equation is

    infl_t = b0 + b1 * e_t + b2 * gap_t + b3 * e_t * D_t + b4 * gap_t * D_t + eps_t

where ``e_t`` is lagged inflation (backward-looking) or survey expected
inflation (forward-looking) and ``D_t`` is the recession dummy. There is
no standalone dummy intercept.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg, stats
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import EmptyFrame, EmptySelection, NegativeRadicand, RankDeficient
from .regime import RegimeSeries, recession_dummy
from .series import (
    CountryDataset,
    MarketClass,
    Quarter,
    QuarterlySeries,
    align,
    first_diff,
    inflation_proxy,
    lag,
    shifted_log,
)
from .trend import GapMode, hp_filter, unemployment_gap

COLUMNS = ("const", "infl_term", "u_gap", "infl_term_x_D", "u_gap_x_D")
MIN_FRAME_ROWS = 10
SAMPLE_START = Quarter(1980, 1)
SAMPLE_END = Quarter(2016, 1)


class Spec(str, enum.Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class TransformConfig:
    """Knobs shared by every transform between raw levels and the model frame."""

    shift_const: float = 1.0
    lamb: float = 1600.0
    gap_mode: GapMode = GapMode.LEVELS
    window: tuple[Quarter, Quarter] = (SAMPLE_START, SAMPLE_END)
    hac_bandwidth: int | None = None
    strict_recession: bool = False
    hp_gaps: str = "longest"

    def __post_init__(self):
        object.__setattr__(self, "gap_mode", GapMode(self.gap_mode))
        if self.shift_const < 0:
            raise ValueError("shift constant must be nonnegative")
        if self.lamb <= 0:
            raise ValueError("lambda must be positive")
        if self.window[1] < self.window[0]:
            raise ValueError("window start is after window end")
        if self.hac_bandwidth is not None and self.hac_bandwidth < 0:
            raise ValueError("HAC bandwidth must be nonnegative")


def _clip_or_none(s: QuarterlySeries, window) -> QuarterlySeries | None:
    try:
        return s.clip(*window)
    except ValueError:
        return None


@dataclass(frozen=True)
class CountryVariables:
    """Model-ready series for one country, each clipped to the sample window.

    ``lagged_inflation`` is built from the unclipped inflation series, so the
    first in-window quarter can use a pre-window observation. Entries are
    ``None`` when the raw input cannot support them.
    """

    code: str
    inflation: QuarterlySeries | None
    lagged_inflation: QuarterlySeries | None
    expected_inflation: QuarterlySeries | None
    inflation_trend: QuarterlySeries | None
    unemployment: QuarterlySeries | None
    nairu: QuarterlySeries | None
    gap: QuarterlySeries | None
    regimes: RegimeSeries | None


def _try(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError:
        return None


def derive_variables(d: CountryDataset, cfg: TransformConfig = TransformConfig()) -> CountryVariables:
    """Compute every derived series for one country.

    HP filters run on the window-clipped series (longest gap-free run when
    ``cfg.hp_gaps == "longest"``).
    """
    c, lamb, window = cfg.shift_const, cfg.lamb, cfg.window
    infl_full = _try(inflation_proxy, d.cpi, c)
    expected_full = _try(lambda s: first_diff(shifted_log(s, c)).replace(name="expected_inflation"), d.expected_cpi)
    infl = _clip_or_none(infl_full, window) if infl_full is not None else None
    lagged = _clip_or_none(lag(infl_full, 1), window) if infl_full is not None else None
    expected = _clip_or_none(expected_full, window) if expected_full is not None else None

    trend = None
    if infl is not None:
        dec = _try(hp_filter, infl, lamb, gaps=cfg.hp_gaps)
        trend = dec.trend.replace(name="inflation_trend") if dec else None

    u = _clip_or_none(d.unemployment, window)
    nairu_s = gap = None
    if u is not None:
        dec = _try(hp_filter, u, lamb, gaps=cfg.hp_gaps)
        if dec is not None:
            nairu_s = dec.trend.replace(name="nairu")
        gap = _try(unemployment_gap, u, cfg.gap_mode, c, lamb, gaps=cfg.hp_gaps)

    regimes = _try(recession_dummy, d.gdp, strict=cfg.strict_recession)
    return CountryVariables(d.code, infl, lagged, expected, trend, u, nairu_s, gap, regimes)


@dataclass(frozen=True, eq=False)
class ModelFrame:
    """Complete-case design for one country and one specification."""

    country: str
    spec: Spec
    quarters: tuple[Quarter, ...]
    y: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    columns: tuple[str, ...] = COLUMNS
    dummy: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or X.shape[0] != y.size or len(self.quarters) != y.size:
            raise ValueError("frame dimensions disagree")
        if X.shape[1] != len(self.columns):
            raise ValueError("column names do not match the regressor matrix")
        if np.isnan(X).any() or np.isnan(y).any():
            raise ValueError("frame contains missing values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        if self.dummy is not None:
            object.__setattr__(self, "dummy", np.asarray(self.dummy, dtype=float).reshape(-1))

    @property
    def nobs(self) -> int:
        return self.y.size

    @classmethod
    def from_components(cls, country, spec, quarters, y, infl_term, gap, dummy) -> "ModelFrame":
        infl_term = np.asarray(infl_term, dtype=float)
        gap = np.asarray(gap, dtype=float)
        dummy = np.asarray(dummy, dtype=float)
        X = np.column_stack([np.ones_like(infl_term), infl_term, gap, infl_term * dummy, gap * dummy])
        return cls(country, Spec(spec), tuple(quarters), y, X, COLUMNS, dummy)


def build_frame(
    d: CountryDataset,
    spec: Spec | str,
    regimes: RegimeSeries | None = None,
    cfg: TransformConfig = TransformConfig(),
    variables: CountryVariables | None = None,
) -> ModelFrame:
    """Assemble the regression frame, dropping rows with any missing cell."""
    spec = Spec(spec)
    v = variables if variables is not None else derive_variables(d, cfg)
    regimes = regimes if regimes is not None else v.regimes
    infl_term = v.lagged_inflation if spec is Spec.BACKWARD else v.expected_inflation
    parts = [v.inflation, infl_term, v.gap, regimes.as_series() if regimes is not None else None]
    if any(p is None for p in parts):
        raise EmptyFrame(f"{d.code}/{spec.value}: a model component is unavailable")
    try:
        y, e, g, dummy = align(*parts)
        y, e, g, dummy = (s.clip(*cfg.window) for s in (y, e, g, dummy))
    except ValueError as exc:
        raise EmptyFrame(f"{d.code}/{spec.value}: components do not overlap ({exc})") from exc
    keep = y.present & e.present & g.present & dummy.present
    if keep.sum() < MIN_FRAME_ROWS:
        raise EmptyFrame(f"{d.code}/{spec.value}: only {int(keep.sum())} complete rows")
    quarters = [q for q, k in zip(y.quarters, keep) if k]
    return ModelFrame.from_components(
        d.code, spec, quarters, y.values[keep], e.values[keep], g.values[keep], dummy.values[keep]
    )


def _check_rank(X: np.ndarray, names: Sequence[str]) -> None:
    n, k = X.shape
    if n <= k:
        raise RankDeficient(f"{n} rows for {k} regressors", names)
    zero = [names[j] for j in range(k) if not np.any(X[:, j])]
    if zero:
        raise RankDeficient(f"all-zero regressor columns: {', '.join(zero)}", zero)
    _, r, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag[0] * max(n, k) * np.finfo(float).eps
    rank = int((diag > tol).sum())
    if rank < k:
        bad = [names[j] for j in piv[rank:]]
        raise RankDeficient(f"collinear regressor columns: {', '.join(bad)}", bad)


def ols_arrays(X, y, names: Sequence[str] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares coefficients and residuals for dense ``X``, ``y``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    names = list(names) if names is not None else [f"x{j}" for j in range(X.shape[1])]
    _check_rank(X, names)
    beta, *_ = linalg.lstsq(X, y, lapack_driver="gelsy")
    return beta, y - X @ beta


def ols(f: ModelFrame) -> tuple[np.ndarray, np.ndarray]:
    return ols_arrays(f.X, f.y, f.columns)


def default_bandwidth(n: int) -> int:
    """Newey-West rule of thumb ``floor(4 * (n / 100) ** (2 / 9))``."""
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def bartlett_weights(bandwidth: int) -> np.ndarray:
    """Weights ``1 - l / (bandwidth + 1)`` for lags ``l = 1..bandwidth``."""
    lags = np.arange(1, bandwidth + 1)
    return 1.0 - lags / (bandwidth + 1.0)


def hac_meat(scores: np.ndarray, bandwidth: int) -> np.ndarray:
    """Bartlett-weighted long-run outer product of the score rows."""
    S = scores.T @ scores
    for ell, w in enumerate(bartlett_weights(bandwidth), start=1):
        gamma = scores[ell:].T @ scores[:-ell]
        S += w * (gamma + gamma.T)
    return S


def newey_west_arrays(X, residuals, bandwidth: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    e = np.asarray(residuals, dtype=float)
    if e.size != X.shape[0]:
        raise ValueError("residual length does not match the number of rows")
    if bandwidth < 0:
        raise ValueError("bandwidth must be nonnegative")
    bread = linalg.inv(X.T @ X)
    cov = bread @ hac_meat(X * e[:, None], bandwidth) @ bread
    return (cov + cov.T) / 2.0


def newey_west(f: ModelFrame, residuals, bandwidth: int) -> np.ndarray:
    """HAC sandwich ``(X'X)^-1 S (X'X)^-1`` with Bartlett weights, no small-sample scaling."""
    _check_rank(f.X, f.columns)
    return newey_west_arrays(f.X, residuals, bandwidth)


@dataclass(frozen=True, eq=False)
class RegressionResult:
    beta: np.ndarray
    hac_cov: np.ndarray
    residuals: np.ndarray
    nobs: int
    bandwidth: int
    columns: tuple[str, ...] = COLUMNS

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.hac_cov), 0.0, None))

    @property
    def df_resid(self) -> int:
        return self.nobs - len(self.beta)


def fit_frame(f: ModelFrame, bandwidth: int | None = None) -> RegressionResult:
    beta, resid = ols(f)
    bw = default_bandwidth(f.nobs) if bandwidth is None else int(bandwidth)
    cov = newey_west_arrays(f.X, resid, bw)
    return RegressionResult(beta, cov, resid, f.nobs, bw, f.columns)


@dataclass(frozen=True)
class CombinedCoefficient:
    """Sum of two coefficients with two standard errors.

    ``se_paper`` ignores the covariance term; ``se_exact`` includes it and is
    ``None`` when the variance estimate is negative.
    """

    value: float
    se_paper: float
    se_exact: float | None


def combine(r: RegressionResult, i: int, j: int, *, strict: bool = False) -> CombinedCoefficient:
    if i == j:
        raise ValueError("combine needs two distinct coefficients")
    k = len(r.beta)
    if not (0 <= i < k and 0 <= j < k):
        raise IndexError("coefficient index out of range")
    vi, vj, cij = r.hac_cov[i, i], r.hac_cov[j, j], r.hac_cov[i, j]
    se_paper = math.sqrt(vi + vj)
    radicand = vi + vj + 2.0 * cij
    if radicand < 0:
        if strict:
            raise NegativeRadicand(f"Var(b{i} + b{j}) estimate is negative ({radicand:.3g})")
        se_exact = None
    else:
        se_exact = math.sqrt(radicand)
    return CombinedCoefficient(float(r.beta[i] + r.beta[j]), se_paper, se_exact)


class Stars(enum.IntEnum):
    NONE = 0
    P10 = 1
    P5 = 2
    P1 = 3

    @property
    def marks(self) -> str:
        return "*" * int(self)


SIGNIFICANCE_LEVELS = ((0.01, Stars.P1), (0.05, Stars.P5), (0.10, Stars.P10))


def stars(coef: float, se: float, df: int) -> Stars:
    """Two-sided t-test of ``coef == 0`` with ``df`` degrees of freedom."""
    if not se > 0:
        raise ValueError("standard error must be positive")
    p = 2.0 * stats.t.sf(abs(coef / se), df)
    for level, mark in SIGNIFICANCE_LEVELS:
        if p < level:
            return mark
    return Stars.NONE


@dataclass(frozen=True)
class Estimate:
    coef: float
    se: float
    stars: Stars

    @classmethod
    def of(cls, coef: float, se: float, df: int) -> "Estimate":
        return cls(float(coef), float(se), stars(coef, se, df))


TERMS = ("tranquil_infl", "tranquil_gap", "recession_infl", "recession_gap", "constant")


@dataclass(frozen=True, eq=False)
class CountryReport:
    """One row of the regression table.

    Recession cells are ``None`` when the sample has no recession quarter.
    """

    country: str
    market_class: MarketClass
    spec: Spec
    tranquil_infl: Estimate
    tranquil_gap: Estimate
    recession_infl: Estimate | None
    recession_gap: Estimate | None
    constant: Estimate
    obs: int
    result: RegressionResult | None = None

    def cell(self, term: str) -> Estimate | None:
        if term not in TERMS:
            raise KeyError(term)
        return getattr(self, term)


def estimate_country(
    d: CountryDataset,
    spec: Spec | str,
    cfg: TransformConfig = TransformConfig(),
    variables: CountryVariables | None = None,
) -> CountryReport:
    spec = Spec(spec)
    frame = build_frame(d, spec, cfg=cfg, variables=variables)
    bw = cfg.hac_bandwidth
    df = frame.nobs - len(COLUMNS)
    if not frame.dummy.any():
        sub = ModelFrame(frame.country, spec, frame.quarters, frame.y, frame.X[:, :3], COLUMNS[:3], frame.dummy)
        res = fit_frame(sub, bw)
        se = res.se
        return CountryReport(
            d.code, d.market_class, spec,
            Estimate.of(res.beta[1], se[1], res.df_resid),
            Estimate.of(res.beta[2], se[2], res.df_resid),
            None, None,
            Estimate.of(res.beta[0], se[0], res.df_resid),
            frame.nobs, res,
        )
    res = fit_frame(frame, bw)
    se = res.se
    r_infl = combine(res, 1, 3)
    r_gap = combine(res, 2, 4)
    return CountryReport(
        d.code, d.market_class, spec,
        Estimate.of(res.beta[1], se[1], df),
        Estimate.of(res.beta[2], se[2], df),
        Estimate.of(r_infl.value, r_infl.se_paper, df),
        Estimate.of(r_gap.value, r_gap.se_paper, df),
        Estimate.of(res.beta[0], se[0], df),
        frame.nobs, res,
    )


def aggregate_fractions(
    reports: Iterable[CountryReport],
    market_class: MarketClass | str,
    spec: Spec | str,
    regime: str = "tranquil",
    *,
    term: str = "infl",
    significant_only: bool = False,
) -> float:
    """Mean of one coefficient across the countries of a market class.

    ``regime`` is ``"tranquil"`` or ``"recession"``; ``term`` is ``"infl"``
    (the inflation fraction) or ``"gap"`` (the Phillips coefficient). With
    ``significant_only`` entries without stars are excluded.
    """
    if regime not in ("tranquil", "recession"):
        raise ValueError("regime must be 'tranquil' or 'recession'")
    if term not in ("infl", "gap"):
        raise ValueError("term must be 'infl' or 'gap'")
    mc, sp = MarketClass.parse(market_class), Spec(spec)
    values = []
    for r in reports:
        if r.market_class is not mc or r.spec is not sp:
            continue
        cell = r.cell(f"{regime}_{term}")
        if cell is None or (significant_only and cell.stars is Stars.NONE):
            continue
        values.append(cell.coef)
    if not values:
        raise EmptySelection(f"no {regime} {term} estimates for class {mc.value}, {sp.value}")
    return float(np.mean(values))


class NCPCRegressor(RegressorMixin, BaseEstimator):
    """Phillips-curve regression with recession interactions, scikit-learn style.

    ``X`` has three columns: the expectation term, the unemployment gap and
    the 0/1 recession dummy. The five-column design (constant, both base
    terms, both interactions) is built internally.

    Parameters
    ----------
    hac_bandwidth : int or None, default=None
        Bartlett bandwidth for the HAC covariance; ``None`` uses
        :func:`default_bandwidth` on the number of rows.

    Attributes
    ----------
    beta_ : ndarray of shape (5,)
    cov_ : ndarray of shape (5, 5)
        HAC covariance of ``beta_``.
    bse_ : ndarray of shape (5,)
    bandwidth_ : int
    intercept_ : float
    coef_ : ndarray of shape (4,)
    """

    def __init__(self, hac_bandwidth=None):
        self.hac_bandwidth = hac_bandwidth

    @staticmethod
    def _design(X):
        if X.shape[1] != 3:
            raise ValueError(f"expected 3 columns (expectation, gap, dummy), got {X.shape[1]}")
        e, g, d = X.T
        return np.column_stack([np.ones(len(X)), e, g, e * d, g * d])

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        Z = self._design(X)
        beta, resid = ols_arrays(Z, y, COLUMNS)
        bw = default_bandwidth(len(y)) if self.hac_bandwidth is None else int(self.hac_bandwidth)
        self.beta_ = beta
        self.cov_ = newey_west_arrays(Z, resid, bw)
        self.bse_ = np.sqrt(np.clip(np.diag(self.cov_), 0.0, None))
        self.bandwidth_ = bw
        self.resid_ = resid
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self)
        X = check_array(X)
        return self._design(X) @ self.beta_

    def result(self) -> RegressionResult:
        check_is_fitted(self)
        return RegressionResult(self.beta_, self.cov_, self.resid_, len(self.resid_), self.bandwidth_)

    def combined(self, i: int, j: int) -> CombinedCoefficient:
        return combine(self.result(), i, j)
