"""Hodrick-Prescott trend extraction: inflation trend, NAIRU and unemployment gap."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded
from sklearn.base import BaseEstimator, OneToOneFeatureMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import NonContiguous, SeriesTooShort
from .series import QuarterlySeries, shifted_log

MIN_HP_LENGTH = 4


def ravn_uhlig_lambda(periods_per_year: int = 4, power: float = 2) -> float:
    """Smoothing parameter scaled to the sampling frequency.

    ``(periods_per_year / 4) ** power * 1600``; quarterly data gives 1600
    whatever the power.
    """
    if periods_per_year < 1:
        raise ValueError("periods_per_year must be >= 1")
    return (periods_per_year / 4) ** power * 1600.0


def _penalty_bands(n: int, lamb: float) -> np.ndarray:
    """Upper banded storage of ``I + lamb * D'D`` for ``solveh_banded``.

    Row 2 is the main diagonal, row 1 the first superdiagonal, row 0 the
    second superdiagonal (LAPACK ``pbsv`` layout, u=2).
    """
    d0 = np.zeros(n)
    d0[: n - 2] += 1.0
    d0[1 : n - 1] += 4.0
    d0[2:] += 1.0
    d1 = np.zeros(n - 1)
    d1[: n - 2] -= 2.0
    d1[1 : n - 1] -= 2.0
    d2 = np.ones(n - 2)

    ab = np.zeros((3, n))
    ab[2] = 1.0 + lamb * d0
    ab[1, 1:] = lamb * d1
    ab[0, 2:] = lamb * d2
    return ab


def second_difference_matrix(n: int) -> np.ndarray:
    """Dense ``(n-2, n)`` second-difference operator."""
    D = np.zeros((n - 2, n))
    for k in range(n - 2):
        D[k, k : k + 3] = (1.0, -2.0, 1.0)
    return D


DUAL_SWITCH_LAMBDA = 1e7


def _second_diff(y: np.ndarray) -> np.ndarray:
    return y[:-2] - 2.0 * y[1:-1] + y[2:]


def _second_diff_T(w: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[:-2] += w
    out[1:-1] -= 2.0 * w
    out[2:] += w
    return out


def hp_cycle(y, lamb: float = 1600.0) -> np.ndarray:
    """HP cycle ``y - tau`` of a gap-free 1-d array.

    The cycle is solved for directly, ``(I + lamb D'D) c = lamb D'D y``, so
    inputs with vanishing second differences give an exactly zero cycle.
    Above ``DUAL_SWITCH_LAMBDA`` the equivalent system
    ``(I / lamb + D D') w = D y``, ``c = D' w`` is used instead: its
    conditioning does not grow with lambda.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("HP filter expects a 1-d array")
    if y.size < MIN_HP_LENGTH:
        raise SeriesTooShort(f"HP filter needs at least {MIN_HP_LENGTH} observations, got {y.size}")
    if np.isnan(y).any():
        raise NonContiguous("HP filter input contains missing values")
    if lamb < 0:
        raise ValueError("lambda must be nonnegative")
    if lamb == 0:
        return np.zeros_like(y)
    n = y.size
    dy = _second_diff(y)
    if lamb <= DUAL_SWITCH_LAMBDA:
        ab = _penalty_bands(n, lamb)
        return solveh_banded(ab, lamb * _second_diff_T(dy, n), check_finite=False)
    ab = np.zeros((3, n - 2))
    ab[2] = 6.0 + 1.0 / lamb
    ab[1, 1:] = -4.0
    ab[0, 2:] = 1.0
    return _second_diff_T(solveh_banded(ab, dy, check_finite=False), n)


def hp_trend(y, lamb: float = 1600.0) -> np.ndarray:
    """Trend solving ``(I + lamb * D'D) tau = y`` for a gap-free 1-d array."""
    y = np.asarray(y, dtype=float)
    return y - hp_cycle(y, lamb)


def _apply(ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = ab[2] * x
    out[:-1] += ab[1, 1:] * x[1:]
    out[1:] += ab[1, 1:] * x[:-1]
    out[:-2] += ab[0, 2:] * x[2:]
    out[2:] += ab[0, 2:] * x[:-2]
    return out


def hp_residual(y, tau, lamb: float) -> float:
    """Infinity norm of ``(I + lamb D'D) tau - y``."""
    y = np.asarray(y, dtype=float)
    ab = _penalty_bands(y.size, lamb)
    return float(np.max(np.abs(_apply(ab, np.asarray(tau, dtype=float)) - y)))


@dataclass(frozen=True)
class TrendDecomposition:
    trend: QuarterlySeries
    cycle: QuarterlySeries
    lamb: float


def hp_filter(s: QuarterlySeries, lamb: float = 1600.0, *, gaps: str = "raise") -> TrendDecomposition:
    """Split ``s`` into HP trend and cycle.

    Leading and trailing missing cells are dropped. Interior gaps raise
    ``NonContiguous`` unless ``gaps="longest"``, in which case only the
    longest gap-free run is filtered.
    """
    if gaps not in ("raise", "longest"):
        raise ValueError("gaps must be 'raise' or 'longest'")
    if s.n_present < MIN_HP_LENGTH:
        raise SeriesTooShort(
            f"{s.country}/{s.name}: HP filter needs {MIN_HP_LENGTH} present values, got {s.n_present}"
        )
    run = s.trim()
    if not run.present.all():
        if gaps == "raise":
            raise NonContiguous(f"{s.country}/{s.name}: interior missing values")
        run = run.longest_run()
    cyc = hp_cycle(run.values, lamb)
    trend = run.replace(run.values - cyc, name=f"{s.name}_trend")
    cycle = run.replace(cyc, name=f"{s.name}_cycle")
    return TrendDecomposition(trend, cycle, float(lamb))


def nairu(u: QuarterlySeries, lamb: float = 1600.0, *, gaps: str = "raise") -> QuarterlySeries:
    """HP trend of the unemployment rate."""
    return hp_filter(u, lamb, gaps=gaps).trend.replace(name="nairu")


class GapMode(str, enum.Enum):
    LEVELS = "levels"
    LOGS = "logs"


def unemployment_gap(
    u: QuarterlySeries,
    mode: GapMode | str = GapMode.LEVELS,
    c: float = 1.0,
    lamb: float = 1600.0,
    *,
    gaps: str = "raise",
) -> QuarterlySeries:
    """Unemployment minus NAIRU, i.e. the HP cycle of ``u`` (or of its shifted log)."""
    mode = GapMode(mode)
    base = u if mode is GapMode.LEVELS else shifted_log(u, c)
    return hp_filter(base, lamb, gaps=gaps).cycle.replace(name="unemployment_gap")


class HPFilter(OneToOneFeatureMixin, TransformerMixin, BaseEstimator):
    """Column-wise Hodrick-Prescott filter as a scikit-learn transformer.

    Each column of ``X`` is treated as one time series (rows are periods).

    Parameters
    ----------
    lamb : float, default=1600
        Smoothing parameter. Use :func:`ravn_uhlig_lambda` for other
        frequencies.
    output : {"cycle", "trend"}, default="cycle"
        Component returned by :meth:`transform`.
    """

    def __init__(self, lamb=1600.0, output="cycle"):
        self.lamb = lamb
        self.output = output

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=MIN_HP_LENGTH)
        if self.lamb < 0:
            raise ValueError("lamb must be nonnegative")
        if self.output not in ("cycle", "trend"):
            raise ValueError("output must be 'cycle' or 'trend'")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_array(X, ensure_min_samples=MIN_HP_LENGTH)
        check_is_fitted(self)
        cycle = np.column_stack([hp_cycle(col, self.lamb) for col in X.T])
        return X - cycle if self.output == "trend" else cycle
