"""Quarterly series container and the transforms that build the model proxies.

Missing observations are stored as ``NaN``. A series always covers a
contiguous run of quarters; gaps are explicit NaN cells, never skipped.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    InsufficientData,
    NonPositiveAfterShift,
    ParseError,
    SeriesTooShort,
)

_QUARTER_RE = re.compile(r"^\s*(\d{4})\s*[Qq]\s*(\d)\s*$")


@total_ordering
@dataclass(frozen=True)
class Quarter:
    year: int
    quarter: int

    def __post_init__(self):
        if self.quarter not in (1, 2, 3, 4):
            raise ValueError(f"quarter must be in 1..4, got {self.quarter}")

    @classmethod
    def parse(cls, text: str) -> "Quarter":
        """Parse ``YYYYQn`` (case-insensitive)."""
        m = _QUARTER_RE.match(text)
        if not m:
            raise ParseError(f"malformed quarter {text!r}, expected YYYYQn")
        q = int(m.group(2))
        if not 1 <= q <= 4:
            raise ParseError(f"quarter digit out of range in {text!r}")
        return cls(int(m.group(1)), q)

    @classmethod
    def from_ordinal(cls, n: int) -> "Quarter":
        year, q = divmod(n, 4)
        return cls(year, q + 1)

    def ordinal(self) -> int:
        return self.year * 4 + self.quarter - 1

    def __add__(self, k: int) -> "Quarter":
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return Quarter.from_ordinal(self.ordinal() + int(k))

    def __sub__(self, other):
        if isinstance(other, Quarter):
            return self.ordinal() - other.ordinal()
        if isinstance(other, (int, np.integer)):
            return Quarter.from_ordinal(self.ordinal() - int(other))
        return NotImplemented

    def __lt__(self, other: "Quarter") -> bool:
        if not isinstance(other, Quarter):
            return NotImplemented
        return self.ordinal() < other.ordinal()

    def __str__(self) -> str:
        return f"{self.year}Q{self.quarter}"


def quarter_range(start: Quarter, end: Quarter) -> list[Quarter]:
    """Inclusive list of quarters from ``start`` to ``end``."""
    return [start + i for i in range(end - start + 1)]


def _as_values(values) -> np.ndarray:
    arr = np.array(
        [np.nan if v is None else v for v in values], dtype=float
    ).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuarterlySeries:
    """One variable for one country over contiguous quarters.

    ``values`` is a read-only float array; NaN marks a missing cell.
    """

    country: str
    name: str
    start: Quarter
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_values(self.values)
        if arr.size < 1:
            raise SeriesTooShort("a series needs at least one cell")
        object.__setattr__(self, "values", arr)

    @property
    def end(self) -> Quarter:
        return self.start + (len(self.values) - 1)

    @property
    def quarters(self) -> list[Quarter]:
        return quarter_range(self.start, self.end)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuarterlySeries):
            return NotImplemented
        return (
            self.country == other.country
            and self.name == other.name
            and self.start == other.start
            and len(self) == len(other)
            and bool(np.array_equal(self.values, other.values, equal_nan=True))
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"QuarterlySeries({self.country!r}, {self.name!r}, {self.start}..{self.end},"
            f" n={len(self)}, present={self.n_present})"
        )

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def n_present(self) -> int:
        return int(self.present.sum())

    def at(self, q: Quarter) -> float:
        i = q - self.start
        if 0 <= i < len(self):
            return float(self.values[i])
        return math.nan

    def replace(self, values=None, *, name=None, start=None) -> "QuarterlySeries":
        return QuarterlySeries(
            self.country,
            self.name if name is None else name,
            self.start if start is None else start,
            self.values if values is None else values,
        )

    def clip(self, start: Quarter | None = None, end: Quarter | None = None) -> "QuarterlySeries":
        """Restrict to ``[start, end]``; raises if the window does not overlap."""
        lo = self.start if start is None else max(start, self.start)
        hi = self.end if end is None else min(end, self.end)
        if hi < lo:
            raise SeriesTooShort(
                f"{self.country}/{self.name}: window {start}..{end} does not overlap {self.start}..{self.end}"
            )
        i0 = lo - self.start
        return self.replace(self.values[i0 : i0 + (hi - lo) + 1], start=lo)

    def trim(self) -> "QuarterlySeries":
        """Drop leading and trailing missing cells."""
        idx = np.flatnonzero(self.present)
        if idx.size == 0:
            raise InsufficientData(f"{self.country}/{self.name}: no present values")
        return self.replace(self.values[idx[0] : idx[-1] + 1], start=self.start + int(idx[0]))

    def longest_run(self) -> "QuarterlySeries":
        """Longest contiguous stretch without missing cells (earliest on ties)."""
        best = (0, 0)
        run_start = None
        for i, ok in enumerate(list(self.present) + [False]):
            if ok and run_start is None:
                run_start = i
            elif not ok and run_start is not None:
                if i - run_start > best[1] - best[0]:
                    best = (run_start, i)
                run_start = None
        if best[1] == best[0]:
            raise InsufficientData(f"{self.country}/{self.name}: no present values")
        return self.replace(self.values[best[0] : best[1]], start=self.start + best[0])

    def _binary(self, other, op, label) -> "QuarterlySeries":
        if isinstance(other, QuarterlySeries):
            a, b = align(self, other)
            return a.replace(op(a.values, b.values), name=f"{self.name}{label}{other.name}")
        return self.replace(op(self.values, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add, "+")

    def __sub__(self, other):
        return self._binary(other, np.subtract, "-")

    def __mul__(self, other):
        return self._binary(other, np.multiply, "*")

    def __neg__(self):
        return self.replace(-self.values)

    __radd__ = __add__
    __rmul__ = __mul__


def align(*series: QuarterlySeries) -> list[QuarterlySeries]:
    """Clip every series to the common quarter range.

    Cells missing in any input become missing in all outputs, so results
    are defined exactly on the intersection of present indices.
    """
    if not series:
        return []
    lo = max(s.start for s in series)
    hi = min(s.end for s in series)
    if hi < lo:
        raise SeriesTooShort("series do not overlap in time")
    clipped = [s.clip(lo, hi) for s in series]
    mask = np.logical_and.reduce([c.present for c in clipped])
    return [c.replace(np.where(mask, c.values, np.nan)) for c in clipped]


class MarketClass(str, enum.Enum):
    DEVELOPED = "D"
    EMERGING = "E"
    FRONTIER = "F"

    @classmethod
    def parse(cls, text) -> "MarketClass":
        if isinstance(text, MarketClass):
            return text
        t = str(text).strip().upper()
        for m in cls:
            if t in (m.value, m.name):
                return m
        raise ValueError(f"unknown market class {text!r}")

    @property
    def rank(self) -> int:
        return "DEF".index(self.value)


@dataclass(frozen=True)
class CountryDataset:
    code: str
    market_class: MarketClass
    cpi: QuarterlySeries
    expected_cpi: QuarterlySeries
    unemployment: QuarterlySeries
    gdp: QuarterlySeries

    def __post_init__(self):
        object.__setattr__(self, "market_class", MarketClass.parse(self.market_class))
        for s in self.series():
            if s.country != self.code:
                raise ValueError(
                    f"series {s.name!r} belongs to {s.country!r}, not {self.code!r}"
                )

    def series(self) -> tuple[QuarterlySeries, ...]:
        return (self.cpi, self.expected_cpi, self.unemployment, self.gdp)


def shifted_log(s: QuarterlySeries, c: float = 1.0) -> QuarterlySeries:
    """Natural log of ``s + c``; missing cells stay missing."""
    if c < 0:
        raise ValueError("shift constant must be nonnegative")
    shifted = s.values + c
    bad = s.present & (shifted <= 0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonPositiveAfterShift(
            f"{s.country}/{s.name}: value {s.values[i]!r} at {s.start + i} is not positive"
            f" after adding {c}; increase the shift constant"
        )
    with np.errstate(invalid="ignore"):
        return s.replace(np.log(shifted))


def first_diff(s: QuarterlySeries) -> QuarterlySeries:
    """``s_t - s_{t-1}``; the result starts one quarter later."""
    if len(s) < 2:
        raise SeriesTooShort(f"{s.country}/{s.name}: first difference needs 2 cells")
    return s.replace(np.diff(s.values), start=s.start + 1)


def lag(s: QuarterlySeries, k: int = 1) -> QuarterlySeries:
    """Value at quarter q equals ``s`` at q - k (same cells, start moved forward)."""
    if k < 1:
        raise ValueError("lag must be a positive integer")
    return s.replace(start=s.start + k)


def inflation_proxy(cpi: QuarterlySeries, c: float = 1.0) -> QuarterlySeries:
    """Quarterly inflation as the first difference of the shifted log CPI."""
    return first_diff(shifted_log(cpi, c)).replace(name="inflation")


def describe(s: QuarterlySeries | Sequence[float]) -> tuple[float, float]:
    """Mean and sample (n-1) standard deviation over present values."""
    values = s.values if isinstance(s, QuarterlySeries) else np.asarray(s, dtype=float)
    x = values[~np.isnan(values)]
    if x.size < 2:
        raise InsufficientData("describe needs at least two present values")
    return float(x.mean()), float(x.std(ddof=1))


def from_pairs(country: str, name: str, pairs: Iterable[tuple[Quarter, float | None]]) -> QuarterlySeries:
    """Build a contiguous series from (quarter, value) pairs, filling gaps with NaN."""
    pairs = sorted(pairs, key=lambda p: p[0])
    if not pairs:
        raise SeriesTooShort(f"{country}/{name}: no observations")
    start = pairs[0][0]
    n = pairs[-1][0] - start + 1
    values = np.full(n, np.nan)
    for q, v in pairs:
        if v is not None:
            values[q - start] = v
    return QuarterlySeries(country, name, start, values)
