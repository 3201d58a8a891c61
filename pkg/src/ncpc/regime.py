"""Recession dummy from GDP growth and recession-quarter counts per window."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonPositiveGdp, SeriesTooShort
from .series import Quarter, QuarterlySeries

# Window labels of the recession-count table mapped to inclusive quarter ranges.
A1_WINDOWS: dict[str, tuple[Quarter, Quarter]] = {
    "1980-1990": (Quarter(1980, 1), Quarter(1989, 4)),
    "1990-2000": (Quarter(1990, 1), Quarter(1999, 4)),
    "1980-2016": (Quarter(1980, 1), Quarter(2016, 1)),
    "1990-2016": (Quarter(1990, 1), Quarter(2016, 1)),
    "2000-2016": (Quarter(2000, 1), Quarter(2016, 1)),
}


@dataclass(frozen=True, eq=False)
class RegimeSeries:
    """Recession flags on contiguous quarters: 1.0 recession, 0.0 tranquil, NaN unknown."""

    country: str
    start: Quarter
    flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array([np.nan if v is None else float(v) for v in self.flags], dtype=float)
        ok = np.isnan(arr) | (arr == 0.0) | (arr == 1.0)
        if not ok.all():
            raise ValueError("regime flags must be 0, 1 or missing")
        arr.setflags(write=False)
        object.__setattr__(self, "flags", arr)

    def __len__(self) -> int:
        return len(self.flags)

    @property
    def end(self) -> Quarter:
        return self.start + (len(self.flags) - 1)

    def as_series(self) -> QuarterlySeries:
        return QuarterlySeries(self.country, "recession", self.start, self.flags)

    def to_list(self) -> list[bool | None]:
        return [None if np.isnan(v) else bool(v) for v in self.flags]


def recession_dummy(gdp: QuarterlySeries, *, strict: bool = False) -> RegimeSeries:
    """Flag quarters whose log GDP growth is non-positive.

    The first quarter has no growth rate and is tranquil. With
    ``strict=True`` only strictly negative growth counts as recession.
    Missing GDP on either side of a growth rate gives a missing flag.
    """
    if len(gdp) < 2:
        raise SeriesTooShort(f"{gdp.country}: recession dummy needs at least 2 GDP quarters")
    v = gdp.values
    if (gdp.present & (v <= 0)).any():
        raise NonPositiveGdp(f"{gdp.country}: GDP must be positive where present")
    # sign(log b - log a) == sign(b - a); comparing levels avoids log rounding
    prev, cur = v[:-1], v[1:]
    with np.errstate(invalid="ignore"):
        hit = cur < prev if strict else cur <= prev
    flags = np.where(np.isnan(prev) | np.isnan(cur), np.nan, hit.astype(float))
    flags = np.concatenate([[np.nan if np.isnan(v[0]) else 0.0], flags])
    return RegimeSeries(gdp.country, gdp.start, flags)


def count_recessions(r: RegimeSeries, window: tuple[Quarter, Quarter]) -> int:
    """Number of recession quarters inside the inclusive window."""
    lo, hi = window
    if hi < lo:
        raise ValueError("window start must not be after its end")
    i0 = max(lo - r.start, 0)
    i1 = min(hi - r.start, len(r) - 1)
    if i1 < i0:
        return 0
    return int(np.nansum(r.flags[i0 : i1 + 1]))


def window_has_data(r: RegimeSeries, window: tuple[Quarter, Quarter]) -> bool:
    """True when at least one quarter of the window carries a defined flag."""
    lo, hi = window
    i0 = max(lo - r.start, 0)
    i1 = min(hi - r.start, len(r) - 1)
    if i1 < i0:
        return False
    return bool((~np.isnan(r.flags[i0 : i1 + 1])).any())
