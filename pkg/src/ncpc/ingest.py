"""Country registry and the long-format CSV panel.

Canonical schema (UTF-8, comma-delimited, one row per country-quarter)::

    country,date,cpi,expected_cpi,unemployment,gdp
    AU,1980Q1,25.1,25.3,0.061,123.4

An empty cell is a missing value.
"""
from __future__ import annotations

import csv
import logging
import os
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .exceptions import NonMonotonicDates, ParseError, UnknownCountry
from .series import CountryDataset, MarketClass, Quarter, QuarterlySeries, from_pairs

log = logging.getLogger(__name__)

HEADER = ("country", "date", "cpi", "expected_cpi", "unemployment", "gdp")
VARIABLES = HEADER[2:]
DATA_ENV = "NCPC_DATA"
PERCENT_THRESHOLD = 1.5


@dataclass(frozen=True)
class CountryRegistryEntry:
    code: str
    name: str
    market_class: MarketClass


_D, _E, _F = MarketClass.DEVELOPED, MarketClass.EMERGING, MarketClass.FRONTIER

# Turkey is grouped with the emerging markets: that is its S&P class, and the
# published class averages are reproduced only with it there.
REGISTRY: Mapping[str, CountryRegistryEntry] = OrderedDict(
    (code, CountryRegistryEntry(code, name, mc))
    for code, name, mc in [
        ("AG", "Argentina", _F),
        ("AU", "Australia", _D),
        ("BD", "Germany", _D),
        ("BG", "Belgium", _D),
        ("BR", "Brazil", _E),
        ("CH", "Canada", _D),
        ("CL", "Chile", _E),
        ("CN", "China", _E),
        ("CZ", "Czech Republic", _E),
        ("DK", "Denmark", _D),
        ("ES", "Spain", _D),
        ("FN", "Finland", _D),
        ("FR", "France", _D),
        ("GR", "Greece", _E),
        ("HN", "Hungary", _E),
        ("ID", "Indonesia", _E),
        ("IN", "India", _E),
        ("IR", "Ireland", _D),
        ("IT", "Italy", _D),
        ("JP", "Japan", _D),
        ("KO", "South Korea", _D),
        ("MX", "Mexico", _E),
        ("MY", "Malaysia", _E),
        ("NL", "Netherlands", _D),
        ("NW", "Norway", _D),
        ("OE", "Austria", _D),
        ("PH", "Philippines", _E),
        ("PO", "Poland", _E),
        ("PT", "Portugal", _D),
        ("RM", "Romania", _F),
        ("RS", "Russia", _E),
        ("SA", "South Africa", _E),
        ("SD", "Sweden", _D),
        ("SP", "Singapore", _D),
        ("SW", "Switzerland", _D),
        ("TH", "Thailand", _E),
        ("TK", "Turkey", _E),
        ("TW", "Taiwan", _E),
        ("UK", "United Kingdom", _D),
        ("US", "United States", _D),
        ("VE", "Venezuela", _F),
    ]
)


def lookup(code: str) -> CountryRegistryEntry:
    try:
        return REGISTRY[code.strip().upper()]
    except KeyError:
        raise UnknownCountry(f"unknown country code {code!r}") from None


def default_data_path() -> Path | None:
    p = os.environ.get(DATA_ENV)
    return Path(p) if p else None


def _parse_number(text: str, row: int, column: str) -> float | None:
    t = text.strip()
    if t == "" or t.upper() in ("NA", "NAN"):
        return None
    try:
        v = float(t)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", row, column) from None
    if not np.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", row, column)
    return v


def load_panel(path: str | os.PathLike) -> dict[str, CountryDataset]:
    """Read the long-format CSV into one dataset per country (file order kept)."""
    path = Path(path)
    rows: dict[str, dict[str, list]] = OrderedDict()
    last: dict[str, Quarter] = {}
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        header = [h.strip().lower() for h in header]
        if tuple(header) != HEADER:
            raise ParseError(f"header must be {','.join(HEADER)}, got {','.join(header)}", 1)
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(HEADER):
                raise ParseError(f"expected {len(HEADER)} fields, got {len(rec)}", lineno)
            code = rec[0].strip().upper()
            if code not in REGISTRY:
                raise UnknownCountry(f"unknown country code {rec[0]!r} on row {lineno}")
            try:
                q = Quarter.parse(rec[1])
            except ParseError as exc:
                raise ParseError(str(exc), lineno, "date") from None
            if code in last and not q > last[code]:
                raise NonMonotonicDates(f"{code}: {q} follows {last[code]} on row {lineno}")
            last[code] = q
            cells = rows.setdefault(code, {v: [] for v in VARIABLES})
            for name, text in zip(VARIABLES, rec[2:]):
                cells[name].append((q, _parse_number(text, lineno, name)))
    panel = OrderedDict()
    for code, cells in rows.items():
        series = {name: from_pairs(code, name, pairs) for name, pairs in cells.items()}
        panel[code] = CountryDataset(code, REGISTRY[code].market_class, **series)
    return panel


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_panel(panel: Mapping[str, CountryDataset], path: str | os.PathLike) -> None:
    """Write a panel in the canonical schema; values round-trip exactly."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for code, d in panel.items():
            series = d.series()
            lo = min(s.start for s in series)
            hi = max(s.end for s in series)
            q = lo
            while q <= hi:
                w.writerow([code, str(q)] + [_fmt(s.at(q)) for s in series])
                q = q + 1


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_panel`.

    ``panel`` carries the normalized data (unemployment in decimals).
    """

    panel: dict[str, CountryDataset]
    violations: list[str] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return bool(self.violations or self.notices)


def _nonpositive(s: QuarterlySeries, label: str, out: list[str]) -> None:
    bad = s.present & (s.values <= 0)
    for i in np.flatnonzero(bad):
        out.append(f"{s.country} {s.start + int(i)}: {label} {s.values[i]!r} is not positive")


def validate_panel(panel: Mapping[str, CountryDataset]) -> ValidationReport:
    """Check value ranges per country and normalize percent unemployment.

    A country whose unemployment exceeds 1.5 anywhere is taken to be in
    percent and divided by 100. Problems are listed, never raised.
    """
    report = ValidationReport(panel=OrderedDict())
    for code, d in panel.items():
        _nonpositive(d.cpi, "CPI", report.violations)
        _nonpositive(d.gdp, "GDP", report.violations)
        u = d.unemployment
        present = u.values[u.present]
        if present.size and present.max() > PERCENT_THRESHOLD:
            u = u.replace(u.values / 100.0)
            report.notices.append(f"{code}: unemployment looks like percent; divided by 100")
        bad = u.present & ((u.values < 0) | (u.values > 1))
        for i in np.flatnonzero(bad):
            report.violations.append(
                f"{code} {u.start + int(i)}: unemployment {u.values[i]!r} outside [0, 1]"
            )
        report.panel[code] = CountryDataset(code, d.market_class, d.cpi, d.expected_cpi, u, d.gdp)
    for line in report.notices:
        log.info(line)
    return report


def convert_wide(sources: Mapping[str, str | os.PathLike], out: str | os.PathLike) -> dict[str, CountryDataset]:
    """Merge per-variable wide CSVs (``date`` column plus one column per country) into the long schema.

    ``sources`` maps each of ``cpi``, ``expected_cpi``, ``unemployment``,
    ``gdp`` to a file. Unknown country columns are rejected.
    """
    missing = set(VARIABLES) - set(sources)
    if missing:
        raise ValueError(f"missing sources for: {', '.join(sorted(missing))}")
    data: dict[str, dict[str, list]] = OrderedDict()
    for var in VARIABLES:
        with Path(sources[var]).open(newline="", encoding="utf-8-sig") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            codes = [lookup(h).code for h in header[1:]]
            for lineno, rec in enumerate(reader, start=2):
                if not rec or not rec[0].strip():
                    continue
                try:
                    q = Quarter.parse(rec[0])
                except ParseError as exc:
                    raise ParseError(f"{sources[var]}: {exc}", lineno, header[0]) from None
                for code, text in zip(codes, rec[1:]):
                    cells = data.setdefault(code, {v: [] for v in VARIABLES})
                    cells[var].append((q, _parse_number(text, lineno, code)))
    panel = OrderedDict()
    for code in sorted(data):
        series = {}
        for var in VARIABLES:
            pairs = data[code][var] or [(Quarter(1980, 1), None)]
            series[var] = from_pairs(code, var, pairs)
        panel[code] = CountryDataset(code, REGISTRY[code].market_class, **series)
    write_panel(panel, out)
    return panel
