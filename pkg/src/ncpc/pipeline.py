"""Panel-wide runs: descriptive, regression, recession and unit-root tables.

Countries are analysed independently on a bounded thread pool and merged in
a fixed order (market class D, E, F, then country code), so output does not
depend on the degree of parallelism.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping

from .estimate import (
    CountryReport,
    CountryVariables,
    Spec,
    TERMS,
    TransformConfig,
    aggregate_fractions,
    derive_variables,
    estimate_country,
    SAMPLE_END,
    SAMPLE_START,
)
from .exceptions import EmptySelection, NCPCError, UnknownCountry
from .ingest import REGISTRY, load_panel, validate_panel
from .regime import A1_WINDOWS, count_recessions, window_has_data
from .series import CountryDataset, MarketClass, Quarter, describe
from .trend import GapMode
from .unitroot import UnitRootResult, adf, pp

DESCRIBE_VARIABLES = (
    "inflation",
    "expected_inflation",
    "inflation_trend",
    "unemployment",
    "nairu",
    "unemployment_gap",
)
UNITROOT_SERIES = ("inflation", "expected_inflation", "unemployment_gap")


@dataclass(frozen=True)
class RunConfig:
    data: Path | None = None
    spec: str = "both"
    countries: tuple[str, ...] | None = None
    gap_mode: GapMode = GapMode.LEVELS
    shift_const: float = 1.0
    lamb: float = 1600.0
    hac_bandwidth: int | None = None
    window: tuple[Quarter, Quarter] = (SAMPLE_START, SAMPLE_END)
    fmt: str = "md"
    out: Path | None = None
    jobs: int = 4
    pp_bandwidth: str = "fixed"
    max_lag: int = 13
    golden: Path | None = None

    def __post_init__(self):
        if self.spec not in ("backward", "forward", "both"):
            raise ValueError("spec must be backward, forward or both")
        if self.fmt not in ("md", "csv", "json"):
            raise ValueError("format must be md, csv or json")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.pp_bandwidth not in ("fixed", "auto"):
            raise ValueError("pp bandwidth must be fixed or auto")
        # TransformConfig validates the remaining knobs
        self.transform()

    def transform(self) -> TransformConfig:
        return TransformConfig(
            shift_const=self.shift_const,
            lamb=self.lamb,
            gap_mode=GapMode(self.gap_mode),
            window=self.window,
            hac_bandwidth=self.hac_bandwidth,
        )

    @property
    def specs(self) -> tuple[Spec, ...]:
        if self.spec == "both":
            return (Spec.BACKWARD, Spec.FORWARD)
        return (Spec(self.spec),)

    def as_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["window"] = [str(q) for q in self.window]
        d["gap_mode"] = GapMode(self.gap_mode).value
        for k in ("data", "out", "golden"):
            d[k] = None if d[k] is None else str(d[k])
        d["countries"] = None if self.countries is None else list(self.countries)
        # parallelism and destinations never influence results
        for k in ("jobs", "out", "fmt", "data", "golden"):
            d.pop(k)
        return d


# ----------------------------------------------------------------- tables


def _fmt_num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return f"{v:.4f}"
    return str(v)


@dataclass
class Table:
    """Rows of raw values plus a display layout for markdown.

    ``display`` pairs a header with a function rendering one row; when empty
    the raw keys are shown.
    """

    name: str
    title: str
    keys: list[str]
    rows: list[dict[str, Any]]
    display: list[tuple[str, Callable[[dict], str]]] = field(default_factory=list)

    def to_markdown(self) -> str:
        cols = self.display or [(k, (lambda r, k=k: _fmt_num(r.get(k)))) for k in self.keys]
        lines = [f"### {self.title}", ""]
        lines.append("| " + " | ".join(h for h, _ in cols) + " |")
        lines.append("|" + "|".join("---" for _ in cols) + "|")
        for r in self.rows:
            lines.append("| " + " | ".join(fn(r) for _, fn in cols) + " |")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.keys)
        for r in self.rows:
            w.writerow([_fmt_num(r.get(k)) for k in self.keys])
        return buf.getvalue()

    def to_json_obj(self) -> dict[str, Any]:
        return {"name": self.name, "title": self.title, "columns": self.keys, "rows": self.rows}


def _json_safe(v):
    if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render(tables: list[Table], fmt: str, command: str, cfg: RunConfig | None = None) -> str:
    if fmt == "md":
        return "\n".join(t.to_markdown() for t in tables)
    if fmt == "csv":
        if len(tables) == 1:
            return tables[0].to_csv()
        return "\n".join(f"# table: {t.name}\n{t.to_csv()}" for t in tables)
    doc = {
        "command": command,
        "config": cfg.as_dict() if cfg is not None else None,
        "tables": [t.to_json_obj() for t in tables],
    }
    return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------ panel runs


def _order_key(code: str, d: CountryDataset) -> tuple[int, str]:
    return (d.market_class.rank, code)


def select_countries(panel: Mapping[str, CountryDataset], cfg: RunConfig) -> list[CountryDataset]:
    codes = list(panel)
    if cfg.countries:
        wanted = [c.upper() for c in cfg.countries]
        unknown = [c for c in wanted if c not in REGISTRY]
        if unknown:
            raise UnknownCountry(f"unknown country code(s): {', '.join(unknown)}")
        codes = [c for c in codes if c in wanted]
    return [panel[c] for c in sorted(codes, key=lambda c: _order_key(c, panel[c]))]


def map_countries(fn: Callable[[CountryDataset], Any], datasets: list[CountryDataset], jobs: int) -> list[Any]:
    """Apply ``fn`` to every dataset; results keep input order."""
    if jobs <= 1 or len(datasets) <= 1:
        return [fn(d) for d in datasets]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, datasets))


def load_validated(cfg: RunConfig) -> dict[str, CountryDataset]:
    if cfg.data is None:
        raise FileNotFoundError("no dataset given (use --data or set NCPC_DATA)")
    path = Path(cfg.data)
    if not path.is_file():
        raise FileNotFoundError(f"dataset not found: {path}")
    return validate_panel(load_panel(path)).panel


@dataclass
class CountryAnalysis:
    code: str
    market_class: MarketClass
    variables: CountryVariables
    reports: dict[Spec, CountryReport | str] = field(default_factory=dict)
    unitroot: dict[tuple[str, str], UnitRootResult | str] = field(default_factory=dict)
    recessions: dict[str, int | None] = field(default_factory=dict)


def _error_text(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def analyze_country(
    d: CountryDataset,
    cfg: RunConfig,
    *,
    estimate: bool = True,
    unitroot: bool = True,
    recessions: bool = True,
) -> CountryAnalysis:
    tcfg = cfg.transform()
    v = derive_variables(d, tcfg)
    out = CountryAnalysis(d.code, d.market_class, v)
    if estimate:
        for spec in cfg.specs:
            try:
                out.reports[spec] = estimate_country(d, spec, tcfg, variables=v)
            except (NCPCError, ValueError, ArithmeticError) as exc:
                out.reports[spec] = _error_text(exc)
    if unitroot:
        sources = {
            "inflation": v.inflation,
            "expected_inflation": v.expected_inflation,
            "unemployment_gap": v.gap,
        }
        for name in UNITROOT_SERIES:
            s = sources[name]
            for test in ("adf", "pp"):
                if s is None:
                    out.unitroot[(test, name)] = "unavailable"
                    continue
                try:
                    if test == "adf":
                        out.unitroot[(test, name)] = adf(s, cfg.max_lag)
                    else:
                        out.unitroot[(test, name)] = pp(s, bandwidth_method=cfg.pp_bandwidth)
                except (NCPCError, ValueError, ArithmeticError) as exc:
                    out.unitroot[(test, name)] = _error_text(exc)
    if recessions:
        r = v.regimes
        for label, window in A1_WINDOWS.items():
            if r is None or not window_has_data(r, window):
                out.recessions[label] = None
            else:
                out.recessions[label] = count_recessions(r, window)
    return out


def run_panel(cfg: RunConfig, panel: Mapping[str, CountryDataset] | None = None, **parts) -> list[CountryAnalysis]:
    panel = load_validated(cfg) if panel is None else panel
    datasets = select_countries(panel, cfg)
    return map_countries(lambda d: analyze_country(d, cfg, **parts), datasets, cfg.jobs)


# -------------------------------------------------------------- commands


def describe_table(analyses: list[CountryAnalysis]) -> Table:
    keys = ["market_class", "code"]
    for v in DESCRIBE_VARIABLES:
        keys += [f"{v}_mean", f"{v}_std"]
    rows = []
    for a in analyses:
        v = a.variables
        sources = {
            "inflation": v.inflation,
            "expected_inflation": v.expected_inflation,
            "inflation_trend": v.inflation_trend,
            "unemployment": v.unemployment,
            "nairu": v.nairu,
            "unemployment_gap": v.gap,
        }
        row: dict[str, Any] = {"market_class": a.market_class.value, "code": a.code}
        for name in DESCRIBE_VARIABLES:
            s = sources[name]
            try:
                mean, std = describe(s) if s is not None else (None, None)
            except ValueError:
                mean, std = None, None
            row[f"{name}_mean"], row[f"{name}_std"] = mean, std
        rows.append(row)
    return Table("table1-overview", "Mean and standard deviation of variables", keys, rows)


def cmd_describe(cfg: RunConfig, panel=None) -> list[Table]:
    return [describe_table(run_panel(cfg, panel, estimate=False, unitroot=False, recessions=False))]


def _estimate_cell(row: dict, term: str) -> str:
    coef = row.get(f"{term}_coef")
    if coef is None:
        return "n/a"
    se = row[f"{term}_se"]
    return f"{coef:.4f}{'*' * row[f'{term}_stars']} ({se:.4f})"


def estimate_tables(analyses: list[CountryAnalysis], specs: tuple[Spec, ...]) -> list[Table]:
    keys = ["market_class", "code", "country", "spec"]
    for t in TERMS:
        keys += [f"{t}_coef", f"{t}_se", f"{t}_stars"]
    keys += ["obs", "error"]
    rows = []
    reports: list[CountryReport] = []
    for a in analyses:
        for spec in specs:
            rep = a.reports.get(spec)
            row: dict[str, Any] = {
                "market_class": a.market_class.value,
                "code": a.code,
                "country": REGISTRY[a.code].name,
                "spec": spec.value,
            }
            if isinstance(rep, CountryReport):
                reports.append(rep)
                for t in TERMS:
                    cell = rep.cell(t)
                    row[f"{t}_coef"] = None if cell is None else cell.coef
                    row[f"{t}_se"] = None if cell is None else cell.se
                    row[f"{t}_stars"] = None if cell is None else int(cell.stars)
                row["obs"] = rep.obs
                row["error"] = None
            else:
                for t in TERMS:
                    row[f"{t}_coef"] = row[f"{t}_se"] = row[f"{t}_stars"] = None
                row["obs"] = None
                row["error"] = rep
            rows.append(row)

    def err_or(fn):
        return lambda r: f"error: {r['error']}" if r.get("error") else fn(r)

    display = [
        ("Class", lambda r: r["market_class"]),
        ("Country", lambda r: r["country"]),
        ("Spec", lambda r: r["spec"]),
        ("N infl", err_or(lambda r: _estimate_cell(r, "tranquil_infl"))),
        ("N gap", err_or(lambda r: _estimate_cell(r, "tranquil_gap"))),
        ("R infl", err_or(lambda r: _estimate_cell(r, "recession_infl"))),
        ("R gap", err_or(lambda r: _estimate_cell(r, "recession_gap"))),
        ("C", err_or(lambda r: _estimate_cell(r, "constant"))),
        ("Obs", lambda r: _fmt_num(r["obs"])),
    ]
    main = Table(
        "table1-regression",
        "Phillips curve in tranquil (N) and recessionary (R) periods, HAC standard errors",
        keys, rows, display,
    )

    agg_rows = []
    for spec in specs:
        for mc in MarketClass:
            for term in ("infl", "gap"):
                for regime in ("tranquil", "recession"):
                    try:
                        value = aggregate_fractions(reports, mc, spec, regime, term=term, significant_only=True)
                    except EmptySelection:
                        value = None
                    agg_rows.append({
                        "market_class": mc.value, "spec": spec.value,
                        "regime": regime, "term": term, "value": value,
                    })
    agg = Table(
        "aggregates",
        "Class averages of significant coefficients",
        ["market_class", "spec", "regime", "term", "value"],
        agg_rows,
    )
    return [main, agg]


def cmd_estimate(cfg: RunConfig, panel=None) -> list[Table]:
    analyses = run_panel(cfg, panel, unitroot=False, recessions=False)
    return estimate_tables(analyses, cfg.specs)


def recession_table(analyses: list[CountryAnalysis]) -> Table:
    keys = ["code", "country", *A1_WINDOWS]
    rows = []
    for a in sorted(analyses, key=lambda a: REGISTRY[a.code].name):
        row = {"code": a.code, "country": REGISTRY[a.code].name}
        row.update(a.recessions)
        rows.append(row)
    display = [("Country", lambda r: r["country"]), ("Code", lambda r: r["code"])]
    display += [(w, (lambda r, w=w: "-" if r[w] is None else str(r[w]))) for w in A1_WINDOWS]
    return Table("appendix-a1", "Recession quarters (non-positive GDP growth)", keys, rows, display)


def cmd_recessions(cfg: RunConfig, panel=None) -> list[Table]:
    return [recession_table(run_panel(cfg, panel, estimate=False, unitroot=False))]


def unitroot_table(analyses: list[CountryAnalysis]) -> Table:
    keys = ["code"]
    for test in ("adf", "pp"):
        for s in UNITROOT_SERIES:
            keys += [f"{test}_{s}_p", f"{test}_{s}_param", f"{test}_{s}_nobs", f"{test}_{s}_stat", f"{test}_{s}_error"]
    rows = []
    for a in sorted(analyses, key=lambda a: a.code):
        row: dict[str, Any] = {"code": a.code}
        for (test, s), res in a.unitroot.items():
            p = f"{test}_{s}"
            if isinstance(res, UnitRootResult):
                row.update({f"{p}_p": res.p_value, f"{p}_param": res.lags_or_bandwidth,
                            f"{p}_nobs": res.nobs, f"{p}_stat": res.statistic, f"{p}_error": None})
            else:
                row.update({f"{p}_p": None, f"{p}_param": None, f"{p}_nobs": None,
                            f"{p}_stat": None, f"{p}_error": res})
        rows.append(row)

    def cell(test, s):
        letter = "L" if test == "adf" else "B"

        def fn(r):
            p = f"{test}_{s}"
            if r.get(f"{p}_error"):
                return f"error: {r[f'{p}_error']}"
            return f"{r[f'{p}_p']:.4f} ({letter}:{r[f'{p}_param']} N:{r[f'{p}_nobs']})"

        return fn

    labels = {"inflation": "CPI", "expected_inflation": "EI", "unemployment_gap": "U_U'"}
    display = [("Code", lambda r: r["code"])]
    display += [(f"{t.upper()} {labels[s]}", cell(t, s)) for t in ("adf", "pp") for s in UNITROOT_SERIES]
    return Table("appendix-a2", "Unit-root tests with intercept (p-values)", keys, rows, display)


def cmd_unitroot(cfg: RunConfig, panel=None) -> list[Table]:
    return [unitroot_table(run_panel(cfg, panel, estimate=False, recessions=False))]


# ------------------------------------------------------- golden and diff


GOLDEN_FILES = {
    "table1-overview": "table1_overview.csv",
    "table1-regression": "table1_regression.csv",
    "appendix-a1": "appendix_a1.csv",
    "appendix-a2": "appendix_a2.csv",
    "aggregates": "aggregates.csv",
}

TOLERANCES = {
    "table1-overview": "abs 0.0005",
    "regression-coef": "abs 0.02",
    "regression-se": "rel 0.30",
    "exact": "exact",
    "unitroot-p": "abs 0.02",
    "aggregates": "abs 0.02",
}


def read_golden(directory: Path | None = None) -> dict[str, list[dict[str, str]]]:
    """Load golden tables from ``directory`` (default: the packaged published tables)."""
    out = {}
    for name, fname in GOLDEN_FILES.items():
        if directory is None:
            ref = resources.files("ncpc") / "golden" / fname
            text = ref.read_text(encoding="utf-8") if ref.is_file() else None
        else:
            p = Path(directory) / fname
            text = p.read_text(encoding="utf-8") if p.is_file() else None
        out[name] = list(csv.DictReader(io.StringIO(text))) if text is not None else []
    return out


def _g(x: float | None, digits: int = 4) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def golden_from_analyses(analyses: list[CountryAnalysis], specs: tuple[Spec, ...]) -> dict[str, list[dict[str, str]]]:
    """Express a run in the golden-table layout (values rounded like the printed tables)."""
    overview = []
    for row in describe_table(analyses).rows:
        rec = {"code": row["code"]}
        for v in DESCRIBE_VARIABLES:
            for stat in ("mean", "std"):
                rec[f"{v}_{stat}"] = _g(row[f"{v}_{stat}"])
        overview.append(rec)
    regression = []
    main, agg = estimate_tables(analyses, specs)
    for row in main.rows:
        if row["error"]:
            continue
        for t in TERMS:
            if row[f"{t}_coef"] is None:
                continue
            regression.append({
                "market_class": row["market_class"], "code": row["code"], "spec": row["spec"],
                "term": t, "coef": _g(row[f"{t}_coef"]), "stars": str(row[f"{t}_stars"]),
                "se": _g(row[f"{t}_se"]), "obs": str(row["obs"]),
            })
    a1 = []
    for row in recession_table(analyses).rows:
        rec = {"code": row["code"], "name": row["country"]}
        rec.update({w: "" if row[w] is None else str(row[w]) for w in A1_WINDOWS})
        a1.append(rec)
    a2 = []
    for a in sorted(analyses, key=lambda a: a.code):
        for test in ("adf", "pp"):
            for s in UNITROOT_SERIES:
                res = a.unitroot.get((test, s))
                if isinstance(res, UnitRootResult):
                    a2.append({"code": a.code, "test": test, "series": s, "p_value": _g(res.p_value),
                               "param": str(res.lags_or_bandwidth), "nobs": str(res.nobs)})
    aggregates = [
        {k: (_g(r[k]) if k == "value" else r[k]) for k in ("market_class", "spec", "regime", "term", "value")}
        for r in agg.rows
        if r["value"] is not None
    ]
    return {
        "table1-overview": overview,
        "table1-regression": regression,
        "appendix-a1": a1,
        "appendix-a2": a2,
        "aggregates": aggregates,
    }


def write_golden(golden: Mapping[str, list[dict[str, str]]], directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, rows in golden.items():
        if not rows:
            continue
        with (directory / GOLDEN_FILES[name]).open("w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)


@dataclass(frozen=True)
class CellDiff:
    table: str
    key: str
    field: str
    got: str
    want: str
    tolerance: str
    passed: bool


def _within(got: str, want: str, tol: str) -> bool:
    if want == "":
        return got == ""
    if got == "":
        return False
    if tol == "exact":
        return float(got) == float(want)
    kind, amount = tol.split()
    g, w = float(got), float(want)
    if kind == "abs":
        return abs(g - w) <= float(amount) + 1e-12
    return abs(g - w) <= float(amount) * abs(w) + 1e-12


def _compare_rows(name, want_rows, got_rows, key_fields, field_tols, diffs):
    got_index = {tuple(r[k] for k in key_fields): r for r in got_rows}
    for w in want_rows:
        key = tuple(w[k] for k in key_fields)
        g = got_index.get(key)
        for fld, tol in field_tols.items():
            if fld not in w:
                continue
            got = "" if g is None else g.get(fld, "")
            if g is None and w[fld] == "":
                got = ""
            diffs.append(CellDiff(name, "/".join(key), fld, got, w[fld], tol,
                                  g is not None and _within(got, w[fld], tol)))


def diff_golden(
    got: Mapping[str, list[dict[str, str]]],
    want: Mapping[str, list[dict[str, str]]],
    codes: set[str],
    specs: tuple[Spec, ...] = (Spec.BACKWARD, Spec.FORWARD),
    tables: tuple[str, ...] = tuple(GOLDEN_FILES),
) -> list[CellDiff]:
    """Compare ``got`` with ``want`` for the countries in ``codes``."""
    diffs: list[CellDiff] = []
    spec_values = {s.value for s in specs}

    def keep(rows):
        return [r for r in rows if r["code"] in codes and r.get("spec", None) in (None, *spec_values)]

    if "table1-overview" in tables:
        fields = [k for k in (want["table1-overview"][0] if want["table1-overview"] else {}) if k != "code"]
        _compare_rows("table1-overview", keep(want["table1-overview"]), got["table1-overview"],
                      ["code"], {f: TOLERANCES["table1-overview"] for f in fields}, diffs)
    if "table1-regression" in tables:
        _compare_rows("table1-regression", keep(want["table1-regression"]), got["table1-regression"],
                      ["code", "spec", "term"],
                      {"coef": TOLERANCES["regression-coef"], "se": TOLERANCES["regression-se"],
                       "obs": TOLERANCES["exact"]}, diffs)
    if "appendix-a1" in tables:
        _compare_rows("appendix-a1", keep(want["appendix-a1"]), got["appendix-a1"], ["code"],
                      {w: TOLERANCES["exact"] for w in A1_WINDOWS}, diffs)
    if "appendix-a2" in tables:
        _compare_rows("appendix-a2", keep(want["appendix-a2"]), got["appendix-a2"],
                      ["code", "test", "series"],
                      {"p_value": TOLERANCES["unitroot-p"], "param": TOLERANCES["exact"],
                       "nobs": TOLERANCES["exact"]}, diffs)
    if "aggregates" in tables and codes >= set(REGISTRY):
        want_agg = [r for r in want["aggregates"] if r["spec"] in spec_values]
        _compare_rows("aggregates", want_agg, got["aggregates"],
                      ["market_class", "spec", "regime", "term"], {"value": TOLERANCES["aggregates"]}, diffs)
    return diffs


def diff_table(diffs: list[CellDiff]) -> Table:
    rows = [
        {"status": "PASS" if d.passed else "FAIL", "table": d.table, "key": d.key, "field": d.field,
         "got": d.got, "want": d.want, "tolerance": d.tolerance}
        for d in diffs
    ]
    return Table("replicate", "Replication diff", ["status", "table", "key", "field", "got", "want", "tolerance"], rows)


def cmd_replicate(cfg: RunConfig, panel=None) -> tuple[list[Table], bool]:
    """Run every table, diff against golden values; returns tables and overall pass flag."""
    panel = load_validated(cfg) if panel is None else panel
    analyses = run_panel(cfg, panel)
    got = golden_from_analyses(analyses, cfg.specs)
    want = read_golden(cfg.golden)
    diffs = diff_golden(got, want, {a.code for a in analyses}, cfg.specs)
    ok = all(d.passed for d in diffs)
    return [diff_table(diffs)], ok
