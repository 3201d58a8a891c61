import os
from pathlib import Path

import numpy as np
import pytest

from ncpc.ingest import load_panel, validate_panel
from ncpc.series import CountryDataset, MarketClass, Quarter, QuarterlySeries

DATA_DIR = Path(__file__).parent / "data"
FIXTURE_PANEL = DATA_DIR / "fixture_panel.csv"
FIXTURE_GOLDEN = DATA_DIR / "fixture_golden"


@pytest.fixture(scope="session")
def fixture_path():
    return FIXTURE_PANEL


@pytest.fixture(scope="session")
def fixture_panel():
    return validate_panel(load_panel(FIXTURE_PANEL)).panel


@pytest.fixture(scope="session")
def published_panel():
    """The published deposit converted to the panel schema, if $NCPC_DATA points at it."""
    path = os.environ.get("NCPC_DATA")
    if not path or not Path(path).is_file():
        pytest.skip("published dataset not available (set NCPC_DATA)")
    return validate_panel(load_panel(path)).panel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(code, cpi, expected_cpi, unemployment, gdp, start=Quarter(1980, 1), mc=MarketClass.DEVELOPED):
    def s(name, v):
        return QuarterlySeries(code, name, start, v)

    return CountryDataset(
        code, mc, s("cpi", cpi), s("expected_cpi", expected_cpi), s("unemployment", unemployment), s("gdp", gdp)
    )


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_runtest_makereport(item, call):
    crit = item.get_closest_marker("criterion")
    if crit is None or call.when != "call" and not (call.when == "setup" and call.excinfo is not None):
        return
    label = crit.args[0]
    if call.excinfo is None:
        status = "PASS"
    elif call.excinfo.errisinstance(pytest.skip.Exception):
        status = "SKIP"
    else:
        status = "FAIL"
    detail = getattr(item, "criterion_detail", "")
    ACCEPTANCE_LINES[label] = f"{status}  {label}" + (f"  [{detail}]" if detail else "")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_LINES, key=lambda s: (s[0], int(s[1:].split()[0]) if s[1:].split()[0].isdigit() else 0, s)):
        terminalreporter.write_line(ACCEPTANCE_LINES[label])
