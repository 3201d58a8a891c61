"""Phillips-curve estimation across tranquil and recessionary regimes.

Quarterly series transforms, HP trend extraction, a recession dummy, OLS
with Newey-West standard errors, ADF/PP unit-root tests and a CLI that
renders the descriptive, regression, recession-count and unit-root tables.
"""
from .estimate import (
    CombinedCoefficient,
    CountryReport,
    Estimate,
    ModelFrame,
    NCPCRegressor,
    RegressionResult,
    Spec,
    Stars,
    TransformConfig,
    aggregate_fractions,
    build_frame,
    combine,
    default_bandwidth,
    derive_variables,
    estimate_country,
    newey_west,
    ols,
    stars,
)
from .ingest import REGISTRY, load_panel, validate_panel, write_panel
from .regime import RegimeSeries, count_recessions, recession_dummy
from .series import (
    CountryDataset,
    MarketClass,
    Quarter,
    QuarterlySeries,
    describe,
    first_diff,
    inflation_proxy,
    lag,
    shifted_log,
)
from .trend import GapMode, HPFilter, TrendDecomposition, hp_filter, nairu, ravn_uhlig_lambda, unemployment_gap
from .unitroot import UnitRootResult, adf, mackinnon_p, pp, sic

__version__ = "0.1.0"
