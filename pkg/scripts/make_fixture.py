"""Regenerate the synthetic test panel and its golden tables.

    python scripts/make_fixture.py

Writes tests/data/fixture_panel.csv (3 countries x 60 quarters) and
tests/data/fixture_golden/*.csv produced by running the pipeline on it.
"""
import csv
from pathlib import Path

import numpy as np

from ncpc.pipeline import RunConfig, golden_from_analyses, run_panel, write_golden
from ncpc.series import Quarter

ROOT = Path(__file__).resolve().parents[1]
OUT = ROOT / "tests" / "data"
START = Quarter(2001, 1)
N = 60

# code, seed, mean inflation, persistence, Phillips slope, unemployment level, recession share
COUNTRIES = [
    ("AU", 11, 0.006, 0.55, -0.12, 0.060, 0.15),
    ("BR", 12, 0.015, 0.65, -0.05, 0.100, 0.25),
    ("AG", 13, 0.020, 0.70, 0.02, 0.120, 0.30),
]


def simulate(seed, mu, rho, slope, u_level, rec_share):
    rng = np.random.default_rng(seed)
    t = np.arange(N + 1)
    u_cycle = np.zeros(N + 1)
    for i in range(1, N + 1):
        u_cycle[i] = 0.8 * u_cycle[i - 1] + rng.normal(scale=0.003)
    u = u_level + 0.01 * np.sin(t / 15.0) + u_cycle
    infl = np.zeros(N + 1)
    infl[0] = mu
    for i in range(1, N + 1):
        infl[i] = (1 - rho) * mu + rho * infl[i - 1] + slope * u_cycle[i] + rng.normal(scale=0.002)
    cpi = 100.0 * np.exp(np.cumsum(infl))
    expected = infl + rng.normal(scale=0.001, size=N + 1)
    exp_cpi = 100.0 * np.exp(np.cumsum(expected))
    growth = np.where(rng.random(N + 1) < rec_share, -np.abs(rng.normal(0.004, 0.003, N + 1)),
                      np.abs(rng.normal(0.007, 0.003, N + 1)))
    gdp = 1000.0 * np.exp(np.cumsum(growth))
    # first row is a pre-sample quarter so lagged inflation exists from START
    return cpi[1:], exp_cpi[1:], u[1:], gdp[1:]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    panel_path = OUT / "fixture_panel.csv"
    with panel_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "date", "cpi", "expected_cpi", "unemployment", "gdp"])
        for code, *params in COUNTRIES:
            cpi, exp_cpi, u, gdp = simulate(*params)
            for i in range(N):
                w.writerow([code, str(START + i), f"{cpi[i]:.6f}", f"{exp_cpi[i]:.6f}",
                            f"{u[i]:.6f}", f"{gdp[i]:.4f}"])
    cfg = RunConfig(data=panel_path, jobs=1)
    analyses = run_panel(cfg)
    write_golden(golden_from_analyses(analyses, cfg.specs), OUT / "fixture_golden")
    print(f"wrote {panel_path} and golden tables")


if __name__ == "__main__":
    main()
