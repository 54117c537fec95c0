from __future__ import annotations

from pathlib import Path

import pytest

from lpplkit.reference import DJIA_2009_2016
from lpplkit.series import read_csv
from lpplkit.synth import SynthSpec, generate

DATA = Path(__file__).parent / "data"
DJIA_CSV = DATA / "djia_1933_2016.csv"

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def djia():
    return read_csv(DJIA_CSV)


def weekly_spec(sigma: float = 0.0, seed: int = 0) -> SynthSpec:
    # 7 * 365 / 7 = 365 steps of exactly one week
    return SynthSpec(DJIA_2009_2016, 2009.25, 2016.25, 366, "uniform", sigma, seed)


@pytest.fixture(scope="session")
def weekly_series():
    return generate(weekly_spec())
