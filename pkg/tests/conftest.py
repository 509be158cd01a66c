from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

# Reference calibrations on best-level spreads: (xi1, kappa0, kappa1), relative spread units of 1e-3.
REL_SPREAD_PARAMS = {
    "AAPL": (0.11, 0.23, 0.16),
    "AMZN": (0.32, 0.48, 0.27),
    "GOOG": (0.41, 0.33, 0.21),
    "INTC": (0.42, 0.55, 0.07),
    "MSFT": (0.26, 0.32, 0.016),
    "GAZP": (0.02, 0.35, 0.17),
}

# Reference calibrations on daily relative hi-low: (xi1, kappa0, kappa1), percent.
HILO_PARAMS = {
    "AAPL": (1.75, 1.31, 0.51),
    "AMZN": (1.53, 1.49, 0.45),
    "GOOG": (1.24, 1.02, 0.34),
    "INTC": (1.39, 1.11, 0.31),
    "MSFT": (1.31, 1.10, 0.39),
    "GAZP": (1.73, 1.30, 0.35),
}


@pytest.fixture
def data_dir():
    return DATA


# criterion number -> (passed, title, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
