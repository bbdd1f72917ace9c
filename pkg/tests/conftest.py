import pytest

from traded_control.config import parse_config


@pytest.fixture
def ideal_sensors():
    """Config overrides for noise-free, offset-free sensors."""
    return {
        "radar": {"kind": "radar", "noise_std": 0.0, "offset": 0.0, "meas_var": 0.25},
        "lidar": {"kind": "lidar", "noise_std": 0.0, "offset": 0.0, "meas_var": 0.04},
    }


@pytest.fixture
def clear_config(ideal_sensors):
    return parse_config({**ideal_sensors, "fog": {"windows": []}})


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok in results:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
