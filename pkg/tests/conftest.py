from pathlib import Path

import pytest

from hsrbeam.antenna import default_panels
from hsrbeam.geometry import ScenarioConfig
from hsrbeam.link import LinkModel

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def cfg():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def panels(cfg):
    return default_panels(cfg)


@pytest.fixture(scope="session")
def model(cfg, panels):
    return LinkModel(cfg, panels)


@pytest.fixture(scope="session")
def golden_path():
    return DATA / "oracle_golden_1deg.csv"


_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    n, title = marker.args
    if rep.when == "setup" and rep.passed:
        return
    details = getattr(item.module, "DETAILS", {}).get(n, "")
    status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
    _CRITERIA[n] = (f"{status}  {title}", details)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        line, details = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {line}" + (f"  [{details}]" if details else ""))
