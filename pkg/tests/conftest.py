import numpy as np
import pytest

from condkrig import TrainingSet

UNIT2 = [[0.0, 1.0], [0.0, 1.0]]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit_training(points, values=None):
    points = np.asarray(points, dtype=float)
    if values is None:
        values = np.arange(len(points), dtype=float)
    return TrainingSet(points, values, UNIT2)


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "failed": [], "ran": 0})
    if call.when == "call":
        entry["ran"] += 1
    if call.excinfo is not None:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "FAIL" if e["failed"] else "PASS"
        detail = f"  ({', '.join(e['failed'])})" if e["failed"] else ""
        terminalreporter.write_line(f"[{status}] {number:2d}. {e['title']}{detail}")
