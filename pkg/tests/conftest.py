"""Per-criterion PASS/FAIL summary for the acceptance suite."""

from collections import OrderedDict

import pytest

_RESULTS = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = tuple(marker.args)


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker
    entry = _RESULTS.setdefault(number, {"title": title, "failed": [], "ran": 0})
    if report.when == "call":
        entry["ran"] += 1
    if report.failed or (report.when == "call" and report.skipped):
        entry["failed"].append(report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "FAIL" if entry["failed"] or not entry["ran"] else "PASS"
        line = f"criterion {number:2d}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  [failing: {', '.join(entry['failed'])}]"
        terminalreporter.write_line(line)
