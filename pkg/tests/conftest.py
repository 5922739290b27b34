"""Prints one PASS/FAIL line per acceptance criterion after the run.

Acceptance tests carry ``@pytest.mark.criterion("id", "summary")`` and may
attach a measured value with ``record_property("detail", text)``.
"""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, summary): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        cid, summary = marker.args
        detail = dict(item.user_properties).get("detail", "")
        _RESULTS[cid] = (report.passed, summary, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)):
        passed, summary, detail = _RESULTS[cid]
        line = f"[{'PASS' if passed else 'FAIL'}] {cid:<4} {summary}"
        if detail:
            line += f" :: {detail}"
        tr.write_line(line)
