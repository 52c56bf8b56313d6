"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_OUTCOMES: dict[int, list[tuple[str, str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if report.skipped:
            reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
            status, detail = "SKIP", reason.removeprefix("Skipped: ")
        else:
            status = "PASS" if report.passed else "FAIL"
            detail = "; ".join(v for k, v in item.user_properties if k == "measured")
        _OUTCOMES.setdefault(number, []).append((status, title, detail))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        for status, title, detail in _OUTCOMES[number]:
            line = f"criterion {number:>2} {status}: {title}"
            terminalreporter.write_line(f"{line} [{detail}]" if detail else line)
