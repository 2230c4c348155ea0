import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        n = marker.args[0]
        detail = dict(report.user_properties).get("measured", "")
        state = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        prev = _CRITERIA.get(n)
        # a criterion with several tests fails if any of them fails
        if prev is None or prev[0] == "PASS":
            _CRITERIA[n] = (state, item.name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        state, name, detail = _CRITERIA[n]
        line = f"criterion {n:2d}: {state}  {name}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
