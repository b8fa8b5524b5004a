"""Shared pytest hooks: a one-line verdict per acceptance criterion."""

_CRITERIA = []


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA.append((props["criterion"], report.outcome, props.get("measured", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, measured in sorted(_CRITERIA):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{verdict}] {name}"
        if measured:
            line += f"  ({measured})"
        terminalreporter.write_line(line)
