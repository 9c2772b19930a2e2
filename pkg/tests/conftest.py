import re

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_ac(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        detail = dict(report.user_properties).get("measured", "")
        _ACCEPTANCE[int(m.group(1))] = (report.outcome, m.group(2).replace("_", " "), detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        outcome, name, detail = _ACCEPTANCE[k]
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"AC{k} {mark}  {name}: {detail}")
