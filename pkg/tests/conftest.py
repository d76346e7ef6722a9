import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m or (report.when != "call" and report.passed):
        return
    num = int(m.group(1))
    detail = dict(report.user_properties).get("detail", "")
    prev = _CRITERIA.get(num)
    status = "PASS" if report.passed else "FAIL"
    if prev is None or status == "FAIL":
        _CRITERIA[num] = (status, detail or (prev[1] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        status, detail = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num}: {status}  {detail}")
