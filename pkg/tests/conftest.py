import sys

_ran = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _ran[report.nodeid.rsplit("::", 1)[-1]] = report.passed


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not _ran:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    lines = {}
    for name, passed in _ran.items():
        num = mod.CRITERIA.get(name)
        if num in mod.RESULTS:
            label, ok, detail = mod.RESULTS[num]
            lines[num] = (f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {label}", f"    {detail}")
        elif num is not None:
            lines[num] = (f"criterion {num:2d}: {'PASS' if passed else 'FAIL'}  {name} (no report)",)
    for num in sorted(lines):
        for ln in lines[num]:
            tr.write_line(ln)
