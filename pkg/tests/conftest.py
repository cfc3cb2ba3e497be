import re

_TITLES = {}
_OUTCOMES = {}
_PATTERN = re.compile(r"test_criterion_(\d+)")


def _criterion(nodeid):
    m = _PATTERN.search(nodeid)
    return int(m.group(1)) if m else None


def pytest_collection_modifyitems(items):
    for item in items:
        num = _criterion(item.nodeid)
        if num is not None:
            doc = (getattr(item, "function", None).__doc__ or "").strip().splitlines()
            _TITLES[num] = doc[0] if doc else item.name


def pytest_runtest_logreport(report):
    num = _criterion(report.nodeid)
    if num is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _OUTCOMES.get(num, "passed")
        _OUTCOMES[num] = report.outcome if prev == "passed" else prev


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_OUTCOMES):
        verdict = "PASS" if _OUTCOMES[num] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {_TITLES.get(num, '')}")
