import re

_verdicts: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        name = report.nodeid.split("::")[-1]
        _verdicts[name] = _verdicts.get(name, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    by_criterion: dict[int, list[tuple[str, bool]]] = {}
    for name, ok in _verdicts.items():
        match = re.match(r"test_criterion_(\d+)_(.*)", name)
        if match:
            by_criterion.setdefault(int(match[1]), []).append((match[2], ok))
    for num in sorted(by_criterion):
        cases = by_criterion[num]
        ok = all(passed for _, passed in cases)
        label = cases[0][0].split("[")[0].replace("_", " ")
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num}: {label}"
                                    f" ({sum(p for _, p in cases)}/{len(cases)} cases)")
