import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

# one shared core makes per-example timings too noisy for a deadline
settings.register_profile("default", deadline=None)
settings.load_profile("default")

_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(name)
        if prev is None or prev[0] == "passed":
            _ACCEPTANCE[name] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[2])):
        outcome, dur = _ACCEPTANCE[name]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  ({dur:.1f}s)")
