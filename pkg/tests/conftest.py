import sys
from pathlib import Path

# oracle.py and strategies.py live next to the tests
sys.path.insert(0, str(Path(__file__).parent))

_criteria = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, value in report.user_properties:
        if key == "criterion":
            _criteria.append(f"{'PASS' if report.passed else 'FAIL'}  {value}")


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria, key=lambda s: int(s.split()[1].rstrip("."))):
            terminalreporter.write_line(line)
