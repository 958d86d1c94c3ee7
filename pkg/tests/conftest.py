"""Shared pytest hooks for the suite.

The acceptance tests announce each criterion through record_criterion; the
collected lines are echoed in a terminal section after the run, where
pytest's output capture cannot swallow them.
"""

ACCEPTANCE_LINES = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
