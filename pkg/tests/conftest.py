"""Shared test plumbing.

The acceptance tests register their one-line verdicts here so the
summary block at the end of a pytest run shows them even when stdout
capture is on.
"""

acceptance_lines = []


def record_acceptance(line: str):
    acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
