"""Shared pytest plumbing: acceptance-check reporting.

Acceptance tests register their results here; the collected pass/fail
lines are printed after the terminal summary, one line per criterion, so
they are visible regardless of output capturing.
"""

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, result in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{label}  {result.line()}")
