"""Shared pytest plumbing: collects the acceptance-criterion result lines
and prints them in a dedicated terminal section, where pytest's output
capture cannot swallow them."""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
