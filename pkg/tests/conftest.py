"""Shared pytest plumbing: the acceptance battery reports one line per
criterion at the end of the run, whether or not output capture is on."""

ACCEPTANCE_LINES = []


def record_criterion(number, name, ok, target, observed):
    """Register a criterion outcome and return the formatted line."""
    status = "PASS" if ok else "FAIL"
    line = (f"[criterion {number}] {name}: {status} "
            f"target={target} observed={observed}")
    ACCEPTANCE_LINES.append((number, line))
    return line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(line)
