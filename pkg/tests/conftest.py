"""Shared pytest plumbing: a registry for acceptance-criterion results.

test_acceptance.py records one (number, title, status, seconds) tuple per
criterion; the terminal-summary hook prints them as a compact scoreboard at
the end of the run, one line per criterion.
"""

CRITERION_RESULTS = []


def record_criterion(number: int, title: str, status: str, seconds: float):
    CRITERION_RESULTS.append((number, title, status, seconds))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, seconds in sorted(CRITERION_RESULTS):
        terminalreporter.write_line(
            f"[{number:>2}] {status:<4} {title} ({seconds:.2f}s)")
