"""Shared test plumbing: uncaptured reporting of acceptance verdicts."""

ACCEPTANCE_VERDICTS: list[tuple[int, str]] = []


def record_verdict(num: int, ok: bool, desc: str) -> None:
    ACCEPTANCE_VERDICTS.append((num, f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {desc}"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_VERDICTS):
        terminalreporter.write_line(line)
