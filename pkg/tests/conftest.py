"""Shared test helpers and the acceptance line reporter."""

acceptance_lines: list[str] = []


def record_acceptance(line: str):
    acceptance_lines.append(line)
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
