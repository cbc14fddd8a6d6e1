import support


def pytest_terminal_summary(terminalreporter):
    if not support.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in support.LINES:
        terminalreporter.write_line(line)
