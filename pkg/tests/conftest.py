import acceptance_report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = acceptance_report.summary_lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
