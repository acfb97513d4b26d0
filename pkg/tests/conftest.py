def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance report lines after the normal summary."""
    try:
        from test_acceptance import REPORT_LINES
    except ImportError:
        return
    if REPORT_LINES:
        terminalreporter.section("acceptance report")
        for line in sorted(REPORT_LINES):
            terminalreporter.write_line(line)
