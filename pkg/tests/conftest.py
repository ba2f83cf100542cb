def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, lines in sorted(REPORT):
        terminalreporter.write_line(f"AC{number:<3d}{'PASS' if passed else 'FAIL'}")
        for line in lines:
            terminalreporter.write_line(f"       {line}")
