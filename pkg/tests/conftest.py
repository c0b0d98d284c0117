def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for item in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[item])
