def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance-criteria gate (slow)")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (isinstance(k, str), str(k).zfill(3))):
        terminalreporter.write_line(RESULTS[key][1])
