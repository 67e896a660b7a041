import pytest


def pytest_configure(config):
    config.acceptance_results = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL verdict per numbered criterion."""
    results = request.config.acceptance_results

    def record(number, passed, detail):
        line = f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {detail}"
        results[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "acceptance_results", {})
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
