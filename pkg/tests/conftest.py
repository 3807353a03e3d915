import pytest

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance_line(request):
    """Record one ``PASS``/``FAIL`` line for the terminal summary."""
    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
        request.config.stash[ACCEPTANCE].append((number, line))
        print(line)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda t: t[0]):
        terminalreporter.write_line(line)
