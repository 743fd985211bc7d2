import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion(capsys):
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def check(number, title, ok, detail):
        line = f"[acceptance {number:>2}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _ACCEPTANCE.append((number, line))
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
