import pytest

from barw.spectrum import enumerate_spectrum


@pytest.fixture(scope="session")
def spectra():
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = enumerate_spectrum(n)
        return cache[n]

    return get


_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def emit(tag: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {tag}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
