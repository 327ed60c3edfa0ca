import pytest

from leonetsim import kernels

BACKEND_NAMES = sorted(kernels.BACKENDS)

_ACCEPTANCE = {}


@pytest.fixture(params=BACKEND_NAMES, scope="session")
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line, flush=True)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
