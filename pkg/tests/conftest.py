import pytest


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line straight to the terminal, then assert."""

    def _report(tag, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{tag}] {detail}")
        assert ok, detail

    return _report
