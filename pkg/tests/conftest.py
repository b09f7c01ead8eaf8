import pytest


@pytest.fixture
def criterion(request, capsys):
    """Call criterion(n, title, ok, detail) once per acceptance criterion.

    Writes a PASS/FAIL line to the terminal (bypassing capture) and fails the
    test if ok is false.
    """

    def emit(n: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title}" + (f" ({detail})" if detail else "")
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit
