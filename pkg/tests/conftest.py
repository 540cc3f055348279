import pytest

_ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def _word(ok):
    return "SKIP" if ok is None else ("PASS" if ok else "FAIL")


@pytest.fixture
def criterion():
    """Record an acceptance outcome: ``criterion(n, ok, detail)``; ``ok=None`` is a skip."""

    def record(n: int, ok, detail: str = ""):
        ok = None if ok is None else bool(ok)
        _ACCEPTANCE.setdefault(n, []).append((ok, detail))
        print(f"AC{n:<2d} {_word(ok)}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[n]
        flags = [p for p, _ in parts if p is not None]
        ok = all(flags) if flags else None
        detail = "; ".join(d for _, d in parts if d)
        terminalreporter.write_line(f"AC{n:<2d} {_word(ok)}  {detail}")
