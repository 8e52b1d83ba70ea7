import time
from contextlib import contextmanager

import pytest

ACCEPTANCE: dict = {}


class Criterion:
    def __init__(self, number: int, title: str, limit: float):
        self.number = number
        self.title = title
        self.limit = limit
        self.notes: list = []

    def note(self, text: str) -> None:
        self.notes.append(text)


@pytest.fixture
def criterion():
    """Context manager recording one acceptance line, including the runtime cap."""

    @contextmanager
    def run(number: int, title: str, limit: float):
        c = Criterion(number, title, limit)
        start = time.perf_counter()
        ok = False
        try:
            yield c
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            in_time = elapsed < limit
            status = "PASS" if ok and in_time else "FAIL"
            extra = "" if in_time else f" (over the {limit:g} s cap)"
            detail = "; ".join(c.notes)
            line = f"{status}  [{number:2d}] {title}: {elapsed:.1f} s{extra}" + (f"  -- {detail}" if detail else "")
            ACCEPTANCE[number] = line
            print(line)
        assert in_time, f"criterion {number} took {elapsed:.1f} s, cap {limit:g} s"

    return run


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
    passed = sum(line.startswith("PASS") for line in ACCEPTANCE.values())
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE)} criteria passed")
