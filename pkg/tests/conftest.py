import os
from datetime import date, timedelta

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def daily(n, start=date(2018, 1, 1), step=1):
    return [start + timedelta(days=step * i) for i in range(n)]


@pytest.fixture
def fixtures_dir():
    from pathlib import Path
    return Path(__file__).parent / "fixtures"


# --- acceptance reporting --------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


class Criterion:
    """Time a criterion body, enforce its limit and record one result line."""

    def __init__(self, number, title, limit=None):
        self.number, self.title, self.limit = number, title, limit
        self.notes = []

    def note(self, text):
        self.notes.append(str(text))

    def __enter__(self):
        import time
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        import time
        elapsed = time.perf_counter() - self._t0
        over = self.limit is not None and elapsed > self.limit
        ok = exc_type is None and not over
        timing = f"{elapsed:.2f}s" + (f" (limit {self.limit:g}s)" if self.limit else "")
        detail = "; ".join(self.notes)
        if exc_type is not None:
            detail = (detail + "; " if detail else "") + f"{exc_type.__name__}: {exc}".splitlines()[0]
        ACCEPTANCE[self.number] = ("PASS" if ok else "FAIL", f"{self.title} [{timing}]", detail)
        line = f"AC{self.number:02d} {'PASS' if ok else 'FAIL'} {self.title} [{timing}] {detail}"
        print(line)
        if exc_type is None and over:
            raise AssertionError(f"criterion {self.number} exceeded {self.limit}s: {elapsed:.2f}s")
        return False


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"AC{n:02d} {status} {title}" + (f"  {detail}" if detail else ""))
