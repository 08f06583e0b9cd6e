import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def rel_err(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    return float(np.linalg.norm(a - b)) / scale if scale > 0 else 0.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


#: one (criterion, status, detail, seconds) row per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[tuple[int, str, str, float]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, status, detail, seconds in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num}: {status} ({seconds:.2f} s) {detail}")
