from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "polywell", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("polywell")

small_ints = st.integers(min_value=-3, max_value=3)
rationals = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 6))


@st.composite
def int_matrices(draw, max_rows=4, max_cols=4, min_rows=1, min_cols=1, entries=small_ints):
    m = draw(st.integers(min_rows, max_rows))
    n = draw(st.integers(min_cols, max_cols))
    return [[Fraction(draw(entries)) for _ in range(n)] for _ in range(m)]


@st.composite
def rational_matrices(draw, max_rows=4, max_cols=4):
    m = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    return [[draw(rationals) for _ in range(n)] for _ in range(m)]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Print and record one acceptance line, then return ``ok``."""

    def record(k: int, ok: bool, detail: str) -> bool:
        line = f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
