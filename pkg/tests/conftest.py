from fractions import Fraction as F

import pytest
from hypothesis import strategies as st

from pslab.cultures import CultureConfig, gen_ic, random_utilities
from pslab.model import Instance, as_utilities

EXAMPLE = ((0, 1, 2), (1, 0, 2), (1, 2, 0))


@pytest.fixture
def example():
    return Instance.from_orders(EXAMPLE)


@pytest.fixture
def example_utilities():
    return as_utilities([[7, 6, 0], [2, 3, 1], [1, 3, 2]])


@st.composite
def instances(draw, max_n=5, max_m=5, min_n=1, min_m=1):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(min_m, max_m))
    orders = [tuple(draw(st.permutations(range(m)))) for _ in range(n)]
    return Instance(n, m, tuple(orders))


@st.composite
def consistent_utilities(draw, instance):
    rows = []
    for order in instance.profile:
        vals = sorted(draw(st.lists(st.integers(0, 50), min_size=instance.m, max_size=instance.m, unique=True)),
                      reverse=True)
        row = [F(0)] * instance.m
        for rank, h in enumerate(order):
            row[h] = F(vals[rank])
        rows.append(tuple(row))
    return tuple(rows)


def corpus(sizes, per_size=3, seed=1000):
    """Deterministic IC instances with Random utilities for cross-checks."""
    out = []
    for n, m in sizes:
        for k in range(per_size):
            s = seed + 97 * n + 13 * m + k
            inst = gen_ic(CultureConfig("IC", n, m, s))
            out.append((inst, random_utilities(inst, s + 1)))
    return out


def pytest_terminal_summary(terminalreporter):
    import sys
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(acceptance.LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
