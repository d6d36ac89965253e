import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pslab.model import PSLabError, borda_utilities, Instance
from pslab.threat import check_threat_guarantees, threat_profile


def test_worked_example():
    assert threat_profile((0, 1, 2), (1, 2, 0)) == ((0, 1, 2), (1, 0, 2))


def test_identical_orders_are_reported_truthfully():
    assert threat_profile((2, 0, 1, 3), (2, 0, 1, 3)) == ((2, 0, 1, 3), (2, 0, 1, 3))


def test_opposite_orders():
    q1, q2 = threat_profile((0, 1, 2, 3), (3, 2, 1, 0))
    assert q1 == (0, 3, 1, 2) and q2 == (3, 0, 2, 1)


def test_rejects_mismatched_orders():
    with pytest.raises(PSLabError):
        threat_profile((0, 1), (0, 2))


def test_borda_guarantees_on_example():
    inst = Instance.from_orders([(0, 1, 2), (1, 2, 0)])
    assert check_threat_guarantees((0, 1, 2), (1, 2, 0), [borda_utilities(inst)]).ok


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(lambda m: st.tuples(st.permutations(range(m)), st.permutations(range(m)))))
def test_outputs_are_permutations_and_guarantees_hold(pair):
    o1, o2 = map(tuple, pair)
    q1, q2 = threat_profile(o1, o2)
    assert sorted(q1) == sorted(q2) == sorted(o1)
    report = check_threat_guarantees(o1, o2, [borda_utilities(Instance.from_orders([o1, o2]))])
    assert report.falsified == []


@pytest.mark.parametrize("m", [5, 50, 500, 5000])
def test_linear_operation_count(m):
    rng = random.Random(m)
    o1, o2 = list(range(m)), list(range(m))
    rng.shuffle(o1)
    rng.shuffle(o2)
    counter = [0]
    threat_profile(o1, o2, counter)
    assert counter[0] <= 7 * m
