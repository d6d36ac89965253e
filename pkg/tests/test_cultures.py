from fractions import Fraction as F

import pytest

import distributions
from pslab.cultures import (
    CultureConfig, derive_seed, gen_ic, gen_random_utilities, generate, is_single_peaked, kendall_tau,
    mallows_probability, all_orders, random_utilities, urn_increment, MODELS,
)
from pslab.model import PSLabError, check_utilities


def test_ic_golden():
    assert gen_ic(CultureConfig("IC", 2, 3, 42)).profile == ((2, 1, 0), (2, 0, 1))


def test_random_utilities_golden():
    assert gen_random_utilities((2, 0, 1), 42) == (
        F(6971176343755556, 6219268147853367),
        F(1317688518485525, 2073089382617789),
        F(7733562544347970, 6219268147853367),
    )


@pytest.mark.parametrize("model", MODELS)
def test_generators_are_deterministic(model):
    cfg = CultureConfig(model, 5, 4, 123)
    assert generate(cfg) == generate(cfg)
    assert generate(cfg) != generate(CultureConfig(model, 5, 4, 124))


def test_derived_seeds_differ():
    seeds = {derive_seed(7, a, b) for a in range(5) for b in range(5)}
    assert len(seeds) == 25
    assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)


def test_config_validation():
    with pytest.raises(PSLabError):
        CultureConfig("Foo", 2, 2, 1)
    with pytest.raises(PSLabError):
        CultureConfig("Mallows", 2, 2, 1, phi=0)
    with pytest.raises(PSLabError):
        CultureConfig("IC", 2, 2, -1)
    with pytest.raises(PSLabError):
        CultureConfig("Mallows", 2, 3, 1, reference=(0, 1))


def test_utilities_are_consistent_and_sum_to_m():
    for seed in range(50):
        inst = gen_ic(CultureConfig("IC", 3, 4, seed))
        u = random_utilities(inst, seed)
        check_utilities(u, inst)
        assert all(sum(row) == 4 and min(row) > 0 for row in u)


def test_single_peaked_predicate():
    assert is_single_peaked((2, 1, 3, 0, 4))
    assert not is_single_peaked((0, 2, 1))
    assert sum(map(is_single_peaked, all_orders(4))) == 8


def test_mallows_probabilities_sum_to_one():
    ref = (0, 1, 2, 3)
    assert sum(mallows_probability(o, ref, F(1, 2)) for o in all_orders(4)) == 1
    # phi = 1 is uniform
    assert mallows_probability((3, 2, 1, 0), ref, F(1)) == F(1, 24)
    assert kendall_tau((3, 2, 1, 0), ref) == 6


def test_urn_increment():
    assert urn_increment(3) == 4
    assert F(1 + urn_increment(3), 6 + urn_increment(3)) == F(1, 2)


def test_ic_frequencies():
    assert distributions.ic_frequencies_ok()


def test_mallows_frequencies():
    assert distributions.mallows_frequencies_ok()


def test_urn_match_probability():
    assert distributions.urn_match_ok()


def test_sp_ic_single_peaked():
    assert distributions.sp_ic_ok()


@pytest.mark.parametrize("model", MODELS)
def test_one_house(model):
    assert generate(CultureConfig(model, 3, 1, 5)).profile == ((0,),) * 3
    assert gen_random_utilities((0,), 5) == (1,)


def test_single_peaked_support():
    assert {generate(CultureConfig("SP-IC", 1, 2, s)).profile[0] for s in range(40)} == {(0, 1), (1, 0)}
    orders = {generate(CultureConfig("SP-IC", 1, 3, s)).profile[0] for s in range(200)}
    assert len(orders) == 4 and (0, 2, 1) not in orders and (2, 0, 1) not in orders


def test_mallows_limits():
    inst = generate(CultureConfig("Mallows", 50, 4, 3, phi=1e-9, reference=(2, 0, 3, 1)))
    assert set(inst.profile) == {(2, 0, 3, 1)}
    assert mallows_probability((0, 1, 2), (0, 1, 2), F(1, 2)) == F(8, 21)


def test_uniform_mallows_frequencies():
    assert distributions.mallows_frequencies_ok(phi=1.0, draws=20000)


def test_urn_four_houses():
    assert urn_increment(4) == 22
    assert F(1 + 22, 24 + 22) == F(1, 2)
    assert distributions.urn_match_ok(m=4, draws=20000)
