from fractions import Fraction as F
from functools import lru_cache

import pytest

from conftest import corpus
from oracles import brute_force_pne, stepping_ps
from pslab.equilibria import (
    census, compute_granularity, enumerate_pne, extract_profile, leaf_equilibria, profile_count, rational_gcd,
    solve_substage_game, spne_construct, verify_pne,
)
from pslab.model import BoundExceeded, Instance, as_utilities, check_assignment, social_welfare
from pslab.ps import ps_assignment
from pslab.relations import dl_key, eu_value

SMALL = [(2, 2), (2, 3), (3, 2), (3, 3)]


def test_example_dl_equilibrium_and_eu_witness(example, example_utilities):
    assert verify_pne(example, None, relation="dl").is_pne
    verdict = verify_pne(example, example_utilities, relation="eu")
    assert not verdict.is_pne
    w = verdict.witness
    assert w.agent == 0 and w.report == (1, 0, 2)
    assert (w.old_value, w.new_value) == (F(21, 4), F(11, 2))


def test_identical_preferences_truthful_is_pne():
    inst = Instance.from_orders([(0, 1, 2)] * 3)
    assert verify_pne(inst, as_utilities([[3, 2, 1]] * 3)).is_pne


@pytest.mark.parametrize("relation", ["eu", "dl"])
@pytest.mark.parametrize("inst,u", corpus(SMALL, per_size=2))
def test_enumeration_matches_brute_force(inst, u, relation):
    @lru_cache(maxsize=None)
    def ps(profile):
        return stepping_ps(profile, inst.m)

    def payoff(i, row):
        return eu_value(row, u[i]) if relation == "eu" else dl_key(row, inst.profile[i])

    expected = brute_force_pne(inst, payoff, ps)
    found = enumerate_pne(inst, u, relation)
    assert {e.profile for e in found} == expected
    for e in found:
        assert e.assignment == ps(e.profile)
        assert e.sw == social_welfare(e.assignment, u)


@pytest.mark.parametrize("inst,u", corpus([(2, 2), (2, 3), (3, 2), (3, 3), (2, 4)], per_size=2))
def test_verify_agrees_with_census(inst, u):
    c = census(inst, u, "eu")
    for pid in range(c.size):
        assert verify_pne(inst, u, c.profile(pid)).is_pne == bool(c.is_pne.flat[pid])


def test_census_ids_are_lexicographic(example):
    c = census(example, None, "dl")
    assert c.profile(0) == ((0, 1, 2),) * 3
    assert c.profile(1) == ((0, 1, 2), (0, 1, 2), (0, 2, 1))
    pid = c.profile_id(example.profile)
    assert c.profile(pid) == example.profile
    assert pid in c.pne_ids()


def test_parallel_census_is_identical():
    inst, u = corpus([(3, 3)], per_size=1)[0]
    a, b = census(inst, u, jobs=1), census(inst, u, jobs=2)
    assert (a.is_pne == b.is_pne).all()
    assert [a.social_welfare(p) for p in a.pne_ids()] == [b.social_welfare(p) for p in b.pne_ids()]


@pytest.mark.parametrize("inst,u", corpus([(2, 3), (3, 3)], per_size=2, seed=77))
def test_relabelling_houses_permutes_equilibria(inst, u):
    perm = (2, 0, 1)  # house h becomes perm[h]
    inst2 = Instance.from_orders([tuple(perm[h] for h in o) for o in inst.profile])
    u2 = tuple(tuple(row[perm.index(h)] for h in range(3)) for row in u)
    relabel = lambda prof: tuple(tuple(perm[h] for h in o) for o in prof)
    a = {relabel(e.profile): e.sw for e in enumerate_pne(inst, u)}
    b = {e.profile: e.sw for e in enumerate_pne(inst2, u2)}
    assert a == b


@pytest.mark.parametrize("inst,u", corpus([(2, 2), (2, 3), (3, 2), (3, 3)], per_size=5, seed=5))
def test_an_equilibrium_always_exists(inst, u):
    assert enumerate_pne(inst, u)


def test_bound_is_enforced(example):
    with pytest.raises(BoundExceeded):
        census(example, None, "dl", bound=100)
    assert profile_count(4, 4) == 331776


def test_rational_gcd():
    assert rational_gcd(F(1, 2), F(1, 3)) == F(1, 6)
    assert rational_gcd(F(3, 4), F(1, 2)) == F(1, 4)


@pytest.mark.parametrize("n,m,g,quantum", [
    (1, 1, 1, 1), (2, 2, F(1, 2), F(1, 4)), (2, 3, F(1, 2), F(1, 4)),
    (3, 2, F(1, 6), F(1, 18)), (3, 3, F(1, 12), F(1, 36)), (2, 4, F(1, 2), F(1, 4)), (4, 2, F(1, 12), F(1, 48)),
])
def test_granularity(n, m, g, quantum):
    res = compute_granularity(Instance.from_orders([tuple(range(m))] * n))
    assert (res.g, res.quantum) == (g, quantum)
    for t in (res.g, F(1)):
        assert (t / res.quantum).denominator == 1


def test_substage_path_is_a_ps_run():
    inst = Instance.from_orders([(0, 1, 2), (1, 2, 0)])
    u = as_utilities([[3, 2, 1], [1, 3, 2]])
    game = solve_substage_game(inst, u, "eu", F(1, 4))
    assert game.depth == 12
    profile = extract_profile(game, 2, 3)
    assert ps_assignment(inst.with_profile(profile)) == game.leaf


def test_spne_identical_preferences():
    inst = Instance.from_orders([(0, 1), (0, 1)])
    res = spne_construct(inst, as_utilities([[2, 1], [2, 1]]))
    assert res.verdict.is_pne
    assert res.game.leaf == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))


def test_spne_budget(example, example_utilities):
    with pytest.raises(BoundExceeded):
        spne_construct(example, example_utilities, quantum=F(1, 36), budget=1000)


def test_spne_single_agent():
    inst = Instance.from_orders([(0, 1)])
    res = spne_construct(inst, as_utilities([[2, 1]]))
    assert res.profile == ((0, 1),) and res.verdict.is_pne


def test_spne_both_prefer_first_house():
    inst = Instance.from_orders([(0, 1), (0, 1)])
    res = spne_construct(inst, as_utilities([[2, 1], [2, 1]]), quantum=F(1, 4))
    assert all(o[0] == 0 for o in res.profile) and res.verdict.is_pne


def test_spne_leaves_are_assignments():
    for inst, u in corpus([(2, 2), (2, 3), (3, 2)], per_size=3, seed=31):
        check_assignment(spne_construct(inst, u).game.leaf, inst.n, inst.m)


def test_extracted_list_can_miss_an_equilibrium_the_leaf_reaches():
    # the extracted lists are not an equilibrium, yet the SPNE outcome is
    # the outcome of the (unique) truthful equilibrium
    inst = Instance.from_orders([(0, 1, 2), (1, 0, 2)])
    u = as_utilities([[861, 795, 477], [665, 966, 256]])
    res = spne_construct(inst, u)
    assert res.profile == ((0, 2, 1), (1, 2, 0))
    assert not res.verdict.is_pne and res.verdict.witness.report == (1, 0, 2)
    assert leaf_equilibria(inst, u, "eu", res.game.leaf) == [inst.profile]


def test_single_agent_every_profile_is_pne():
    inst = Instance.from_orders([(1, 0)])
    assert len(enumerate_pne(inst, as_utilities([[1, 2]]))) == 2
    assert verify_pne(inst, as_utilities([[1, 2]]), [(0, 1)]).is_pne


def test_shared_favourite_truthful_pne():
    inst = Instance.from_orders([(0, 1), (0, 1)])
    u = as_utilities([[2, 1], [2, 1]])
    assert verify_pne(inst, u).is_pne
    assert inst.profile in {e.profile for e in enumerate_pne(inst, u)}


def test_example_profile_local_gcd(example):
    from functools import reduce
    from pslab.ps import run_ps
    times = (F(0),) + run_ps(example)[1].finish_times()
    gaps = [b - a for a, b in zip(times, times[1:])]
    assert gaps == [F(1, 2), F(1, 4), F(1, 4)] and reduce(rational_gcd, gaps) == F(1, 4)
