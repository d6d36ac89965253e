"""Pure Nash equilibria of the PS game: verification, enumeration, and the
discretised eating game solved by backward induction."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import permutations, product
from typing import Sequence

import numpy as np

from .model import (
    DEFAULT_REPORT_BOUND,
    Assignment,
    BoundExceeded,
    Instance,
    LinearOrder,
    PSLabError,
    UtilityProfile,
    profile_bound,
)
from .ps import ps_assignment, ps_units, run_ps, unit_scale
from .strategy import check_report_bound, payoff_fn, replace_report

DEFAULT_SPNE_BUDGET = 2_000_000


@dataclass(frozen=True)
class Witness:
    agent: int
    report: LinearOrder
    old_value: object
    new_value: object


@dataclass(frozen=True)
class PneVerdict:
    is_pne: bool
    witness: Witness | None = None


def verify_pne(
    instance: Instance,
    utilities: UtilityProfile | None,
    profile: Sequence[Sequence[int]] | None = None,
    relation: str = "eu",
    bound: int = DEFAULT_REPORT_BOUND,
) -> PneVerdict:
    """Check every unilateral deviation from ``profile`` (truthful by default).

    Agents are scanned in index order and reports in lexicographic order;
    the first strictly improving deviation is returned as the witness.
    """
    check_report_bound(instance.m, bound)
    reported = tuple(tuple(o) for o in profile) if profile is not None else instance.profile
    base = ps_assignment(instance.with_profile(reported))
    for agent in range(instance.n):
        value_of = payoff_fn(instance, utilities, agent, relation)
        old = value_of(base[agent])
        for report in permutations(range(instance.m)):
            if report == reported[agent]:
                continue
            row = ps_assignment(instance.with_profile(replace_report(reported, agent, report)))[agent]
            new = value_of(row)
            if new > old:
                return PneVerdict(False, Witness(agent, report, old, new))
    return PneVerdict(True)


# --- exhaustive enumeration --------------------------------------------------

def _eu_weights(utilities: UtilityProfile) -> tuple[list[list[int]], list[int]]:
    """Integer utility rows and their per-agent denominators."""
    weights, dens = [], []
    for row in utilities:
        den = math.lcm(*(u.denominator for u in row))
        weights.append([int(u * den) for u in row])
        dens.append(den)
    return weights, dens


def _chunk_payoffs(args):
    """Payoffs of every profile whose first report is ``perms[first]``.

    Returns one flat list per agent for the relation payoff and, when
    weights are given, one per agent for the integer EU payoff.
    """
    first, perms, n, m, scale, relation, orders, weights = args
    rel = [[] for _ in range(n)]
    eu = [[] for _ in range(n)] if weights is not None else None
    if relation == "dl":
        base = scale + 1
        place = [base ** (m - 1 - k) for k in range(m)]
    head = (perms[first],)
    for rest in product(perms, repeat=n - 1):
        eaten = ps_units(head + rest, m, scale)
        for i in range(n):
            row = eaten[i]
            if weights is not None:
                w = weights[i]
                v = sum(w[h] * row[h] for h in range(m))
                eu[i].append(v)
            if relation == "dl":
                order = orders[i]
                rel[i].append(sum(row[order[k]] * place[k] for k in range(m)))
            else:
                rel[i].append(v)
    return rel, eu


@dataclass
class Census:
    """Every profile of an instance with its equilibrium status."""

    instance: Instance
    relation: str
    perms: list[LinearOrder]
    scale: int
    is_pne: np.ndarray  # bool, shape (m!,)*n, C order = lexicographic profile id
    eu_units: list[np.ndarray] | None
    eu_dens: list[int] | None

    @property
    def size(self) -> int:
        return self.is_pne.size

    def profile(self, pid: int) -> tuple[LinearOrder, ...]:
        idx = np.unravel_index(pid, self.is_pne.shape)
        return tuple(self.perms[k] for k in idx)

    def profile_id(self, profile: Sequence[Sequence[int]]) -> int:
        index = {p: k for k, p in enumerate(self.perms)}
        return int(np.ravel_multi_index(tuple(index[tuple(o)] for o in profile), self.is_pne.shape))

    def pne_ids(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.is_pne)]

    def social_welfare(self, pid: int) -> Fraction | None:
        if self.eu_units is None:
            return None
        idx = np.unravel_index(pid, self.is_pne.shape)
        return sum(
            (Fraction(int(units[idx]), den * self.scale) for units, den in zip(self.eu_units, self.eu_dens)),
            Fraction(0),
        )


def profile_count(n: int, m: int) -> int:
    return math.factorial(m) ** n


def census(
    instance: Instance,
    utilities: UtilityProfile | None,
    relation: str = "eu",
    jobs: int | None = 1,
    bound: int | None = None,
) -> Census:
    """Run PS on all (m!)^n profiles and mark the pure Nash equilibria.

    A profile is an equilibrium iff each agent's payoff equals the maximum
    over his own m! reports with the others fixed, so one pass over the
    profile cube plus a max along each agent's axis decides every profile.
    PS runs in integer units (see :func:`pslab.ps.unit_scale`) and EU
    payoffs use integer-scaled utilities, so the test is exact.
    """
    n, m = instance.n, instance.m
    bound = profile_bound() if bound is None else bound
    total = profile_count(n, m)
    if total > bound:
        raise BoundExceeded(f"(m!)^n = {total} profiles exceed the bound {bound}")
    if relation == "eu" and utilities is None:
        raise PSLabError("the EU relation needs utilities")
    if relation not in ("eu", "dl"):
        raise PSLabError(f"unknown relation {relation!r}")
    perms = list(permutations(range(m)))
    K = len(perms)
    scale = unit_scale(n, m)
    weights, dens = _eu_weights(utilities) if utilities is not None else (None, None)
    tasks = [(first, perms, n, m, scale, relation, instance.profile, weights) for first in range(K)]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs > 1 and K > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_chunk_payoffs, tasks))
    else:
        chunks = [_chunk_payoffs(t) for t in tasks]
    shape = (K,) * n
    is_pne = np.ones(shape, dtype=bool)
    eu_units = [] if weights is not None else None
    for i in range(n):
        vals = np.array([v for rel, _ in chunks for v in rel[i]], dtype=object).reshape(shape)
        best = vals.max(axis=i, keepdims=True)
        is_pne &= (vals == best).astype(bool)
        if eu_units is not None:
            eu_units.append(np.array([v for _, eu in chunks for v in eu[i]], dtype=object).reshape(shape))
    return Census(instance, relation, perms, scale, is_pne, eu_units, dens)


@dataclass(frozen=True)
class Equilibrium:
    profile_id: int
    profile: tuple[LinearOrder, ...]
    assignment: Assignment
    sw: Fraction | None


def enumerate_pne(
    instance: Instance,
    utilities: UtilityProfile | None,
    relation: str = "eu",
    jobs: int | None = 1,
    bound: int | None = None,
) -> list[Equilibrium]:
    """All pure Nash equilibria, ordered by lexicographic profile id."""
    c = census(instance, utilities, relation, jobs, bound)
    out = []
    for pid in c.pne_ids():
        profile = c.profile(pid)
        assignment = ps_assignment(instance.with_profile(profile))
        out.append(Equilibrium(pid, profile, assignment, c.social_welfare(pid)))
    return out


# --- granularity and the discretised eating game ----------------------------

def rational_gcd(a: Fraction, b: Fraction) -> Fraction:
    a, b = Fraction(a), Fraction(b)
    den = a.denominator * b.denominator
    return Fraction(math.gcd(a.numerator * b.denominator, b.numerator * a.denominator), den)


@dataclass(frozen=True)
class GranularityResult:
    g: Fraction
    quantum: Fraction
    event_gap_count: int


def compute_granularity(instance: Instance, bound: int | None = None) -> GranularityResult:
    """GCD of all gaps between consecutive house-finish times over every
    profile of the instance's size, counting the gap from time 0 to the
    first finish. ``quantum`` = gcd(g, 1)/n divides both g and 1."""
    n, m = instance.n, instance.m
    bound = profile_bound() if bound is None else bound
    total = profile_count(n, m)
    if total > bound:
        raise BoundExceeded(f"(m!)^n = {total} profiles exceed the bound {bound}")
    gaps = set()
    count = 0
    for profile in product(permutations(range(m)), repeat=n):
        times = run_ps(Instance(n, m, profile))[1].finish_times()
        prev = Fraction(0)
        for t in times:
            gaps.add(t - prev)
            count += 1
            prev = t
    g = reduce(rational_gcd, gaps)
    return GranularityResult(g, rational_gcd(g, Fraction(1)) / n, count)


@dataclass(frozen=True)
class SubStageGame:
    depth: int
    node_count: int
    quantum: Fraction
    leaf: Assignment
    path: tuple[tuple[int, int], ...]  # (agent, house) per sub-stage


@dataclass(frozen=True)
class SpneResult:
    profile: tuple[LinearOrder, ...]
    verdict: PneVerdict
    game: SubStageGame


def solve_substage_game(
    instance: Instance,
    utilities: UtilityProfile | None,
    relation: str,
    quantum: Fraction,
    budget: int = DEFAULT_SPNE_BUDGET,
    sticky: bool = True,
) -> SubStageGame:
    """Backward induction on the game where agents 1..n take turns eating
    ``quantum`` of an unfinished house.

    With ``sticky`` an agent chooses only when the house he was eating is
    finished (or at the start) and otherwise keeps eating it, so every path
    is a run of PS under some profile. Leaves are evaluated on the final
    allocation; the mover picks the child whose induced leaf he likes best,
    ties toward the lowest house index. States are memoised on (allocation
    in quantum units, houses being eaten), collapsing move transpositions.
    """
    n, m = instance.n, instance.m
    units = 1 / Fraction(quantum)
    if units.denominator != 1:
        raise PSLabError(f"quantum {quantum} does not divide a unit house")
    units = int(units)
    depth = m * units
    if depth % n:
        raise PSLabError(f"{depth} sub-stages cannot be shared equally by {n} agents")
    payoff = [payoff_fn(instance, utilities, i, relation) for i in range(n)]
    memo: dict[tuple, tuple] = {}

    def child_of(alloc, eating, agent, h):
        row = alloc[agent]
        alloc = alloc[:agent] + (row[:h] + (row[h] + 1,) + row[h + 1:],) + alloc[agent + 1:]
        if sticky:
            eating = eating[:agent] + (h,) + eating[agent + 1:]
        return alloc, eating

    def solve(alloc, eating, step):
        key = (alloc, eating)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if step == depth:
            result = (alloc, None)
        else:
            agent = step % n
            left = [units - sum(alloc[i][h] for i in range(n)) for h in range(m)]
            current = eating[agent]
            choices = [current] if current >= 0 and left[current] else [h for h in range(m) if left[h]]
            best = None
            for h in choices:
                leaf = solve(*child_of(alloc, eating, agent, h), step + 1)[0]
                value = payoff[agent](leaf[agent])
                if best is None or value > best[0]:
                    best = (value, leaf, h)
            result = (best[1], best[2])
        memo[key] = result
        if len(memo) > budget:
            raise BoundExceeded(f"sub-stage game exceeds {budget} states")
        return result

    alloc = tuple((0,) * m for _ in range(n))
    eating = (-1,) * n
    leaf = solve(alloc, eating, 0)[0]
    path = []
    for step in range(depth):
        agent = step % n
        h = memo[(alloc, eating)][1]
        path.append((agent, h))
        alloc, eating = child_of(alloc, eating, agent, h)
    assignment = tuple(tuple(Fraction(x, units) for x in row) for row in leaf)
    return SubStageGame(depth, len(memo), Fraction(quantum), assignment, tuple(path))


def extract_profile(game: SubStageGame, n: int, m: int) -> tuple[LinearOrder, ...]:
    """Each agent ranks houses by when he first ate them on the equilibrium
    path; houses he never ate follow in ascending index order."""
    seq = [[] for _ in range(n)]
    for agent, h in game.path:
        if h not in seq[agent]:
            seq[agent].append(h)
    return tuple(tuple(s + [h for h in range(m) if h not in s]) for s in seq)


def spne_construct(
    instance: Instance,
    utilities: UtilityProfile | None,
    relation: str = "eu",
    quantum: Fraction | None = None,
    budget: int = DEFAULT_SPNE_BUDGET,
) -> SpneResult:
    """Solve the discretised eating game and read a preference profile off
    its equilibrium path, together with the verdict of :func:`verify_pne`."""
    if quantum is None:
        quantum = compute_granularity(instance).quantum
    game = solve_substage_game(instance, utilities, relation, quantum, budget)
    profile = extract_profile(game, instance.n, instance.m)
    return SpneResult(profile, verify_pne(instance, utilities, profile, relation), game)


def leaf_equilibria(
    instance: Instance,
    utilities: UtilityProfile | None,
    relation: str,
    leaf: Assignment,
    bound: int | None = None,
) -> list[tuple[LinearOrder, ...]]:
    """Equilibrium profiles whose PS assignment equals ``leaf``.

    Diagnostic for :func:`spne_construct`: when the extracted list profile
    is not an equilibrium, this shows whether the equilibrium outcome is
    still reachable by some reported profile.
    """
    c = census(instance, utilities, relation, 1, bound)
    leaf = tuple(tuple(Fraction(x) for x in row) for row in leaf)
    out = []
    for pid in c.pne_ids():
        profile = c.profile(pid)
        if ps_assignment(instance.with_profile(profile)) == leaf:
            out.append(profile)
    return out
