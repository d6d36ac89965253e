"""Best responses by exhaustive search, best-response dynamics and path replay."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Sequence

from .model import (
    DEFAULT_REPORT_BOUND,
    BoundExceeded,
    Instance,
    LinearOrder,
    PSLabError,
    Row,
    UtilityProfile,
    check_order,
)
from .ps import ps_assignment
from .relations import dl_key, eu_value

RELATIONS = ("eu", "dl")
POLICIES = ("round-robin", "first-improving-agent")


def payoff_fn(instance: Instance, utilities: UtilityProfile | None, agent: int, relation: str):
    """Map an allocation row of ``agent`` to a value ordered like his true
    preference (an exact EU value, or the DL key)."""
    if relation == "eu":
        if utilities is None:
            raise PSLabError("the EU relation needs utilities")
        u = utilities[agent]
        return lambda row: eu_value(row, u)
    if relation == "dl":
        order = instance.profile[agent]
        return lambda row: dl_key(row, order)
    raise PSLabError(f"unknown relation {relation!r}")


def check_report_bound(m: int, bound: int) -> None:
    if m > bound:
        raise BoundExceeded(f"m = {m} exceeds the report enumeration bound {bound}")


def replace_report(profile: Sequence[LinearOrder], agent: int, report: LinearOrder) -> tuple[LinearOrder, ...]:
    return tuple(report if i == agent else o for i, o in enumerate(profile))


@dataclass(frozen=True)
class BestResponse:
    order: LinearOrder
    row: Row
    # EU value, or the DL key (the row read along the true order)
    value: object
    current_value: object
    improves: bool


def best_response(
    instance: Instance,
    utilities: UtilityProfile | None,
    agent: int,
    relation: str = "eu",
    profile: Sequence[LinearOrder] | None = None,
    bound: int = DEFAULT_REPORT_BOUND,
) -> BestResponse:
    """Best report of ``agent`` against the other reports in ``profile``.

    ``instance`` carries the true preferences; ``profile`` the reported ones
    (truthful by default). Every one of the m! reports is tried; among equal
    maximisers the lexicographically smallest ranking wins. ``improves``
    compares against the agent's current report in ``profile``.
    """
    check_report_bound(instance.m, bound)
    reported = tuple(profile) if profile is not None else instance.profile
    value_of = payoff_fn(instance, utilities, agent, relation)
    current_row = ps_assignment(instance.with_profile(reported))[agent]
    current = value_of(current_row)
    best = None
    for report in permutations(range(instance.m)):
        row = ps_assignment(instance.with_profile(replace_report(reported, agent, report)))[agent]
        value = value_of(row)
        if best is None or value > best[2]:
            best = (report, row, value)
    order, row, value = best
    return BestResponse(order, row, value, current, value > current)


def eu_best_response(instance, utilities, agent, profile=None, bound=DEFAULT_REPORT_BOUND) -> BestResponse:
    return best_response(instance, utilities, agent, "eu", profile, bound)


def dl_best_response(instance, agent, profile=None, bound=DEFAULT_REPORT_BOUND) -> BestResponse:
    return best_response(instance, None, agent, "dl", profile, bound)


@dataclass(frozen=True)
class DynamicsOutcome:
    trajectory: tuple[tuple[LinearOrder, ...], ...]
    terminal: str  # "fixed_point", "cycle" or "max_steps"
    start_index: int | None = None
    period: int | None = None
    steps: int = 0

    @property
    def final(self) -> tuple[LinearOrder, ...]:
        return self.trajectory[-1]


def run_dynamics(
    instance: Instance,
    utilities: UtilityProfile | None,
    policy: str = "round-robin",
    relation: str = "eu",
    max_steps: int = 1000,
    start: Sequence[LinearOrder] | None = None,
    bound: int = DEFAULT_REPORT_BOUND,
) -> DynamicsOutcome:
    """Follow strictly improving best responses from ``start`` (truthful by default).

    ``round-robin`` offers agents 1..n a move in turn and stops once n
    consecutive offers are declined; ``first-improving-agent`` moves the
    lowest-indexed agent who can improve. Each step is one best-response
    evaluation (round-robin) or one move (first-improving). A visited state
    seen again is reported as a cycle; for round-robin the state includes
    whose turn is next.
    """
    if policy not in POLICIES:
        raise PSLabError(f"unknown mover policy {policy!r}")
    check_report_bound(instance.m, bound)
    n = instance.n
    profile = tuple(start) if start is not None else instance.profile
    trajectory = [profile]
    round_robin = policy == "round-robin"
    seen = {(profile, 0) if round_robin else profile: 0}

    def moved(new_profile, key):
        trajectory.append(new_profile)
        if key in seen:
            first = seen[key]
            return DynamicsOutcome(tuple(trajectory), "cycle", first, len(trajectory) - 1 - first, step + 1)
        seen[key] = len(trajectory) - 1
        return None

    mover, idle = 0, 0
    for step in range(max_steps):
        if round_robin:
            br = best_response(instance, utilities, mover, relation, profile, bound)
            mover_next = (mover + 1) % n
            if br.improves:
                profile = replace_report(profile, mover, br.order)
                idle = 0
                outcome = moved(profile, (profile, mover_next))
                if outcome:
                    return outcome
            else:
                idle += 1
                if idle == n:
                    return DynamicsOutcome(tuple(trajectory), "fixed_point", steps=step + 1)
            mover = mover_next
        else:
            for agent in range(n):
                br = best_response(instance, utilities, agent, relation, profile, bound)
                if br.improves:
                    profile = replace_report(profile, agent, br.order)
                    outcome = moved(profile, profile)
                    if outcome:
                        return outcome
                    break
            else:
                return DynamicsOutcome(tuple(trajectory), "fixed_point", steps=step)
    return DynamicsOutcome(tuple(trajectory), "max_steps", steps=max_steps)


@dataclass(frozen=True)
class StepRecord:
    agent: int
    report: LinearOrder
    eu: tuple[Fraction, ...] | None
    is_best_response: bool
    strictly_improves: bool


@dataclass(frozen=True)
class ReplayResult:
    initial_eu: tuple[Fraction, ...] | None
    records: tuple[StepRecord, ...]
    profiles: tuple[tuple[LinearOrder, ...], ...]
    # index into ``profiles`` of an earlier profile equal to the final one
    repeats: int | None


def replay_path(
    instance: Instance,
    utilities: UtilityProfile | None,
    steps: Sequence[tuple[int, Sequence[int]]],
    relation: str = "eu",
    bound: int = DEFAULT_REPORT_BOUND,
) -> ReplayResult:
    """Replay a sequence of (agent, report) moves starting from the truthful
    profile, checking that each move is a best response that strictly
    improves the mover under ``relation``."""
    check_report_bound(instance.m, bound)
    parsed = []
    for step in steps:
        try:
            agent, report = step
        except (TypeError, ValueError):
            raise PSLabError(f"malformed step {step!r}") from None
        if not 0 <= agent < instance.n:
            raise PSLabError(f"step names unknown agent {agent}")
        parsed.append((agent, check_order(report, instance.m)))

    def eu_vector(assignment):
        if utilities is None:
            return None
        return tuple(eu_value(row, u) for row, u in zip(assignment, utilities))

    profile = instance.profile
    profiles = [profile]
    initial_eu = eu_vector(ps_assignment(instance))
    records = []
    for agent, report in parsed:
        br = best_response(instance, utilities, agent, relation, profile, bound)
        profile = replace_report(profile, agent, report)
        assignment = ps_assignment(instance.with_profile(profile))
        value = payoff_fn(instance, utilities, agent, relation)(assignment[agent])
        records.append(StepRecord(agent, report, eu_vector(assignment), value == br.value, value > br.current_value))
        profiles.append(profile)
    repeats = None
    if parsed:
        earlier = [k for k, p in enumerate(profiles[:-1]) if p == profile]
        repeats = earlier[0] if earlier else None
    return ReplayResult(initial_eu, tuple(records), tuple(profiles), repeats)


# Nash dynamics cycle with Borda utilities: 2 agents, 5 houses, five best
# responses alternating between the agents, returning to the step-1 profile.
CYCLE_ORDERS = ((1, 2, 4, 3, 0), (4, 2, 3, 0, 1))
CYCLE_UTILITIES = ((0, 4, 3, 1, 2), (1, 0, 3, 2, 4))
CYCLE_STEPS = (
    (0, (2, 3, 1, 0, 4)),
    (1, (2, 3, 4, 0, 1)),
    (0, (2, 4, 1, 0, 3)),
    (1, (4, 2, 3, 0, 1)),
    (0, (2, 3, 1, 0, 4)),
)
