"""The two-agent threat profile: an equilibrium that reproduces the truthful
PS assignment."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .equilibria import PneVerdict, verify_pne
from .model import DEFAULT_REPORT_BOUND, Instance, LinearOrder, PSLabError, UtilityProfile
from .ps import ps_assignment


def threat_profile(order1: Sequence[int], order2: Sequence[int], counter: list | None = None) -> tuple[LinearOrder, LinearOrder]:
    """Build (Q1, Q2) from the true orders of two agents.

    Each round takes the current favourites h (agent 1) and h' (agent 2),
    appends them to Q1 and Q2, and deletes both from both lists. When they
    differ, agent 1 also lists h' right after h and agent 2 lists h right
    after h'. Runs in O(m); ``counter`` (a one-element list) receives the
    number of list operations performed.
    """
    if sorted(order1) != sorted(order2):
        raise PSLabError("the two orders rank different houses")
    m = len(order1)
    removed = set()
    i1 = i2 = 0
    q1: list[int] = []
    q2: list[int] = []
    ops = 0
    while len(removed) < m:
        while order1[i1] in removed:
            i1 += 1
            ops += 1
        while order2[i2] in removed:
            i2 += 1
            ops += 1
        h, h2 = order1[i1], order2[i2]
        q1.append(h)
        q2.append(h2)
        removed.update((h, h2))
        ops += 3
        if h != h2:
            q1.append(h2)
            q2.append(h)
            ops += 2
    if counter is not None:
        counter[0] = ops
    return tuple(q1), tuple(q2)


@dataclass
class ThreatReport:
    profile: tuple[LinearOrder, LinearOrder]
    same_assignment: bool
    dl_verdict: PneVerdict
    eu_verdicts: list[PneVerdict] = field(default_factory=list)

    @property
    def falsified(self) -> list[str]:
        out = []
        if not self.same_assignment:
            out.append("assignment differs from truthful")
        if not self.dl_verdict.is_pne:
            out.append("not a DL equilibrium")
        for k, v in enumerate(self.eu_verdicts):
            if not v.is_pne:
                out.append(f"not an EU equilibrium for utility profile {k}")
        return out

    @property
    def ok(self) -> bool:
        return not self.falsified


def check_threat_guarantees(
    order1: Sequence[int],
    order2: Sequence[int],
    utilities: Sequence[UtilityProfile] = (),
    bound: int = DEFAULT_REPORT_BOUND,
) -> ThreatReport:
    """Check the threat profile by exhaustive deviation search: same PS
    assignment as truth-telling, DL equilibrium, and EU equilibrium for
    every given consistent utility profile."""
    instance = Instance.from_orders([order1, order2])
    q = threat_profile(order1, order2)
    same = ps_assignment(instance.with_profile(q)) == ps_assignment(instance)
    dl = verify_pne(instance, None, q, "dl", bound)
    eu = [verify_pne(instance, u, q, "eu", bound) for u in utilities]
    return ThreatReport(q, same, dl, eu)
