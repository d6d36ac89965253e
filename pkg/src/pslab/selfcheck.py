"""Known-answer checks run by ``pslab selfcheck``."""
from __future__ import annotations

from fractions import Fraction as F

from .equilibria import verify_pne
from .model import Instance, as_utilities
from .ps import run_ps
from .strategy import CYCLE_ORDERS, CYCLE_STEPS, CYCLE_UTILITIES, replay_path
from .threat import check_threat_guarantees, threat_profile

EXAMPLE_ORDERS = ((0, 1, 2), (1, 0, 2), (1, 2, 0))
EXAMPLE_MANIPULATED = ((1, 0, 2), (1, 0, 2), (1, 2, 0))
EXAMPLE_TRUTHFUL_PS = ((F(3, 4), 0, F(1, 4)), (F(1, 4), F(1, 2), F(1, 4)), (0, F(1, 2), F(1, 2)))
EXAMPLE_MANIPULATED_PS = ((F(1, 2), F(1, 3), F(1, 6)), (F(1, 2), F(1, 3), F(1, 6)), (0, F(1, 3), F(2, 3)))
# agent 1's utilities are the ones from the example; agents 2, 3 only need consistency
EXAMPLE_UTILITIES = ((7, 6, 0), (2, 3, 1), (1, 3, 2))
CYCLE_EU = ((6, 7), (F(15, 2), 6), (6, 7), (F(15, 2), F(9, 2)), (7, F(13, 2)), (F(15, 2), 6))


def _example_ps():
    ok = run_ps(Instance.from_orders(EXAMPLE_ORDERS))[0] == EXAMPLE_TRUTHFUL_PS
    return ok and run_ps(Instance.from_orders(EXAMPLE_MANIPULATED))[0] == EXAMPLE_MANIPULATED_PS


def _example_trace():
    return run_ps(Instance.from_orders(EXAMPLE_ORDERS))[1].finish_times() == (F(1, 2), F(3, 4), F(1))


def _example_equilibrium():
    inst = Instance.from_orders(EXAMPLE_ORDERS)
    eu = verify_pne(inst, as_utilities(EXAMPLE_UTILITIES), relation="eu")
    return verify_pne(inst, None, relation="dl").is_pne and not eu.is_pne and eu.witness.agent == 0


def _cycle(relation):
    inst = Instance.from_orders(CYCLE_ORDERS)
    res = replay_path(inst, as_utilities(CYCLE_UTILITIES), CYCLE_STEPS, relation)
    eus = (res.initial_eu,) + tuple(r.eu for r in res.records)
    return (
        eus == CYCLE_EU
        and all(r.is_best_response and r.strictly_improves for r in res.records)
        and res.repeats == 1
    )


def _threat():
    cases = [((0, 1, 2), (1, 2, 0)), ((0, 1), (1, 0)), ((2, 0, 1, 3), (2, 0, 1, 3)), ((0, 1, 2, 3), (3, 2, 1, 0))]
    if threat_profile((0, 1, 2), (1, 2, 0)) != ((0, 1, 2), (1, 0, 2)):
        return False
    for o1, o2 in cases:
        m = len(o1)
        borda = [[0] * m, [0] * m]
        for i, o in enumerate((o1, o2)):
            for rank, h in enumerate(o):
                borda[i][h] = m - rank
        if not check_threat_guarantees(o1, o2, [as_utilities(borda)]).ok:
            return False
    return True


CHECKS = {
    "example PS matrices": _example_ps,
    "example eating timeline": _example_trace,
    "example DL equilibrium / EU manipulation": _example_equilibrium,
    "best-response cycle (EU)": lambda: _cycle("eu"),
    "best-response cycle (DL)": lambda: _cycle("dl"),
    "threat profile guarantees": _threat,
}


def run_selfcheck() -> list[tuple[str, bool]]:
    results = []
    for name, check in CHECKS.items():
        try:
            ok = bool(check())
        except Exception:  # a crash is a failed check
            ok = False
        results.append((name, ok))
    return results
