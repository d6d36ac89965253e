"""Event-driven Probabilistic Serial (simultaneous eating) rule."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import Assignment, Instance, render_order, render_rational


@dataclass(frozen=True)
class EatingEvent:
    time: Fraction
    finished: frozenset[int]
    # (agent, house, amount) eaten since the previous event
    consumption: tuple[tuple[int, int, Fraction], ...]


@dataclass(frozen=True)
class EatingTrace:
    events: tuple[EatingEvent, ...]
    final_time: Fraction

    def finish_times(self) -> tuple[Fraction, ...]:
        return tuple(e.time for e in self.events)

    def render(self) -> list[str]:
        lines = []
        for e in self.events:
            names = render_order(sorted(e.finished))
            lines.append(f"t={render_rational(e.time)} finished={{{names}}}")
        return lines


def run_ps(instance: Instance) -> tuple[Assignment, EatingTrace]:
    """Run PS on ``instance`` and return the exact assignment and its trace.

    Instead of stepping time, the simulation jumps to the next moment a
    house is exhausted (remaining mass / number of eaters, minimised over
    the houses being eaten). Houses that run out at the same moment are
    reported in a single event.
    """
    n, m = instance.n, instance.m
    prefs = instance.profile
    remaining = [Fraction(1)] * m
    eaten = [[Fraction(0)] * m for _ in range(n)]
    cursor = [0] * n
    t = Fraction(0)
    events = []
    left = m
    while left:
        current = []
        eaters = [0] * m
        for i in range(n):
            order = prefs[i]
            k = cursor[i]
            while remaining[order[k]] == 0:
                k += 1
            cursor[i] = k
            current.append(order[k])
            eaters[order[k]] += 1
        dt = min(remaining[h] / eaters[h] for h in range(m) if eaters[h])
        t += dt
        finished = set()
        for h in range(m):
            if eaters[h]:
                remaining[h] -= eaters[h] * dt
                if remaining[h] == 0:
                    finished.add(h)
        for i, h in enumerate(current):
            eaten[i][h] += dt
        left -= len(finished)
        events.append(EatingEvent(t, frozenset(finished), tuple((i, h, dt) for i, h in enumerate(current))))
    assignment = tuple(tuple(row) for row in eaten)
    return assignment, EatingTrace(tuple(events), t)


def ps_assignment(instance: Instance) -> Assignment:
    return run_ps(instance)[0]


def unit_scale(n: int, m: int) -> int:
    """A denominator D such that every PS event time on an n x m instance is
    a multiple of 1/D.

    With L = lcm(1..n), the k-th event time is a multiple of 1/L**k (the
    remaining mass of a house is a multiple of 1/L**(k-1) and is shared by
    at most n eaters), and there are at most m events.
    """
    return math.lcm(*range(1, n + 1)) ** m


def ps_units(profile: Sequence[Sequence[int]], m: int, scale: int) -> list[list[int]]:
    """PS in integer units: houses have mass ``scale``; returns eaten units.

    ``scale`` must be a multiple of every event-time denominator, e.g.
    :func:`unit_scale`. Used by the profile enumerators where Fraction
    arithmetic would dominate the running time.
    """
    n = len(profile)
    remaining = [scale] * m
    eaten = [[0] * m for _ in range(n)]
    cursor = [0] * n
    left = m
    current = [0] * n
    while left:
        eaters = [0] * m
        for i in range(n):
            order = profile[i]
            k = cursor[i]
            while not remaining[order[k]]:
                k += 1
            cursor[i] = k
            h = order[k]
            current[i] = h
            eaters[h] += 1
        best_r, best_c = 0, 0
        for h in range(m):
            c = eaters[h]
            if c and (not best_c or remaining[h] * best_c < best_r * c):
                best_r, best_c = remaining[h], c
        dt, rest = divmod(best_r, best_c)
        if rest:
            raise ArithmeticError("scale does not resolve PS event times")
        for h in range(m):
            c = eaters[h]
            if c:
                remaining[h] -= c * dt
                if not remaining[h]:
                    left -= 1
        for i in range(n):
            eaten[i][current[i]] += dt
    return eaten
