"""Comparing one agent's allocations under the DL and EU relations."""
from __future__ import annotations

import enum
from fractions import Fraction
from typing import Sequence

from .model import DimensionError


class Comparison(enum.Enum):
    FIRST = "FirstPreferred"
    SECOND = "SecondPreferred"
    INDIFFERENT = "Indifferent"


def _cmp(a, b) -> Comparison:
    if a > b:
        return Comparison.FIRST
    if a < b:
        return Comparison.SECOND
    return Comparison.INDIFFERENT


def dl_key(row: Sequence[Fraction], order: Sequence[int]) -> tuple:
    """The row read along ``order``; DL preference is lexicographic order on it."""
    if len(row) != len(order):
        raise DimensionError("row and order have different lengths")
    return tuple(row[h] for h in order)


def dl_compare(row_p: Sequence[Fraction], row_q: Sequence[Fraction], order: Sequence[int]) -> Comparison:
    if len(row_p) != len(row_q):
        raise DimensionError("rows have different lengths")
    for h in order:
        if row_p[h] != row_q[h]:
            return Comparison.FIRST if row_p[h] > row_q[h] else Comparison.SECOND
    return Comparison.INDIFFERENT


def eu_value(row: Sequence[Fraction], agent_utils: Sequence[Fraction]) -> Fraction:
    if len(row) != len(agent_utils):
        raise DimensionError("row and utilities have different lengths")
    return sum((Fraction(p) * u for p, u in zip(row, agent_utils)), Fraction(0))


def eu_compare(row_p, row_q, agent_utils) -> Comparison:
    if len(row_p) != len(row_q):
        raise DimensionError("rows have different lengths")
    return _cmp(eu_value(row_p, agent_utils), eu_value(row_q, agent_utils))
