"""Shared domain types: instances, linear orders, assignments and utilities.

All fractional quantities are :class:`fractions.Fraction` values, so every
computation in the library is exact. Agents and houses are 0-indexed
internally and rendered 1-indexed (``h1..hm``, agents ``1..n``).
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

LinearOrder = tuple[int, ...]
Row = tuple[Fraction, ...]
Assignment = tuple[Row, ...]
UtilityProfile = tuple[Row, ...]

DEFAULT_PROFILE_BOUND = 10**7
DEFAULT_REPORT_BOUND = 8


class PSLabError(ValueError):
    """Base class for domain errors (CLI exit code 1)."""


class BoundExceeded(PSLabError):
    pass


class DimensionError(PSLabError):
    pass


def profile_bound() -> int:
    """Global budget on enumerated profiles; ``PSLAB_BOUND`` overrides it."""
    raw = os.environ.get("PSLAB_BOUND")
    return int(raw) if raw else DEFAULT_PROFILE_BOUND


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text: str | int | Fraction) -> Fraction:
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    match = _RATIONAL_RE.match(text)
    if not match:
        raise PSLabError(f"not a rational: {text!r}")
    num, den = match.groups()
    if den is not None and int(den) == 0:
        raise PSLabError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def render_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def render_decimal(q: Fraction, places: int = 4) -> str:
    """Exact rational rounded (half-to-even) to a fixed number of decimals."""
    scaled = round(Fraction(q) * 10**places)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def render_order(order: Sequence[int]) -> str:
    return ",".join(f"h{h + 1}" for h in order)


def parse_order(text: str) -> LinearOrder:
    """Parse ``h2,h1,h3`` (1-based names) or ``1,0,2`` (0-based indices)."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if parts and all(p.lower().startswith("h") for p in parts):
        return tuple(int(p[1:]) - 1 for p in parts)
    return tuple(int(p) for p in parts)


def check_order(order: Sequence[int], m: int) -> LinearOrder:
    order = tuple(order)
    if sorted(order) != list(range(m)):
        raise PSLabError(f"order {order} is not a permutation of 0..{m - 1}")
    return order


@dataclass(frozen=True)
class Instance:
    """An assignment problem: ``n`` agents, ``m`` houses, strict orders."""

    n: int
    m: int
    profile: tuple[LinearOrder, ...]

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise PSLabError("need at least one agent and one house")
        if len(self.profile) != self.n:
            raise PSLabError(f"expected {self.n} orders, got {len(self.profile)}")
        object.__setattr__(
            self, "profile", tuple(check_order(o, self.m) for o in self.profile)
        )

    @classmethod
    def from_orders(cls, orders: Iterable[Sequence[int]]) -> Instance:
        orders = [tuple(o) for o in orders]
        if not orders:
            raise PSLabError("empty profile")
        return cls(len(orders), len(orders[0]), tuple(orders))

    def with_profile(self, profile: Sequence[Sequence[int]]) -> Instance:
        return Instance(self.n, self.m, tuple(tuple(o) for o in profile))


def as_utilities(rows: Iterable[Iterable]) -> UtilityProfile:
    return tuple(tuple(parse_rational(x) for x in row) for row in rows)


def check_assignment(assignment: Sequence[Sequence[Fraction]], n: int, m: int) -> None:
    """Raise if entries leave [0, 1], a column does not sum to 1, or a row
    does not sum to m/n."""
    if len(assignment) != n or any(len(row) != m for row in assignment):
        raise DimensionError(f"assignment is not {n}x{m}")
    for i, row in enumerate(assignment):
        for j, x in enumerate(row):
            if not 0 <= x <= 1:
                raise PSLabError(f"entry ({i},{j}) = {x} outside [0,1]")
        if sum(row, Fraction(0)) != Fraction(m, n):
            raise PSLabError(f"row {i} sums to {sum(row)} not {Fraction(m, n)}")
    for j in range(m):
        col = sum((assignment[i][j] for i in range(n)), Fraction(0))
        if col != 1:
            raise PSLabError(f"column {j} sums to {col}")


def check_utilities(utilities: UtilityProfile, instance: Instance) -> None:
    """Utilities must be nonnegative and strictly decrease along each order."""
    if len(utilities) != instance.n or any(len(r) != instance.m for r in utilities):
        raise DimensionError(f"utilities are not {instance.n}x{instance.m}")
    for i, (row, order) in enumerate(zip(utilities, instance.profile)):
        if any(u < 0 for u in row):
            raise PSLabError(f"agent {i + 1} has a negative utility")
        ranked = [row[h] for h in order]
        if any(a <= b for a, b in zip(ranked, ranked[1:])):
            raise PSLabError(f"utilities of agent {i + 1} are inconsistent with the order")


def borda_utilities(instance: Instance) -> UtilityProfile:
    """Utility m-j for the j-th ranked house (j = 1..m)."""
    rows = []
    for order in instance.profile:
        row = [Fraction(0)] * instance.m
        for rank, h in enumerate(order):
            row[h] = Fraction(instance.m - 1 - rank)
        rows.append(tuple(row))
    return tuple(rows)


def social_welfare(assignment: Sequence[Sequence[Fraction]], utilities: Sequence[Sequence[Fraction]]) -> Fraction:
    if len(assignment) != len(utilities):
        raise DimensionError("assignment and utilities have different agent counts")
    total = Fraction(0)
    for p_row, u_row in zip(assignment, utilities):
        if len(p_row) != len(u_row):
            raise DimensionError("assignment and utilities have different house counts")
        total += sum((p * u for p, u in zip(p_row, u_row)), Fraction(0))
    return total


@dataclass(frozen=True)
class WelfareRecord:
    profile_id: int
    sw: Fraction
    cls: str
    pct_change: Fraction


@dataclass(frozen=True)
class WelfareReport:
    sw_truthful: Fraction
    records: tuple[WelfareRecord, ...]


def classify_welfare(sw: Fraction, sw_truthful: Fraction) -> tuple[str, Fraction]:
    """Class (equal/increase/decrease) and percentage change versus truthful SW."""
    if sw == sw_truthful:
        return "equal", Fraction(0)
    pct = abs(sw - sw_truthful) / sw_truthful * 100
    return ("increase" if sw > sw_truthful else "decrease"), pct


def welfare_report(sw_truthful: Fraction, welfare: Iterable[tuple[int, Fraction]]) -> WelfareReport:
    records = []
    for pid, sw in welfare:
        cls, pct = classify_welfare(sw, sw_truthful)
        records.append(WelfareRecord(pid, sw, cls, pct))
    return WelfareReport(sw_truthful, tuple(records))


# --- JSON interchange -------------------------------------------------------

def instance_to_json(instance: Instance, utilities: UtilityProfile | None = None) -> dict:
    doc = {"n": instance.n, "m": instance.m, "preferences": [list(o) for o in instance.profile]}
    if utilities is not None:
        doc["utilities"] = [[render_rational(u) for u in row] for row in utilities]
    return doc


def instance_from_json(doc: dict) -> tuple[Instance, UtilityProfile | None]:
    try:
        instance = Instance(int(doc["n"]), int(doc["m"]), tuple(tuple(o) for o in doc["preferences"]))
    except KeyError as exc:
        raise PSLabError(f"instance is missing field {exc}") from None
    utilities = None
    if doc.get("utilities") is not None:
        utilities = as_utilities(doc["utilities"])
        if len(utilities) != instance.n or any(len(r) != instance.m for r in utilities):
            raise DimensionError("utilities do not match n x m")
    return instance, utilities


def load_instance(path: str) -> tuple[Instance, UtilityProfile | None]:
    with open(path, encoding="utf-8") as fh:
        return instance_from_json(json.load(fh))


def dump_instance(path: str, instance: Instance, utilities: UtilityProfile | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(instance_to_json(instance, utilities), fh)
        fh.write("\n")
