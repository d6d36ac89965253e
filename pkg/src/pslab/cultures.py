"""Preference cultures (IC, SP-IC, Mallows, Urn) and the Random utility model.

Every generator is a pure function of its seed. Randomness comes from
NumPy's PCG64 bit generator, seeded with a 64-bit integer; per-sample seeds
are split from a root seed with :func:`derive_seed`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .model import Instance, LinearOrder, PSLabError, Row, UtilityProfile

MODELS = ("IC", "SP-IC", "Mallows", "Urn")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(root: int, *keys: int) -> int:
    """Split a 64-bit child seed from ``root`` and an integer path ``keys``.

    The child is the first 64-bit word of ``SeedSequence(root,
    spawn_key=keys)``, so children of distinct paths are independent and
    any sample can be regenerated from its own seed.
    """
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fresh_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CultureConfig:
    model: str
    n: int
    m: int
    seed: int
    phi: float = 0.5
    reference: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise PSLabError(f"unknown culture {self.model!r}; expected one of {MODELS}")
        if self.n < 1 or self.m < 1:
            raise PSLabError("need n >= 1 and m >= 1")
        if not 0 <= self.seed < 2**64:
            raise PSLabError("seed must be a 64-bit unsigned integer")
        if self.model == "Mallows":
            if not 0 < self.phi <= 1:
                raise PSLabError(f"Mallows dispersion must lie in (0, 1], got {self.phi}")
            if self.reference is not None and sorted(self.reference) != list(range(self.m)):
                raise PSLabError("Mallows reference is not a permutation of the houses")


def _shuffle(rng: np.random.Generator, m: int) -> LinearOrder:
    order = list(range(m))
    for i in range(m - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return tuple(order)


def gen_ic(config: CultureConfig) -> Instance:
    rng = make_rng(config.seed)
    return Instance(config.n, config.m, tuple(_shuffle(rng, config.m) for _ in range(config.n)))


def _single_peaked(rng: np.random.Generator, m: int) -> LinearOrder:
    # built from the bottom: each step drops the left or right end of the axis
    left, right = 0, m - 1
    bottom_up = []
    for _ in range(m - 1):
        if rng.integers(0, 2):
            bottom_up.append(left)
            left += 1
        else:
            bottom_up.append(right)
            right -= 1
    bottom_up.append(left)
    return tuple(reversed(bottom_up))


def is_single_peaked(order) -> bool:
    """Single-peaked on the axis h1 < h2 < ... < hm: every prefix of the
    order is a contiguous interval of the axis."""
    lo = hi = order[0]
    for h in order[1:]:
        if h == lo - 1:
            lo = h
        elif h == hi + 1:
            hi = h
        else:
            return False
    return True


def gen_sp_ic(config: CultureConfig) -> Instance:
    rng = make_rng(config.seed)
    return Instance(config.n, config.m, tuple(_single_peaked(rng, config.m) for _ in range(config.n)))


def _mallows(rng: np.random.Generator, reference, phi: float) -> LinearOrder:
    # repeated insertion: the k-th reference item lands at position j of k+1
    # slots with weight phi**(k - j), the number of inversions it creates
    order: list[int] = []
    for k, item in enumerate(reference):
        weights = [phi ** (k - j) for j in range(k + 1)]
        r = rng.random() * sum(weights)
        j = 0
        while j < k and r >= weights[j]:
            r -= weights[j]
            j += 1
        order.insert(j, item)
    return tuple(order)


def gen_mallows(config: CultureConfig) -> Instance:
    rng = make_rng(config.seed)
    reference = config.reference if config.reference is not None else tuple(range(config.m))
    return Instance(config.n, config.m, tuple(_mallows(rng, reference, config.phi) for _ in range(config.n)))


def urn_increment(m: int) -> int:
    """Weight added to a drawn order so that two consecutive draws match
    with probability 1/2: (1 + a)/(m! + a) = 1/2 gives a = m! - 2."""
    return max(math.factorial(m) - 2, 0)


def gen_urn(config: CultureConfig) -> Instance:
    rng = make_rng(config.seed)
    m = config.m
    total = math.factorial(m)
    a = urn_increment(m)
    drawn: list[LinearOrder] = []  # one entry per draw; extra weight a each
    orders = []
    for _ in range(config.n):
        r = int(rng.integers(0, total + a * len(drawn)))
        if r < total:
            order = _shuffle(rng, m)
        else:
            order = drawn[(r - total) // a]
        drawn.append(order)
        orders.append(order)
    return Instance(config.n, m, tuple(orders))


GENERATORS = {"IC": gen_ic, "SP-IC": gen_sp_ic, "Mallows": gen_mallows, "Urn": gen_urn}


def generate(config: CultureConfig) -> Instance:
    return GENERATORS[config.model](config)


def gen_random_utilities(order, seed: int | np.random.Generator) -> Row:
    """Random utility row consistent with ``order``, summing to exactly m.

    Draws m uniforms on (0, 1), redrawing the whole list on any repeat (or
    zero), sorts them decreasingly along ``order`` and rescales. Doubles are
    dyadic rationals, so the conversion to Fraction loses nothing.
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    m = len(order)
    while True:
        draws = [Fraction(float(x)) for x in rng.random(m)]
        if len(set(draws)) == m and min(draws) > 0:
            break
    draws.sort(reverse=True)
    scale = Fraction(m) / sum(draws)
    row = [Fraction(0)] * m
    for rank, h in enumerate(order):
        row[h] = draws[rank] * scale
    return tuple(row)


def random_utilities(instance: Instance, seed: int) -> UtilityProfile:
    return tuple(gen_random_utilities(order, derive_seed(seed, i)) for i, order in enumerate(instance.profile))


def kendall_tau(a, b) -> int:
    pos = {h: k for k, h in enumerate(b)}
    seq = [pos[h] for h in a]
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def mallows_probability(order, reference, phi: Fraction) -> Fraction:
    """Exact Mallows probability: phi**d / prod_k (1 + phi + ... + phi**(k-1))."""
    z = Fraction(1)
    for k in range(1, len(reference) + 1):
        z *= sum(Fraction(phi) ** j for j in range(k))
    return Fraction(phi) ** kendall_tau(order, reference) / z


def all_orders(m: int) -> list[LinearOrder]:
    return list(permutations(range(m)))
