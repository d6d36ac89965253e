"""PrefLib SOC (strict complete orders) parsing, rendering and sampling."""
from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate

from .cultures import make_rng
from .model import Instance, PSLabError


class PrefLibError(PSLabError):
    pass


@dataclass(frozen=True)
class PrefLibDocument:
    n_alternatives: int
    names: tuple[str, ...]
    # (multiplicity, order of 0-based alternative indices)
    rows: tuple[tuple[int, tuple[int, ...]], ...]
    # metadata lines we do not interpret, without the leading "# "
    comments: tuple[str, ...] = field(default=())

    @property
    def n_voters(self) -> int:
        return sum(c for c, _ in self.rows)


_META_RE = re.compile(r"^#\s*([^:]+?)\s*:\s*(.*)$")
_ALT_NAME_RE = re.compile(r"^ALTERNATIVE NAME (\d+)$")
_DERIVED_KEYS = {"NUMBER ALTERNATIVES", "NUMBER VOTERS", "NUMBER UNIQUE ORDERS", "DATA TYPE"}


def _parse_int(text: str, what: str, lineno: int) -> int:
    text = text.strip()
    if not re.fullmatch(r"\d+", text):
        raise PrefLibError(f"line {lineno}: {what} {text!r} is not a non-negative integer")
    return int(text)


def _parse_order(items: list[str], m: int, lineno: int) -> tuple[int, ...]:
    if any("{" in s or "}" in s for s in items):
        raise PrefLibError(f"line {lineno}: ties are not supported (SOC only)")
    order = []
    for s in items:
        alt = _parse_int(s, "alternative id", lineno)
        if not 1 <= alt <= m:
            raise PrefLibError(f"line {lineno}: unknown alternative {alt}")
        if alt - 1 in order:
            raise PrefLibError(f"line {lineno}: duplicate alternative {alt}")
        order.append(alt - 1)
    if len(order) != m:
        raise PrefLibError(f"line {lineno}: incomplete order ranks {len(order)} of {m} alternatives")
    return tuple(order)


def _check_counts(doc: PrefLibDocument, voters: int | None, unique: int | None) -> PrefLibDocument:
    if voters is not None and voters != doc.n_voters:
        raise PrefLibError(f"header declares {voters} voters, rows sum to {doc.n_voters}")
    if unique is not None and unique != len(doc.rows):
        raise PrefLibError(f"header declares {unique} unique orders, found {len(doc.rows)}")
    return doc


def _header_alternatives(meta: dict[str, str]) -> int:
    dtype = meta.get("DATA TYPE", "soc").strip().lower()
    if dtype != "soc":
        raise PrefLibError(f"data type {dtype!r} is not supported; only strict complete orders (soc)")
    if "NUMBER ALTERNATIVES" not in meta:
        raise PrefLibError("missing '# NUMBER ALTERNATIVES' header")
    return _parse_int(meta["NUMBER ALTERNATIVES"], "alternative count", 0)


def parse_soc(text: str) -> PrefLibDocument:
    """Parse the current PrefLib format: ``# KEY: value`` metadata followed by
    ``count: a,b,c`` rows with 1-based alternative ids. Strict: malformed
    lines raise :class:`PrefLibError`."""
    meta: dict[str, str] = {}
    names: dict[int, str] = {}
    comments = []
    rows = []
    m = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if rows:
                raise PrefLibError(f"line {lineno}: metadata after the first order")
            match = _META_RE.match(line)
            if not match:
                comments.append(line[1:].strip())
                continue
            key, value = match.groups()
            alt = _ALT_NAME_RE.match(key)
            if alt:
                names[int(alt.group(1))] = value
            elif key in _DERIVED_KEYS:
                meta[key] = value
            else:
                comments.append(f"{key}: {value}")
            continue
        if m is None:
            m = _header_alternatives(meta)
        count, sep, rest = line.partition(":")
        if not sep:
            raise PrefLibError(f"line {lineno}: expected 'count: order'")
        multiplicity = _parse_int(count, "multiplicity", lineno)
        if multiplicity < 1:
            raise PrefLibError(f"line {lineno}: multiplicity must be at least 1")
        rows.append((multiplicity, _parse_order(rest.split(","), m, lineno)))
    if m is None:
        m = _header_alternatives(meta)
    if set(names) - set(range(1, m + 1)):
        raise PrefLibError("alternative name for an unknown alternative")
    doc = PrefLibDocument(m, tuple(names.get(k, str(k)) for k in range(1, m + 1)), tuple(rows), tuple(comments))
    voters = meta.get("NUMBER VOTERS")
    unique = meta.get("NUMBER UNIQUE ORDERS")
    return _check_counts(
        doc,
        _parse_int(voters, "voter count", 0) if voters is not None else None,
        _parse_int(unique, "unique order count", 0) if unique is not None else None,
    )


def parse_legacy_soc(text: str) -> PrefLibDocument:
    """Parse the legacy header: alternative count, ``id,name`` lines, a
    ``voters,sum,unique`` line, then ``count,a,b,c`` rows."""
    lines = [(k, raw.strip()) for k, raw in enumerate(text.splitlines(), 1) if raw.strip()]
    if not lines:
        raise PrefLibError("empty legacy file")
    it = iter(lines)
    lineno, first = next(it)
    m = _parse_int(first, "alternative count", lineno)
    names = []
    for k in range(1, m + 1):
        try:
            lineno, line = next(it)
        except StopIteration:
            raise PrefLibError("truncated alternative list") from None
        ident, sep, name = line.partition(",")
        if not sep or _parse_int(ident, "alternative id", lineno) != k:
            raise PrefLibError(f"line {lineno}: expected alternative {k} as 'id,name'")
        names.append(name.strip())
    try:
        lineno, line = next(it)
    except StopIteration:
        raise PrefLibError("missing voter count line") from None
    parts = line.split(",")
    if len(parts) != 3:
        raise PrefLibError(f"line {lineno}: expected 'voters,sum,unique'")
    voters, _, unique = (_parse_int(p, "count", lineno) for p in parts)
    rows = []
    for lineno, line in it:
        count, *items = line.split(",")
        multiplicity = _parse_int(count, "multiplicity", lineno)
        if multiplicity < 1:
            raise PrefLibError(f"line {lineno}: multiplicity must be at least 1")
        rows.append((multiplicity, _parse_order(items, m, lineno)))
    return _check_counts(PrefLibDocument(m, tuple(names), tuple(rows)), voters, unique)


def render_soc(doc: PrefLibDocument) -> str:
    """Render in the current format (LF line endings)."""
    lines = [f"# {c}" for c in doc.comments]
    lines.append("# DATA TYPE: soc")
    lines.append(f"# NUMBER ALTERNATIVES: {doc.n_alternatives}")
    lines.extend(f"# ALTERNATIVE NAME {k}: {name}" for k, name in enumerate(doc.names, 1))
    lines.append(f"# NUMBER VOTERS: {doc.n_voters}")
    lines.append(f"# NUMBER UNIQUE ORDERS: {len(doc.rows)}")
    lines.extend(f"{c}: {','.join(str(a + 1) for a in order)}" for c, order in doc.rows)
    return "\n".join(lines) + "\n"


def sample_instance(doc: PrefLibDocument, n: int, m: int, seed: int) -> Instance:
    """Restrict to a uniformly random m-subset of alternatives and draw n
    voters with replacement (weighted by multiplicity). Houses are the kept
    alternatives in ascending id order."""
    if not doc.rows:
        raise PrefLibError("cannot sample from an empty document")
    if not 1 <= m <= doc.n_alternatives:
        raise PrefLibError(f"m = {m} exceeds the {doc.n_alternatives} alternatives")
    rng = make_rng(seed)
    kept = sorted(int(a) for a in rng.choice(doc.n_alternatives, size=m, replace=False))
    house = {a: k for k, a in enumerate(kept)}
    cumulative = list(accumulate(c for c, _ in doc.rows))
    picks = [bisect_right(cumulative, int(rng.integers(0, cumulative[-1]))) for _ in range(n)]
    orders = tuple(tuple(house[a] for a in doc.rows[k][1] if a in house) for k in picks)
    return Instance(n, m, orders)
