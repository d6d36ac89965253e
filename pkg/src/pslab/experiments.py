"""Welfare of PS equilibria versus truthful reporting, over sampled instances.

For every sample: draw a profile from a culture plus Random utilities,
enumerate all EU pure Nash equilibria and classify each one by comparing
its social welfare (exactly) with the truthful profile's.
"""
from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .cultures import CultureConfig, derive_seed, generate, random_utilities
from .equilibria import census, profile_count, verify_pne
from .model import BoundExceeded, PSLabError, classify_welfare, profile_bound, render_decimal, social_welfare
from .preflib import PrefLibDocument, sample_instance
from .ps import ps_assignment

log = logging.getLogger(__name__)

CLASSES = ("equal", "increase", "decrease")
SAMPLE_FIELDS = (
    "model", "n", "m", "sample", "seed", "sw_truthful", "num_pne",
    "n_equal", "n_increase", "n_decrease", "max_pct_increase", "max_pct_decrease",
)


@dataclass(frozen=True)
class Cell:
    model: str
    n: int
    m: int
    samples: int


@dataclass
class ExperimentConfig:
    cells: list[Cell]
    seed: int = 0
    jobs: int = 1
    phi: float = 0.5
    bound: int | None = None
    preflib: PrefLibDocument | None = None
    # fraction of samples re-derived along the slow Fraction path
    crosscheck_every: int = 100


def parse_cells(text: str) -> list[Cell]:
    """``model,n,m,samples`` per line; blank lines and ``#`` comments ignored."""
    cells = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise PSLabError(f"config line {lineno}: expected model,n,m,samples")
        try:
            cells.append(Cell(parts[0], int(parts[1]), int(parts[2]), int(parts[3])))
        except ValueError:
            raise PSLabError(f"config line {lineno}: n, m and samples must be integers") from None
    return cells


@dataclass
class SampleResult:
    cell: Cell
    index: int
    seed: int
    sw_truthful: Fraction
    counts: dict[str, int]
    max_pct: dict[str, Fraction]
    wall_time: float = 0.0

    @property
    def num_pne(self) -> int:
        return sum(self.counts.values())

    def fractions(self) -> dict[str, Fraction]:
        total = self.num_pne
        return {c: Fraction(self.counts[c], total) for c in CLASSES}


@dataclass
class CellSummary:
    cell: Cell
    samples: list[SampleResult] = field(default_factory=list)
    wall_time: float = 0.0
    skipped: str | None = None

    @property
    def total_pne(self) -> int:
        return sum(s.num_pne for s in self.samples)

    def mean_count(self, cls: str) -> Fraction:
        return Fraction(sum(s.counts[cls] for s in self.samples), len(self.samples))

    @property
    def mean_num_pne(self) -> Fraction:
        return Fraction(self.total_pne, len(self.samples))

    def fraction(self, cls: str) -> Fraction:
        return Fraction(sum(s.counts[cls] for s in self.samples), self.total_pne)

    def max_pct(self, cls: str) -> Fraction:
        return max((s.max_pct[cls] for s in self.samples), default=Fraction(0))


def sample_instance_for(cell: Cell, seed: int, phi: float = 0.5, doc: PrefLibDocument | None = None):
    """Instance and Random utilities of one sample, regenerable from ``seed``."""
    if cell.model == "PrefLib":
        if doc is None:
            raise PSLabError("the PrefLib model needs a document")
        instance = sample_instance(doc, cell.n, cell.m, derive_seed(seed, 0))
    else:
        instance = generate(CultureConfig(cell.model, cell.n, cell.m, derive_seed(seed, 0), phi))
    return instance, random_utilities(instance, derive_seed(seed, 1))


def run_sample(cell: Cell, index: int, seed: int, phi: float = 0.5, doc=None, jobs: int = 1,
               bound: int | None = None, crosscheck: bool = False) -> SampleResult:
    start = time.perf_counter()
    instance, utilities = sample_instance_for(cell, seed, phi, doc)
    sw_truthful = social_welfare(ps_assignment(instance), utilities)
    c = census(instance, utilities, "eu", jobs=jobs, bound=bound)
    counts = dict.fromkeys(CLASSES, 0)
    max_pct = dict.fromkeys(CLASSES, Fraction(0))
    for pid in c.pne_ids():
        sw = c.social_welfare(pid)
        cls, pct = classify_welfare(sw, sw_truthful)
        counts[cls] += 1
        max_pct[cls] = max(max_pct[cls], pct)
        if crosscheck:
            profile = c.profile(pid)
            slow = social_welfare(ps_assignment(instance.with_profile(profile)), utilities)
            if slow != sw or classify_welfare(slow, sw_truthful)[0] != cls:
                raise AssertionError(f"welfare mismatch on sample {seed} profile {pid}")
    if crosscheck:
        # equilibrium status of the first few profiles along the deviation-search path
        for pid in range(min(c.size, 5)):
            if verify_pne(instance, utilities, c.profile(pid)).is_pne != bool(c.is_pne.flat[pid]):
                raise AssertionError(f"equilibrium mismatch on sample {seed} profile {pid}")
    return SampleResult(cell, index, seed, sw_truthful, counts, max_pct, time.perf_counter() - start)


def _run_sample_task(args):
    return run_sample(*args)


def run_experiment(config: ExperimentConfig) -> list[CellSummary]:
    """Run every cell; cells over the enumeration budget are skipped.

    Sample k of cell c uses seed ``derive_seed(config.seed, c, k)``; results
    are folded in sample order, so output does not depend on ``jobs``.
    """
    bound = profile_bound() if config.bound is None else config.bound
    summaries = []
    for ci, cell in enumerate(config.cells):
        summary = CellSummary(cell)
        summaries.append(summary)
        if profile_count(cell.n, cell.m) > bound:
            summary.skipped = f"(m!)^n = {profile_count(cell.n, cell.m)} exceeds bound {bound}"
            log.warning("skipping %s: %s", cell, summary.skipped)
            continue
        start = time.perf_counter()
        outer = config.jobs > 1 and cell.samples > 1
        tasks = [
            (cell, k, derive_seed(config.seed, ci, k), config.phi, config.preflib,
             1 if outer else config.jobs, bound,
             config.crosscheck_every > 0 and k % config.crosscheck_every == 0)
            for k in range(cell.samples)
        ]
        try:
            if outer:
                with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                    summary.samples = list(pool.map(_run_sample_task, tasks))
            else:
                summary.samples = [_run_sample_task(t) for t in tasks]
        except BoundExceeded as exc:
            summary.skipped = str(exc)
            summary.samples = []
        summary.wall_time = time.perf_counter() - start
        log.info("%s done in %.2fs", cell, summary.wall_time)
    return summaries


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def emit_figures_data(summaries: list[CellSummary], out_dir: str | os.PathLike) -> tuple[Path, Path]:
    """Write ``classification.csv`` and ``extremes.csv`` (one row per cell
    that ran; fractions and percentages rounded to 4 decimals)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cls_path, ext_path = out / "classification.csv", out / "extremes.csv"
    done = [s for s in summaries if not s.skipped and s.samples]
    with open(cls_path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["model", "n", "m", "frac_equal", "frac_increase", "frac_decrease"])
        for s in done:
            fracs = [render_decimal(s.fraction(c)) if s.total_pne else "" for c in CLASSES]
            w.writerow([s.cell.model, s.cell.n, s.cell.m, *fracs])
    with open(ext_path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(["model", "n", "m", "max_pct_increase", "max_pct_decrease", "avg_num_pne"])
        for s in done:
            w.writerow([
                s.cell.model, s.cell.n, s.cell.m,
                render_decimal(s.max_pct("increase")), render_decimal(s.max_pct("decrease")),
                render_decimal(s.mean_num_pne),
            ])
    return cls_path, ext_path


def write_samples_csv(summaries: list[CellSummary], path: str | os.PathLike) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _csv_writer(fh)
        w.writerow(SAMPLE_FIELDS)
        for s in summaries:
            for r in s.samples:
                w.writerow([
                    r.cell.model, r.cell.n, r.cell.m, r.index, r.seed, render_decimal(r.sw_truthful),
                    r.num_pne, r.counts["equal"], r.counts["increase"], r.counts["decrease"],
                    render_decimal(r.max_pct["increase"]), render_decimal(r.max_pct["decrease"]),
                ])
    return path
