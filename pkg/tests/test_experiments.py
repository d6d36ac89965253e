from pathlib import Path

import pytest

from oracles import brute_force_pne
from pslab.experiments import (
    Cell, ExperimentConfig, emit_figures_data, parse_cells, run_experiment, sample_instance_for, write_samples_csv,
)
from pslab.model import PSLabError, classify_welfare, social_welfare
from pslab.preflib import parse_soc
from pslab.ps import ps_assignment
from pslab.relations import eu_value

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden_ic_2_3"
GOLDEN_CELLS = [Cell("IC", 2, 3, 10), Cell("SP-IC", 2, 3, 5)]


def _run(tmp_path, jobs=1, cells=GOLDEN_CELLS, seed=42):
    summaries = run_experiment(ExperimentConfig(list(cells), seed=seed, jobs=jobs))
    emit_figures_data(summaries, tmp_path)
    write_samples_csv(summaries, tmp_path / "samples.csv")
    return summaries


@pytest.mark.parametrize("name", ["classification.csv", "extremes.csv", "samples.csv"])
def test_golden_csv(tmp_path, name):
    _run(tmp_path)
    assert (tmp_path / name).read_bytes() == (GOLDEN / name).read_bytes()


def test_output_does_not_depend_on_jobs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _run(a, jobs=1)
    _run(b, jobs=2)
    for name in ("classification.csv", "extremes.csv", "samples.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_samples_match_brute_force():
    summaries = run_experiment(ExperimentConfig([Cell("IC", 2, 3, 6)], seed=42))
    for r in summaries[0].samples:
        inst, u = sample_instance_for(r.cell, r.seed)
        ps = lambda prof: ps_assignment(inst.with_profile(prof))
        pne = brute_force_pne(inst, lambda i, row: eu_value(row, u[i]), ps)
        truthful = social_welfare(ps_assignment(inst), u)
        counts = {"equal": 0, "increase": 0, "decrease": 0}
        for prof in pne:
            counts[classify_welfare(social_welfare(ps(prof), u), truthful)[0]] += 1
        assert counts == r.counts and truthful == r.sw_truthful


def test_fractions_sum_to_one(tmp_path):
    for s in _run(tmp_path):
        assert sum(s.fraction(c) for c in ("equal", "increase", "decrease")) == 1


def test_single_agent_cell_is_all_equal(tmp_path):
    [s] = _run(tmp_path, cells=[Cell("Mallows", 1, 3, 4)])
    assert s.fraction("equal") == 1
    assert s.mean_num_pne == 6  # every report of a lone agent is an equilibrium


def test_oversized_cell_is_skipped(tmp_path):
    summaries = run_experiment(ExperimentConfig([Cell("IC", 2, 3, 2)], bound=10))
    assert summaries[0].skipped and not summaries[0].samples
    emit_figures_data(summaries, tmp_path)
    assert (tmp_path / "classification.csv").read_text().count("\n") == 1


def test_preflib_cell():
    doc = parse_soc((DATA / "fixture.soc").read_text())
    [s] = run_experiment(ExperimentConfig([Cell("PrefLib", 2, 3, 3)], seed=3, preflib=doc))
    assert len(s.samples) == 3 and s.total_pne >= 3
    with pytest.raises(PSLabError):
        run_experiment(ExperimentConfig([Cell("PrefLib", 2, 3, 1)]))


def test_parse_cells():
    assert parse_cells("# grid\nIC, 4, 3, 30\n\nUrn,2,2,5  # small\n") == [Cell("IC", 4, 3, 30), Cell("Urn", 2, 2, 5)]
    with pytest.raises(PSLabError):
        parse_cells("IC,4,3")
    with pytest.raises(PSLabError):
        parse_cells("IC,4,x,3")


def test_every_small_sample_has_an_equilibrium():
    [s] = run_experiment(ExperimentConfig([Cell("IC", 2, 2, 30)], seed=1))
    assert all(r.num_pne >= 1 for r in s.samples)


def test_empty_and_single_cell_csvs(tmp_path):
    emit_figures_data([], tmp_path / "empty")
    assert (tmp_path / "empty" / "classification.csv").read_text().count("\n") == 1
    assert (tmp_path / "empty" / "extremes.csv").read_text().count("\n") == 1
    _run(tmp_path / "one", cells=[Cell("Urn", 2, 2, 3)])
    for name in ("classification.csv", "extremes.csv"):
        assert (tmp_path / "one" / name).read_text().count("\n") == 2
