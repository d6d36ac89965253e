"""Command-line entry point: ``pslab <command> ...``.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import cultures
from .cultures import CultureConfig, fresh_seed, random_utilities
from .equilibria import census, spne_construct, verify_pne
from .experiments import ExperimentConfig, emit_figures_data, parse_cells, run_experiment, write_samples_csv
from .model import (
    Instance,
    PSLabError,
    classify_welfare,
    dump_instance,
    instance_to_json,
    load_instance,
    parse_rational,
    render_decimal,
    render_order,
    render_rational,
    social_welfare,
)
from .preflib import parse_legacy_soc, parse_soc, sample_instance
from .ps import ps_assignment, run_ps
from .selfcheck import run_selfcheck
from .strategy import best_response, run_dynamics
from .threat import check_threat_guarantees, threat_profile

log = logging.getLogger("pslab")


def _q(x) -> str:
    return render_rational(x)


def _matrix(rows) -> list[list[str]]:
    return [[_q(x) for x in row] for row in rows]


def _emit_json(doc) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _print_matrix(rows, approx: bool) -> None:
    cells = [[_q(x) + (f" (~{render_decimal(x)})" if approx else "") for x in row] for row in rows]
    width = max((len(c) for row in cells for c in row), default=1)
    print("     " + " ".join(f"h{j + 1}".rjust(width) for j in range(len(cells[0]) if cells else 0)))
    for i, row in enumerate(cells):
        print(f"{i + 1:>3}: " + " ".join(c.rjust(width) for c in row))


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    seed = fresh_seed()
    print(f"seed: {seed}", file=sys.stderr)
    args.seed = seed
    return seed


def _load(args, need_utilities: bool = False):
    instance, utilities = load_instance(args.instance)
    if utilities is None and need_utilities:
        utilities = random_utilities(instance, _seed(args))
    return instance, utilities


def _profile(args, instance: Instance):
    if not getattr(args, "profile", None):
        return instance.profile
    text = args.profile
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            doc = json.load(fh)
        orders = doc["preferences"] if isinstance(doc, dict) else doc
    else:
        try:
            orders = json.loads(text)
        except json.JSONDecodeError:
            raise PSLabError(f"--profile is neither a file nor a JSON array: {text!r}") from None
    return instance.with_profile(orders).profile


def _verdict_json(v) -> dict:
    w = v.witness
    return {
        "is_pne": v.is_pne,
        "witness": None if w is None else {
            "agent": w.agent + 1,
            "report": list(w.report),
            "old": _q(w.old_value) if isinstance(w.old_value, Fraction) else [_q(x) for x in w.old_value],
            "new": _q(w.new_value) if isinstance(w.new_value, Fraction) else [_q(x) for x in w.new_value],
        },
    }


def _verdict_text(v) -> str:
    if v.is_pne:
        return "PNE: yes"
    w = v.witness
    return f"PNE: no (agent {w.agent + 1} deviates to {render_order(w.report)})"


# --- commands ------------------------------------------------------------------

def cmd_ps(args) -> int:
    instance, _ = load_instance(args.instance)
    assignment, trace = run_ps(instance)
    if args.output == "json":
        doc = {"assignment": _matrix(assignment)}
        if args.approx:
            doc["approx"] = [[float(x) for x in row] for row in assignment]
        if args.trace:
            doc["trace"] = [{"t": _q(e.time), "finished": sorted(e.finished)} for e in trace.events]
        _emit_json(doc)
    elif args.output == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["agent"] + [f"h{j + 1}" for j in range(instance.m)])
        for i, row in enumerate(assignment):
            w.writerow([i + 1] + [_q(x) for x in row])
    else:
        _print_matrix(assignment, args.approx)
        if args.trace:
            for line in trace.render():
                print(line)
    return 0


def cmd_best_response(args) -> int:
    instance, utilities = _load(args, need_utilities=args.relation == "eu")
    agent = args.agent - 1
    if not 0 <= agent < instance.n:
        raise PSLabError(f"agent {args.agent} does not exist")
    br = best_response(instance, utilities, agent, args.relation, _profile(args, instance), args.bound)
    doc = {
        "agent": args.agent,
        "relation": args.relation,
        "order": list(br.order),
        "row": [_q(x) for x in br.row],
        "improves": br.improves,
    }
    if args.relation == "eu":
        doc["value"] = _q(br.value)
    if args.output == "json":
        _emit_json(doc)
    else:
        print(f"best response of agent {args.agent}: {render_order(br.order)}")
        print("allocation: " + " ".join(doc["row"]))
        if "value" in doc:
            print(f"expected utility: {doc['value']}")
        print(f"improves: {br.improves}")
    return 0


def cmd_dynamics(args) -> int:
    instance, utilities = _load(args, need_utilities=args.relation == "eu")
    out = run_dynamics(instance, utilities, args.policy, args.relation, args.max_steps, bound=args.bound)
    doc = {
        "terminal": out.terminal,
        "trajectory": [[list(o) for o in p] for p in out.trajectory],
        "start_index": out.start_index,
        "period": out.period,
        "steps": out.steps,
        "seed": getattr(args, "seed", None),
    }
    if args.output == "json":
        _emit_json(doc)
    else:
        for k, p in enumerate(out.trajectory):
            print(f"{k}: " + " | ".join(render_order(o) for o in p))
        extra = f" (start {out.start_index}, period {out.period})" if out.terminal == "cycle" else ""
        print(f"terminal: {out.terminal}{extra} after {out.steps} steps")
    return 0


def cmd_verify(args) -> int:
    instance, utilities = _load(args, need_utilities=args.relation == "eu")
    verdict = verify_pne(instance, utilities, _profile(args, instance), args.relation, args.report_bound)
    if args.output == "json":
        _emit_json(_verdict_json(verdict))
    else:
        print(_verdict_text(verdict))
    return 0


def cmd_enumerate(args) -> int:
    instance, utilities = _load(args, need_utilities=args.relation == "eu")
    c = census(instance, utilities, args.relation, jobs=args.jobs, bound=args.bound)
    sw_truthful = social_welfare(ps_assignment(instance), utilities) if utilities is not None else None

    def welfare(pid):
        if utilities is None:
            return None, None
        sw = c.social_welfare(pid) if c.eu_units is not None else None
        return sw, classify_welfare(sw, sw_truthful)[0]

    if args.output == "json":
        eqs = []
        for pid in c.pne_ids():
            profile = c.profile(pid)
            sw, cls = welfare(pid)
            eqs.append({
                "profile_id": pid,
                "profile": [list(o) for o in profile],
                "assignment": _matrix(ps_assignment(instance.with_profile(profile))),
                "sw": None if sw is None else _q(sw),
                "class": cls,
            })
        _emit_json({"profiles": c.size, "sw_truthful": None if sw_truthful is None else _q(sw_truthful),
                    "equilibria": eqs})
    elif args.output == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        header = ["profile_id", "is_pne", "sw", "class"] + (["sw_approx"] if args.approx else [])
        w.writerow(header)
        for pid in range(c.size):
            sw, cls = welfare(pid)
            row = [pid, int(c.is_pne.flat[pid]), "" if sw is None else _q(sw), cls or ""]
            if args.approx:
                row.append("" if sw is None else render_decimal(sw))
            w.writerow(row)
    else:
        ids = c.pne_ids()
        print(f"{len(ids)} of {c.size} profiles are pure Nash equilibria ({args.relation.upper()})")
        for pid in ids:
            sw, cls = welfare(pid)
            tail = "" if sw is None else f"  sw={_q(sw)} ({cls})"
            print(f"#{pid}: " + " | ".join(render_order(o) for o in c.profile(pid)) + tail)
    return 0


def cmd_spne(args) -> int:
    instance, utilities = _load(args, need_utilities=args.relation == "eu")
    quantum = parse_rational(args.quantum) if args.quantum else None
    res = spne_construct(instance, utilities, args.relation, quantum)
    if args.output == "json":
        _emit_json({
            "profile": [list(o) for o in res.profile],
            "verdict": _verdict_json(res.verdict),
            "quantum": _q(res.game.quantum),
            "depth": res.game.depth,
            "nodes": res.game.node_count,
            "leaf": _matrix(res.game.leaf),
        })
    else:
        print(f"quantum {_q(res.game.quantum)}, {res.game.depth} sub-stages, {res.game.node_count} states")
        for i, o in enumerate(res.profile):
            print(f"agent {i + 1}: {render_order(o)}")
        print(_verdict_text(res.verdict))
    return 0


def cmd_threat(args) -> int:
    instance, utilities = load_instance(args.instance)
    if instance.n != 2:
        raise PSLabError("the threat profile is defined for two agents")
    o1, o2 = instance.profile
    q1, q2 = threat_profile(o1, o2)
    doc = {"q1": list(q1), "q2": list(q2)}
    report = None
    if args.check:
        samples = [utilities] if utilities is not None else []
        seed = _seed(args)
        samples += [random_utilities(instance, cultures.derive_seed(seed, k)) for k in range(args.samples)]
        report = check_threat_guarantees(o1, o2, samples)
        doc["check"] = {
            "same_assignment": report.same_assignment,
            "dl_pne": report.dl_verdict.is_pne,
            "eu_pne": [v.is_pne for v in report.eu_verdicts],
            "falsified": report.falsified,
        }
    if args.output == "json":
        _emit_json(doc)
    else:
        print(f"Q1: {render_order(q1)}")
        print(f"Q2: {render_order(q2)}")
        if report is not None:
            print(f"same assignment as truthful: {report.same_assignment}")
            print(f"DL equilibrium: {report.dl_verdict.is_pne}")
            print(f"EU equilibrium for {len(report.eu_verdicts)} utility profiles: "
                  f"{all(v.is_pne for v in report.eu_verdicts)}")
    return 0 if report is None or report.ok else 1


def _write_instances(instances, out, prefix):
    if out is None:
        for inst, utils in instances:
            json.dump(instance_to_json(inst, utils), sys.stdout)
            sys.stdout.write("\n")
        return
    Path(out).mkdir(parents=True, exist_ok=True)
    for k, (inst, utils) in enumerate(instances):
        dump_instance(os.path.join(out, f"{prefix}_{k:04d}.json"), inst, utils)


def cmd_gen(args) -> int:
    seed = _seed(args)
    made = []
    for k in range(args.count):
        s = cultures.derive_seed(seed, k) if args.count > 1 else seed
        inst = cultures.generate(CultureConfig(args.model, args.n, args.m, s, args.phi))
        made.append((inst, random_utilities(inst, cultures.derive_seed(s, 1)) if args.utilities else None))
    _write_instances(made, args.out, args.model.lower())
    return 0


def cmd_import(args) -> int:
    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    doc = parse_legacy_soc(text) if args.legacy else parse_soc(text)
    if args.n is None:
        print(f"{doc.n_alternatives} alternatives, {doc.n_voters} voters, {len(doc.rows)} unique orders")
        return 0
    seed = _seed(args)
    m = args.m or doc.n_alternatives
    made = []
    for k in range(args.count):
        s = cultures.derive_seed(seed, k) if args.count > 1 else seed
        made.append((sample_instance(doc, args.n, m, s), None))
    _write_instances(made, args.out, "preflib")
    return 0


def cmd_experiment(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cells = parse_cells(fh.read())
    doc = None
    if args.preflib:
        with open(args.preflib, encoding="utf-8") as fh:
            text = fh.read()
        doc = parse_legacy_soc(text) if args.legacy else parse_soc(text)
    seed = _seed(args)
    config = ExperimentConfig(cells, seed=seed, jobs=args.jobs or os.cpu_count() or 1, phi=args.phi, preflib=doc)
    summaries = run_experiment(config)
    paths = emit_figures_data(summaries, args.out)
    write_samples_csv(summaries, Path(args.out) / "samples.csv")
    for s in summaries:
        if s.skipped:
            print(f"{s.cell.model} n={s.cell.n} m={s.cell.m}: skipped ({s.skipped})")
            continue
        fr = " ".join(f"{c}={render_decimal(s.fraction(c))}" for c in ("equal", "increase", "decrease")) \
            if s.total_pne else "no equilibria"
        print(f"{s.cell.model} n={s.cell.n} m={s.cell.m}: avg #PNE {render_decimal(s.mean_num_pne)}; {fr}; "
              f"max +{render_decimal(s.max_pct('increase'))}% / -{render_decimal(s.max_pct('decrease'))}% "
              f"[{s.wall_time:.1f}s]")
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_selfcheck(args) -> int:
    results = run_selfcheck()
    ok = all(r for _, r in results)
    if args.output == "json":
        _emit_json({"ok": ok, "checks": [{"name": n, "ok": r} for n, r in results]})
    else:
        for name, r in results:
            print(f"{'PASS' if r else 'FAIL'}  {name}")
    return 0 if ok else 1


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pslab", description="Exact Probabilistic Serial toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("human", "json", "csv"), default="human")
    common.add_argument("--approx", action="store_true", help="add decimal approximations next to exact values")

    def add(name, func, help_, instance=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        if instance:
            p.add_argument("--instance", required=True, help="instance JSON file")
        p.set_defaults(func=func)
        return p

    def relation(p):
        p.add_argument("--relation", choices=("eu", "dl"), default="eu")

    def seed(p):
        p.add_argument("--seed", type=int, help="seed for sampled utilities (printed when omitted)")

    p = add("ps", cmd_ps, "run the PS rule")
    p.add_argument("--trace", action="store_true")

    p = add("best-response", cmd_best_response, "exhaustive best response of one agent")
    p.add_argument("--agent", type=int, required=True, help="1-based agent")
    relation(p)
    seed(p)
    p.add_argument("--profile", help="reported profile: JSON array of 0-based orders, or a file")
    p.add_argument("--bound", type=int, default=8, help="largest m to enumerate")

    p = add("dynamics", cmd_dynamics, "best-response dynamics with cycle detection")
    p.add_argument("--policy", choices=("round-robin", "first-improving-agent"), default="round-robin")
    p.add_argument("--max-steps", type=int, default=1000)
    relation(p)
    seed(p)
    p.add_argument("--bound", type=int, default=8)

    p = add("verify", cmd_verify, "check a profile for profitable deviations")
    relation(p)
    seed(p)
    p.add_argument("--profile")
    p.add_argument("--report-bound", type=int, default=8)

    p = add("enumerate", cmd_enumerate, "enumerate all pure Nash equilibria")
    relation(p)
    seed(p)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--bound", type=int, default=None, help="profile budget (default PSLAB_BOUND or 10^7)")

    p = add("spne", cmd_spne, "equilibrium from the discretised eating game")
    relation(p)
    seed(p)
    p.add_argument("--quantum", help="sub-stage quantum, e.g. 1/4 (default from granularity)")

    p = add("threat", cmd_threat, "two-agent threat profile")
    p.add_argument("--check", action="store_true", help="verify its guarantees")
    p.add_argument("--samples", type=int, default=3, help="sampled utility profiles for --check")
    seed(p)

    p = add("gen", cmd_gen, "sample instances from a culture", instance=False)
    p.add_argument("--model", choices=cultures.MODELS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--utilities", action="store_true", help="attach Random utilities")
    p.add_argument("--out", help="directory for instance files (default stdout, one per line)")

    p = add("import", cmd_import, "convert a PrefLib SOC file into instances", instance=False)
    p.add_argument("file")
    p.add_argument("--legacy", action="store_true", help="legacy PrefLib header")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out")

    p = add("experiment", cmd_experiment, "welfare-at-equilibrium experiment", instance=False)
    p.add_argument("--config", required=True, help="lines of model,n,m,samples")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--phi", type=float, default=0.5)
    p.add_argument("--preflib", help="SOC file for cells with model PrefLib")
    p.add_argument("--legacy", action="store_true")

    add("selfcheck", cmd_selfcheck, "run the built-in known-answer checks", instance=False)
    return parser


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (PSLabError, OSError, json.JSONDecodeError) as exc:
        print(f"pslab: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
