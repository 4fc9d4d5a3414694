"""Command line front end: build, reduce, solve, verify, diagram, export, bench."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io, milp, model, presets, reduce as reduce_mod, solve as solve_mod, verify


def _load_scenario(path: str):
    doc = json.loads(Path(path).read_text())
    return io.parse_scenario(doc), io.scenario_hash(doc)


def _params_from_args(args) -> solve_mod.SolveParams:
    return solve_mod.SolveParams(
        time_limit=args.time_limit,
        gap=args.gap,
        seed=args.seed,
        node_selection=args.node_selection,
    )


def cmd_build(args) -> int:
    scenario, _ = _load_scenario(args.scenario)
    net = model.build_network(scenario)
    stats = net.stats()
    print(f"events:      {stats['events']}")
    print(f"activities:  {stats['activities']}")
    for kind in sorted(stats["by_kind"]):
        print(f"  {kind}: {stats['by_kind'][kind]}")
    print(f"conflicts:   {stats['conflicts']}")
    print(f"rerouted:    {stats['rerouted']}")
    violations = model.validate_safety_margins(net)
    if violations:
        print(f"margin violations: {len(violations)}")
        for v in violations:
            print(
                f"  {v.conflict.a} / {v.conflict.b}: margin {v.margin}"
                f" needs > {v.required_above:g}"
            )
    else:
        print("margin violations: none")
    return 0


def cmd_reduce(args) -> int:
    scenario, _ = _load_scenario(args.scenario)
    net = model.build_network(scenario)
    full = milp.formulate(net)
    fixed = reduce_mod.fix_natural_precedences(net)
    reduced, cmap = reduce_mod.contract_chains(net, fixed)
    rmod = milp.formulate(reduced, fixed=fixed.values)
    n_full, n_red = len(full.free_binaries()), len(rmod.free_binaries())
    print(f"binaries:  {n_full} -> {n_red}")
    print(f"integers:  {len(full.integer_vars())} -> {len(rmod.integer_vars())}")
    print(f"chains:    {len(cmap.chains)}")
    print(f"fixed:     {len(fixed)}")
    if n_red:
        print(f"reduction: {n_full / n_red:.2f}x")
    return 0


def cmd_export_lp(args) -> int:
    scenario, _ = _load_scenario(args.scenario)
    net = model.build_network(scenario)
    if args.reduced:
        fixed = reduce_mod.fix_natural_precedences(net)
        net, _ = reduce_mod.contract_chains(net, fixed)
        mod = milp.formulate(net, extended=args.extended_objective, fixed=fixed.values)
    else:
        mod = milp.formulate(net, extended=args.extended_objective)
    text = milp.export_model(mod)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    scenario, digest = _load_scenario(args.scenario)
    params = _params_from_args(args)
    if args.budget_60s:
        params.time_limit = 60.0
        params.node_selection = "best-estimate"

    def progress(p: solve_mod.Progress):
        primal = "--" if p.primal is None else f"{p.primal:g}"
        sys.stderr.write(
            f"\r  nodes {p.nodes}  primal {primal}  bound {p.dual:.2f}  "
            f"elapsed {p.elapsed:.1f}s "
        )

    out = solve_mod.solve_scenario(
        scenario,
        params=params,
        extended=args.extended_objective,
        progress=progress if not args.quiet else None,
    )
    if not args.quiet:
        sys.stderr.write("\n")
    r = out.result
    print(f"status:    {r.status}")
    print(f"objective: {'--' if r.objective is None else r.objective}")
    print(f"bound:     {'--' if r.bound is None else round(r.bound, 2)}")
    print(f"nodes:     {r.nodes}")
    print(f"time:      {r.wall_time:.2f}s")
    if out.report is not None:
        c = out.report.counts
        print(
            f"served {c['served']}, cancelled {c['cancelled']}, "
            f"turns {c['turns']}, returns {c['returns']}, "
            f"replacements {c['replacements']}"
        )
    if args.out and out.solution is not None:
        doc = io.write_solution(out.solution, out.report, digest)
        Path(args.out).write_text(json.dumps(doc, indent=2))
        print(f"wrote {args.out}")
    return 0 if r.status in ("optimal", "feasible") else 1


def cmd_verify(args) -> int:
    scenario, digest = _load_scenario(args.scenario)
    doc = json.loads(Path(args.solution).read_text())
    solution, _ = io.read_solution(doc, expected_digest=digest)
    net = model.build_network(scenario)
    report = verify.validate_solution(
        net, scenario, solution, extended=args.extended_objective
    )
    print(f"pass:      {report.ok}")
    print(f"objective: {report.objective}")
    for key in sorted(report.counts):
        print(f"{key}: {report.counts[key]}")
    for v in report.violations:
        print(f"  [{v.tag}] {v.message}")
    return 0 if report.ok else 1


def cmd_diagram(args) -> int:
    scenario, digest = _load_scenario(args.scenario)
    doc = json.loads(Path(args.solution).read_text())
    solution, _ = io.read_solution(doc, expected_digest=digest)
    svg = io.render_time_space_diagram(scenario, solution)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


def cmd_bench(args) -> int:
    durations = [int(d) for d in args.durations.split(",")]
    scenarios = []
    for dur in durations:
        doc = presets.u6_like_document(
            cycle_time=args.cycle, blockage_minutes=dur
        )
        scenarios.append((f"dur{dur}", io.parse_scenario(doc)))
    params = solve_mod.SolveParams(time_limit=args.time_limit, gap=args.gap)
    rows = io.run_benchmark(scenarios, params=params, budget_60s=not args.skip_60s)
    print(io.format_benchmark_table(rows))
    if args.out:
        Path(args.out).write_text(io.rows_to_csv(rows))
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="railrecover",
        description="Disruption recovery for a single rail line",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solution=False):
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        if solution:
            p.add_argument("--solution", required=True, help="solution JSON path")

    p = sub.add_parser("build", help="build the event-activity network")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("reduce", help="report fixing/contraction statistics")
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("export-lp", help="write the model in LP text format")
    common(p)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--reduced", action="store_true", help="export the reduced model")
    p.add_argument("--extended-objective", action="store_true")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("solve", help="solve a scenario")
    common(p)
    p.add_argument("--time-limit", type=float, default=None, metavar="S")
    p.add_argument("--gap", type=float, default=0.0, metavar="F")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--budget-60s", action="store_true",
                   help="60 s budget with best-estimate node selection")
    p.add_argument("--node-selection", default="best-bound",
                   choices=["best-bound", "best-estimate", "depth-first"])
    p.add_argument("--extended-objective", action="store_true")
    p.add_argument("--out", help="write the solution document here")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="validate a solution file")
    common(p, solution=True)
    p.add_argument("--extended-objective", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diagram", help="render the time-space diagram")
    common(p, solution=True)
    p.add_argument("--out", required=True, help="SVG output path")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("bench", help="benchmark table over blockage durations")
    p.add_argument("--durations", default="5,10,15,20,30", metavar="MIN,MIN,..")
    p.add_argument("--cycle", type=int, default=600, metavar="S")
    p.add_argument("--time-limit", type=float, default=300.0, metavar="S")
    p.add_argument("--gap", type=float, default=0.0, metavar="F")
    p.add_argument("--skip-60s", action="store_true",
                   help="skip the extra 60 s-budget column")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_bench)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except io.ScenarioFormatError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
