"""Acceptance suite: one test per release criterion, each printing a
PASS line with its measurements (run with ``pytest -s`` to see them all)."""

import time

from conftest import sized_random_scenarios
from railrecover import io, milp, model as m, presets, reduce as red, solve as sv, verify


def report(name, detail):
    print(f"PASS  {name}: {detail}")


def test_bottleneck_exclusion():
    t0 = time.monotonic()
    scen = io.parse_scenario(presets.mini_line_document())
    net = m.build_network(scen)
    oracle = verify.brute_force_optimum(net, scen)
    expected = verify.objective_value(net, oracle)
    assert expected == 2.0  # frozen from the oracle: one direction is lost

    # exhaustive: no feasible assignment serves both conflicting passes
    trips = ["u00.00", "u00.01", "d00.00", "d00.01"]
    for selected, _, _, delays, _ in verify.enumerate_feasible(net):
        assert not all(net.drive_by_trip[t] in selected for t in trips)

    out = sv.solve_scenario(scen)
    assert out.result.status == "optimal"
    assert out.result.objective == expected
    assert len(out.solution.cancelled) >= 2
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    report(
        "bottleneck exclusion",
        f"optimum {expected:g}, both-trains excluded exhaustively, {elapsed:.2f}s",
    )


def test_lemma1_alignment():
    t0 = time.monotonic()

    def triples(margin):
        scen = io.parse_scenario(presets.fig1_document(safety_margin=margin))
        net = m.build_network(scen)
        gid_uw = m.headway_id("g", "u00.00/d", "d00.01/d")
        hid = m.headway_id("h", "u00.00/a", "d00.00/a")
        gid_wu = m.headway_id("g", "u00.01/d", "d00.00/d")
        trips = ["u00.00", "u00.01", "d00.00", "d00.01"]
        out = set()
        for sel, g, h, _, _ in verify.enumerate_feasible(net):
            if all(net.drive_by_trip[t] in sel for t in trips):
                out.add((g[gid_uw], h[hid], g[gid_wu]))
        return out

    # drive slack is 60 everywhere: bound ceil(30) + 1 = 31
    aligned = {(0, 0, 0), (1, 1, 1)}
    above = triples(31)
    at_bound = triples(30)
    assert above == aligned
    assert at_bound - aligned
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    report(
        "Lemma 1 alignment",
        f"S=31 aligned only, S=30 admits misaligned {sorted(at_bound - aligned)}, "
        f"{elapsed:.1f}s",
    )


def test_lemma2_equivalence():
    t0 = time.monotonic()
    cases = sized_random_scenarios(
        100, max_binaries=18, start_seed=2000, max_trips=10
    )
    assert len(cases) == 100
    for name, scen, net in cases:
        assert len(scen.timetable.trips) <= 10
        fixed = red.fix_natural_precedences(net)
        reduced, cmap = red.contract_chains(net, fixed)
        opt_full = verify.objective_value(net, verify.brute_force_optimum(net, scen))
        sol_r = verify.brute_force_optimum(reduced, scen)
        opt_red = verify.objective_value(reduced, sol_r)
        assert opt_full == opt_red, name
        expanded = red.expand_solution(sol_r, cmap, net)
        rep = verify.validate_solution(net, scen, expanded)
        assert rep.ok, (name, [v.message for v in rep.violations])
        assert verify.objective_value(net, expanded) == opt_red, name
    elapsed = time.monotonic() - t0
    assert elapsed < 300.0
    report(
        "Lemma 2 equivalence",
        f"100 instances, optimum preserved and expansions verified, {elapsed:.1f}s",
    )


def test_reduction_factor():
    t0 = time.monotonic()
    scen = io.parse_scenario(
        presets.u6_like_document(cycle_time=300, blockage_minutes=30)
    )
    net = m.build_network(scen)
    full = milp.formulate(net)
    fixed = red.fix_natural_precedences(net)
    reduced, _ = red.contract_chains(net, fixed)
    rmod = milp.formulate(reduced, fixed=fixed.values)
    n_full = len(full.free_binaries())
    n_red = len(rmod.free_binaries())
    factor = n_full / n_red
    elapsed = time.monotonic() - t0
    assert factor >= 2.0
    assert elapsed < 10.0
    report(
        "reduction factor",
        f"{n_full} -> {n_red} binaries ({factor:.2f}x), {elapsed:.1f}s",
    )


def test_solver_oracle_equivalence():
    t0 = time.monotonic()
    cases = sized_random_scenarios(50, max_binaries=16, start_seed=4000)
    assert len(cases) == 50
    for name, scen, net in cases:
        oracle = verify.objective_value(net, verify.brute_force_optimum(net, scen))
        out = sv.solve_scenario(scen)
        got = out.result.objective if out.result.objective is not None else 0.0
        assert got == oracle, name
        assert out.result.status == "optimal", name
    elapsed = time.monotonic() - t0
    assert elapsed < 600.0
    report(
        "solver oracle equivalence",
        f"50 instances solved to the exact oracle value, {elapsed:.1f}s",
    )


def test_identity_recovery():
    t0 = time.monotonic()
    scen = io.parse_scenario(presets.mini_line_document(blocked=False))
    out = sv.solve_scenario(scen)
    total = sum(
        a.cost for a in out.network.activities.values() if a.kind == m.DRIVE
    )
    assert out.result.status == "optimal"
    assert out.result.objective == total
    assert out.solution.cancelled == []
    assert all(v == 0 for v in out.solution.delays.values())
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    report(
        "identity recovery",
        f"all {int(total)} trips on time, objective {total:g}, {elapsed:.2f}s",
    )


def test_desk_scale_solve():
    t0 = time.monotonic()
    scen = io.parse_scenario(
        presets.u6_like_document(cycle_time=600, blockage_minutes=5)
    )
    out = sv.solve_scenario(scen)
    elapsed = time.monotonic() - t0
    assert out.result.status == "optimal"
    assert elapsed < 60.0
    assert out.report is not None and out.report.ok
    report(
        "desk-scale solve",
        f"proven optimal ({out.result.objective:g} of "
        f"{out.stats['trips']} trips) in {elapsed:.1f}s, "
        f"{out.result.nodes} nodes",
    )


def test_big_m_never_cuts():
    t0 = time.monotonic()
    cases = sized_random_scenarios(50, max_binaries=16, start_seed=4000)
    cases.append(
        ("mini_line", *(lambda s: (s, m.build_network(s)))(
            io.parse_scenario(presets.mini_line_document())
        ))
    )
    points = 0
    for name, scen, net in cases:
        model = milp.formulate(net)
        values = {}
        for selected, g, h, delays, _ in verify.enumerate_feasible(net):
            for vname, var in model.variables.items():
                inner = vname[2:-1]
                if var.kind == "y":
                    values[vname] = 1 if inner in selected else 0
                elif var.kind == "g":
                    values[vname] = g.get(inner, 0)
                elif var.kind == "h":
                    values[vname] = h.get(inner, 0)
                else:
                    values[vname] = delays.get(inner, 0)
            for row in model.rows:
                lhs = sum(c * values.get(n, 0) for n, c in row.coeffs.items())
                if row.sense == "==":
                    ok = abs(lhs - row.rhs) <= 1e-9
                elif row.sense == "<=":
                    ok = lhs <= row.rhs + 1e-9
                else:
                    ok = lhs >= row.rhs - 1e-9
                assert ok, (name, row.name)
            points += 1
    elapsed = time.monotonic() - t0
    report(
        "big-M non-cutting",
        f"{points} feasible points satisfy every encoded row, {elapsed:.1f}s",
    )


def test_extended_objective_tradeoff():
    t0 = time.monotonic()

    def oracle_for(penalty):
        doc = presets.mini_line_document(
            turn_at_middle=True,
            block_both_tags=True,
            block_section=("B", "C"),
            turn_penalty=penalty,
        )
        scen = io.parse_scenario(doc)
        net = m.build_network(scen)
        sol = verify.brute_force_optimum(net, scen, extended=True)
        out = sv.solve_scenario(scen, extended=True)
        got = out.result.objective if out.result.objective is not None else 0.0
        assert got == verify.objective_value(net, sol, extended=True)
        return net, scen, sol

    net0, scen0, free = oracle_for(0.0)
    _, _, costly = oracle_for(100.0)
    turns0 = len(free.early_turns) + len(free.early_returns)
    turns1 = len(costly.early_turns) + len(costly.early_returns)
    served0 = len(free.served_trips(net0))
    served1 = len(costly.served_trips(net0))
    assert turns1 < turns0 or (turns0 == 0 and turns1 == 0)

    # oracle-computed floor: the optimum with turns and returns forbidden
    for a in net0.activities.values():
        if (a.kind == m.TURN and not a.planned) or a.kind == m.RETURN:
            a.forced_zero = True
    floor_sol = verify.brute_force_optimum(net0, scen0)
    floor = len(floor_sol.served_trips(net0))
    assert served0 - served1 <= served0 - floor
    elapsed = time.monotonic() - t0
    report(
        "extended objective trade-off",
        f"turns {turns0} -> {turns1}, served {served0} -> {served1} "
        f"(floor {floor}), {elapsed:.2f}s",
    )
