import pytest

from conftest import sized_random_scenarios
from railrecover import io, model as m, presets, solve as sv, verify


def all_on_time_solution(net):
    selected = frozenset(a.id for a in net.selectable() if a.kind in m.TRAIN_KINDS)
    g = {}
    for fwd, rev in net.track_pairs():
        g[fwd], g[rev] = 1, 0
    h = {}
    for fwd, rev in net.station_pairs():
        h[fwd], h[rev] = 1, 0
    return verify.assemble_solution(net, selected, {}, g, h)


class TestValidate:
    def test_original_timetable_passes(self, mini_line_open):
        net = m.build_network(mini_line_open)
        sol = all_on_time_solution(net)
        report = verify.validate_solution(net, mini_line_open, sol)
        assert report.ok
        assert report.objective == len(mini_line_open.timetable.trips)
        assert report.counts["served"] == 4
        assert report.counts["cancelled"] == 0

    def test_bottleneck_on_time_fails_with_eq4(self, mini_line):
        net = m.build_network(mini_line)
        # both conflicting trains at their scheduled times
        selected = frozenset(
            a.id
            for a in net.selectable()
            if a.kind in m.TRAIN_KINDS and not a.forced_zero
        )
        g = {}
        for fwd, rev in net.track_pairs():
            g[fwd], g[rev] = 1, 0
        h = {}
        for fwd, rev in net.station_pairs():
            h[fwd], h[rev] = 1, 0
        sol = verify.assemble_solution(net, selected, {}, g, h)
        report = verify.validate_solution(net, mini_line, sol)
        assert not report.ok
        assert any(v.tag == "eq4" for v in report.violations)

    def test_solver_incumbent_passes(self, mini_line_turn):
        out = sv.solve_scenario(mini_line_turn)
        report = verify.validate_solution(out.network, mini_line_turn, out.solution)
        assert report.ok

    def test_unknown_ids_rejected(self, mini_line):
        net = m.build_network(mini_line)
        sol = verify.Solution(
            selected=frozenset({"drv:nope"}), delays={}, g={}, h={}
        )
        with pytest.raises(m.ModelError):
            verify.validate_solution(net, mini_line, sol)

    def test_tampered_selection_fails(self, mini_line):
        out = sv.solve_scenario(mini_line)
        sol = out.solution
        extra = sorted(
            a.id
            for a in out.network.selectable()
            if a.kind == m.DRIVE and a.id not in sol.selected
        )[0]
        bad = verify.Solution(
            selected=frozenset(sol.selected | {extra}),
            delays=dict(sol.delays),
            g=dict(sol.g),
            h=dict(sol.h),
        )
        report = verify.validate_solution(out.network, mini_line, bad)
        assert not report.ok

    def test_delay_above_cap_flagged(self, mini_line_open):
        net = m.build_network(mini_line_open)
        sol = all_on_time_solution(net)
        bad = verify.Solution(
            selected=sol.selected,
            delays={"u00.00/d": 999},
            g=sol.g,
            h=sol.h,
        )
        report = verify.validate_solution(net, mini_line_open, bad)
        assert any(v.tag == "dom" for v in report.violations)

    def test_recovery_pin_enforced(self):
        doc = presets.mini_line_document()
        doc["disruption"]["interval"] = [0, 100]
        doc["policy"]["recovery_horizon"] = 50
        scen = io.parse_scenario(doc)
        net = m.build_network(scen)
        assert net.pinned("u00.01/d")  # scheduled at 195 >= 150
        sol = all_on_time_solution(net)
        shifted = dict(sol.delays)
        shifted["u00.01/d"] = 10
        bad = verify.Solution(
            selected=sol.selected, delays=shifted, g=sol.g, h=sol.h
        )
        report = verify.validate_solution(net, scen, bad)
        assert any(v.tag == "recovery" for v in report.violations)

    def test_flow_violations_detected(self, mini_line_open):
        net = m.build_network(mini_line_open)
        sol = all_on_time_solution(net)
        # drop a wait arc: the first arrival then has outflow 0
        cut = frozenset(a for a in sol.selected if not a.startswith("wt:u00"))
        bad = verify.Solution(selected=cut, delays={}, g=sol.g, h=sol.h)
        report = verify.validate_solution(net, mini_line_open, bad)
        assert any(v.tag == "eq8" for v in report.violations)


class TestObjective:
    def test_all_trips_unit_costs(self, mini_line_open):
        net = m.build_network(mini_line_open)
        sol = all_on_time_solution(net)
        assert verify.objective_value(net, sol) == 4.0

    def test_empty_solution_zero(self, mini_line):
        net = m.build_network(mini_line)
        sol = verify.assemble_solution(net, frozenset(), {}, {}, {})
        assert verify.objective_value(net, sol) == 0.0

    def test_extended_penalty_subtracted(self, mini_line_turn):
        net = m.build_network(mini_line_turn)
        for a in net.activities.values():
            if a.kind == m.TURN and not a.planned:
                a.penalty = 5.0
        sol = verify.brute_force_optimum(net, mini_line_turn, extended=False)
        assert len(sol.early_turns) == 1
        base = verify.objective_value(net, sol, extended=False)
        ext = verify.objective_value(net, sol, extended=True)
        assert ext == base - 5.0


class TestOracle:
    def test_cap_enforced(self):
        scen = io.parse_scenario(presets.u6_like_document())
        net = m.build_network(scen)
        with pytest.raises(verify.OracleCapExceeded):
            verify.brute_force_optimum(net, scen, cap=20)

    def test_no_disruption_serves_all(self, mini_line_open):
        net = m.build_network(mini_line_open)
        sol = verify.brute_force_optimum(net, mini_line_open)
        assert sol.cancelled == []

    def test_bottleneck_below_undisturbed_count(self, mini_line):
        net = m.build_network(mini_line)
        sol = verify.brute_force_optimum(net, mini_line)
        assert verify.objective_value(net, sol) < 4.0

    def test_deterministic_tie_break(self, mini_line):
        net1 = m.build_network(mini_line)
        net2 = m.build_network(io.parse_scenario(presets.mini_line_document()))
        s1 = verify.brute_force_optimum(net1, mini_line)
        s2 = verify.brute_force_optimum(net2, mini_line)
        assert s1.selected == s2.selected
        assert s1.g == s2.g and s1.h == s2.h

    def test_replacement_and_depot_flow_legal(self):
        for name, scen, net in sized_random_scenarios(8, 16, start_seed=1300):
            sol = verify.brute_force_optimum(net, scen)
            report = verify.validate_solution(net, scen, sol)
            assert report.ok, (name, [v.message for v in report.violations])


class TestLemma1Behavior:
    def test_aligned_only_above_bound_misaligned_at_bound(self):
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

        aligned = {(0, 0, 0), (1, 1, 1)}
        assert triples(31) == aligned
        at_bound = triples(30)
        assert at_bound - aligned  # a misaligned solution exists


class TestBlockageMonotonicity:
    def test_longer_blockage_never_serves_more(self):
        # feasible-set containment on the bottleneck fixture: extending the
        # closure can only lose trips
        values = []
        for end in (0, 200, 500, 900):
            doc = presets.mini_line_document()
            doc["disruption"]["interval"] = [0, end]
            scen = io.parse_scenario(doc)
            net = m.build_network(scen)
            sol = verify.brute_force_optimum(net, scen)
            values.append(verify.objective_value(net, sol))
        assert values == sorted(values, reverse=True)
        assert values[0] == 4.0
