import json
from pathlib import Path

import pytest

from railrecover import io, model as m, presets, solve as sv, verify

GOLDEN = Path(__file__).parent / "golden"
SCENARIOS = Path(__file__).parent.parent / "scenarios"


class TestParse:
    def test_committed_mini_line_fixture(self):
        doc = json.loads((SCENARIOS / "mini_line.scenario.json").read_text())
        scen = io.parse_scenario(doc)
        assert len(scen.timetable.circulations) == 2
        assert scen.blockage is not None
        assert scen.blockage.section == ("A", "C")

    def test_empty_disruption_is_undisturbed(self):
        doc = presets.mini_line_document(blocked=False)
        assert "disruption" not in doc
        scen = io.parse_scenario(doc)
        assert scen.blockage is None

    def test_unknown_segment_named_in_error(self):
        doc = presets.mini_line_document()
        doc["disruption"]["from"] = "Z"
        with pytest.raises(io.ScenarioFormatError) as err:
            io.parse_scenario(doc)
        assert "Z" in str(err.value)
        assert err.value.path.startswith("$.disruption")

    def test_unknown_fields_rejected(self):
        doc = presets.mini_line_document()
        doc["policy"]["frobnicate"] = 1
        with pytest.raises(io.ScenarioFormatError) as err:
            io.parse_scenario(doc)
        assert "frobnicate" in str(err.value)

    def test_non_integer_durations_rejected(self):
        doc = presets.mini_line_document()
        doc["topology"]["drive_times"]["A~B"] = 150.5
        with pytest.raises(io.ScenarioFormatError):
            io.parse_scenario(doc)

    def test_newer_major_version_rejected(self):
        doc = presets.mini_line_document()
        doc["version"] = 99
        with pytest.raises(io.ScenarioFormatError):
            io.parse_scenario(doc)

    def test_json_text_accepted(self):
        text = json.dumps(presets.mini_line_document())
        scen = io.parse_scenario(text)
        assert scen.name == "mini_line"

    def test_hash_is_stable_and_content_addressed(self):
        a = presets.mini_line_document()
        b = presets.mini_line_document()
        assert io.scenario_hash(a) == io.scenario_hash(b)
        b["policy"]["safety_margin"] = 61
        assert io.scenario_hash(a) != io.scenario_hash(b)


class TestSolutionFiles:
    def test_round_trip_identity(self, mini_line):
        out = sv.solve_scenario(mini_line)
        doc = io.write_solution(out.solution, out.report, "abc123")
        sol2, rep2 = io.read_solution(doc, expected_digest="abc123")
        assert sol2.selected == out.solution.selected
        assert sol2.delays == out.solution.delays
        assert sol2.g == out.solution.g and sol2.h == out.solution.h
        assert sol2.circulations == out.solution.circulations
        assert sol2.cancelled == out.solution.cancelled
        assert rep2.ok == out.report.ok
        assert rep2.objective == out.report.objective
        # and the round trip is JSON-stable
        assert io.write_solution(sol2, rep2, "abc123") == doc

    def test_hash_mismatch_warns_not_fails(self, mini_line, caplog):
        out = sv.solve_scenario(mini_line)
        doc = io.write_solution(out.solution, out.report, "abc123")
        with caplog.at_level("WARNING"):
            io.read_solution(doc, expected_digest="other")
        assert any("produced for scenario" in r.message for r in caplog.records)

    def test_tampered_selection_fails_verification(self, mini_line):
        out = sv.solve_scenario(mini_line)
        doc = io.write_solution(out.solution, out.report, "x")
        extra = sorted(
            a.id
            for a in out.network.selectable()
            if a.kind == m.DRIVE and a.id not in out.solution.selected
        )[0]
        doc["solution"]["selected"].append(extra)
        sol2, _ = io.read_solution(doc)
        report = verify.validate_solution(out.network, mini_line, sol2)
        assert not report.ok


class TestDiagram:
    def test_undisturbed_two_polylines_no_shading(self, mini_line_open):
        out = sv.solve_scenario(mini_line_open)
        svg = io.render_time_space_diagram(mini_line_open, out.solution)
        assert svg.count("<polyline") == 2
        assert "#f2c4c4" not in svg
        assert 'stroke-dasharray="7,4"' not in svg

    def test_recovered_solution_golden(self, mini_line):
        out = sv.solve_scenario(mini_line)
        svg = io.render_time_space_diagram(mini_line, out.solution)
        assert svg == (GOLDEN / "mini_line.svg").read_text()
        assert "#f2c4c4" in svg  # blockage shading

    def test_turned_circulation_reverses(self, mini_line_turn):
        out = sv.solve_scenario(mini_line_turn)
        assert out.solution.early_turns
        svg = io.render_time_space_diagram(mini_line_turn, out.solution)
        # the turning vehicle is drawn as one modified polyline
        assert 'stroke-dasharray="7,4"' in svg
        (train,) = [
            t for t, chain in out.solution.circulations.items() if len(chain) > 1
        ]
        chain = out.solution.circulations[train]
        trips = {t.id: t for t in mini_line_turn.timetable.trips}
        assert trips[chain[0]].to == trips[chain[1]].frm
        assert trips[chain[0]].frm == trips[chain[1]].to  # back where it began

    def test_served_trips_drawn_once_and_legal(self, mini_line):
        out = sv.solve_scenario(mini_line)
        drawn = [t for chain in out.solution.circulations.values() for t in chain]
        assert sorted(drawn) == out.solution.served_trips(out.network)
        assert len(set(drawn)) == len(drawn)
        blockage = mini_line.blockage
        for tid in drawn:
            trip = mini_line.timetable.trip(tid)
            if out.network.used_track[tid] in blockage.tracks:
                dep = trip.dep + out.solution.delays.get(m.dep_id(tid), 0)
                arr = trip.arr + out.solution.delays.get(m.arr_id(tid), 0)
                assert arr <= blockage.start or dep >= blockage.end

    def test_cancelled_listed_in_legend(self, mini_line):
        out = sv.solve_scenario(mini_line)
        svg = io.render_time_space_diagram(mini_line, out.solution)
        for tid in out.solution.cancelled:
            assert tid in svg


class TestBenchmark:
    def test_empty_set(self):
        assert io.run_benchmark([]) == []

    def test_single_row_opt_status(self, mini_line):
        rows = io.run_benchmark([("mini", mini_line)], budget_60s=False)
        (row,) = rows
        assert row.status == "opt"
        assert row.sol == 2.0
        assert row.trips == 4
        table = io.format_benchmark_table(rows)
        assert "opt" in table
        csv_text = io.rows_to_csv(rows)
        assert csv_text.splitlines()[1].startswith("mini")

    def test_row_failure_recorded_run_continues(self, mini_line):
        broken = io.parse_scenario(presets.mini_line_document())
        broken.topology.drive_times.clear()  # poisoned scenario
        rows = io.run_benchmark(
            [("bad", broken), ("mini", mini_line)], budget_60s=False
        )
        assert rows[0].status == "error" and rows[0].error
        assert rows[1].status == "opt"

    def test_binary_counts_grow_with_duration(self):
        import railrecover.solve as solver_mod

        scens = []
        for dur in (5, 10, 15):
            doc = presets.u6_like_document(
                cycle_time=600, blockage_minutes=dur, horizon_end=9000
            )
            scens.append((f"dur{dur}", io.parse_scenario(doc)))
        rows = io.run_benchmark(
            scens,
            params=solver_mod.SolveParams(time_limit=5.0),
            budget_60s=False,
        )
        bins = [r.binaries for r in rows]
        assert bins == sorted(bins)


class TestGoldenSolution:
    def test_mini_line_solution_frozen(self, mini_line):
        out = sv.solve_scenario(mini_line)
        digest = io.scenario_hash(
            json.loads((SCENARIOS / "mini_line.scenario.json").read_text())
        )
        doc = io.write_solution(out.solution, out.report, digest)
        golden = json.loads((GOLDEN / "mini_line.solution.json").read_text())
        assert doc == golden


class TestScenarioRoundTrip:
    def test_parse_write_parse_is_identity(self):
        for doc in (
            presets.mini_line_document(),
            presets.mini_line_document(turn_at_middle=True),
            presets.u6_like_document(cycle_time=600, blockage_minutes=5),
        ):
            scen = io.parse_scenario(doc)
            again = io.parse_scenario(io.write_scenario(scen))
            assert again == scen

    def test_zero_length_blockage_is_undisturbed(self):
        doc = presets.mini_line_document()
        doc["disruption"]["interval"] = [100, 100]
        scen = io.parse_scenario(doc)
        assert scen.blockage is None
