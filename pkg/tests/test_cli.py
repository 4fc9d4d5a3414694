import json
from pathlib import Path

from railrecover import cli, io, presets

SCENARIOS = Path(__file__).parent.parent / "scenarios"


def test_build_reports_structure(capsys):
    rc = cli.main(["build", "--scenario", str(SCENARIOS / "mini_line.scenario.json")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "events:      8" in out
    assert "margin violations: none" in out


def test_reduce_reports_counts(capsys):
    rc = cli.main(["reduce", "--scenario", str(SCENARIOS / "u6_like.scenario.json")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "reduction:" in out


def test_solve_verify_diagram_chain(tmp_path, capsys):
    scenario = str(SCENARIOS / "mini_line.scenario.json")
    sol_path = tmp_path / "sol.json"
    rc = cli.main(
        ["solve", "--scenario", scenario, "--out", str(sol_path), "--quiet"]
    )
    assert rc == 0
    assert "status:    optimal" in capsys.readouterr().out
    assert sol_path.exists()

    rc = cli.main(["verify", "--scenario", scenario, "--solution", str(sol_path)])
    assert rc == 0
    assert "pass:      True" in capsys.readouterr().out

    svg_path = tmp_path / "d.svg"
    rc = cli.main(
        ["diagram", "--scenario", scenario, "--solution", str(sol_path),
         "--out", str(svg_path)]
    )
    assert rc == 0
    assert svg_path.read_text().startswith("<svg")


def test_export_lp_round_trip(tmp_path, capsys):
    scenario = str(SCENARIOS / "mini_line.scenario.json")
    out_path = tmp_path / "m.lp.txt"
    rc = cli.main(
        ["export-lp", "--scenario", scenario, "--reduced", "--out", str(out_path)]
    )
    assert rc == 0
    text = out_path.read_text()
    assert text.startswith("\\ railrecover model export")
    from railrecover import milp

    parsed = milp.parse_lp_text(text)
    assert parsed.rows


def test_tampered_solution_fails_verify(tmp_path, capsys):
    scenario = str(SCENARIOS / "mini_line.scenario.json")
    sol_path = tmp_path / "sol.json"
    cli.main(["solve", "--scenario", scenario, "--out", str(sol_path), "--quiet"])
    capsys.readouterr()
    doc = json.loads(sol_path.read_text())
    served = [a for a in doc["solution"]["selected"] if a.startswith("drv:")]
    missing = sorted(
        f"drv:{t['id']}"
        for t in json.loads(Path(scenario).read_text())["timetable"]["trips"]
        if f"drv:{t['id']}" not in served
    )
    doc["solution"]["selected"].append(missing[0])
    sol_path.write_text(json.dumps(doc))
    rc = cli.main(["verify", "--scenario", scenario, "--solution", str(sol_path)])
    assert rc == 1
    assert "pass:      False" in capsys.readouterr().out


def test_scenario_error_exit_code(tmp_path, capsys):
    bad = presets.mini_line_document()
    bad["policy"]["max_delay"] = 10**6
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    rc = cli.main(["build", "--scenario", str(path)])
    assert rc == 2
    assert "scenario error" in capsys.readouterr().err
