"""Scenario and solution files, time-space diagrams, benchmark tables.

Scenario documents are versioned JSON; parsing is total: every problem is
reported as a ``ScenarioFormatError`` carrying the document path that
caused it.
"""

from __future__ import annotations

import csv
import hashlib
import io as _stdio
import json
import logging
import time
from dataclasses import dataclass
from typing import Optional

from . import model as m
from . import verify

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class ScenarioFormatError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def scenario_hash(document: dict) -> str:
    canon = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _expect(doc: dict, path: str, allowed: set[str], required: set[str]) -> None:
    if not isinstance(doc, dict):
        raise ScenarioFormatError(path, f"expected an object, got {type(doc).__name__}")
    unknown = set(doc) - allowed
    if unknown:
        raise ScenarioFormatError(path, f"unknown fields: {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ScenarioFormatError(path, f"missing fields: {sorted(missing)}")


def _int(value, path: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioFormatError(path, f"expected integer seconds, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioFormatError(path, f"must be >= {minimum}, got {value}")
    return value


def _num(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(path, f"expected a number, got {value!r}")
    return float(value)


def _parse_topology(doc, path: str) -> m.Topology:
    _expect(
        doc,
        path,
        {"stations", "drive_times", "switches", "depots", "tracks"},
        {"stations", "drive_times"},
    )
    stations = doc["stations"]
    if not isinstance(stations, list) or not all(isinstance(s, str) for s in stations):
        raise ScenarioFormatError(f"{path}.stations", "expected a list of names")
    drive_times = {}
    for key, value in doc["drive_times"].items():
        parts = key.split("~")
        if len(parts) != 2:
            raise ScenarioFormatError(f"{path}.drive_times.{key}", "expected 'A~B' keys")
        a, b = parts
        for st in (a, b):
            if st not in stations:
                raise ScenarioFormatError(
                    f"{path}.drive_times.{key}", f"unknown station {st}"
                )
        lo, hi = sorted((a, b), key=stations.index)
        drive_times[(lo, hi)] = _int(value, f"{path}.drive_times.{key}", minimum=1)
    depots = []
    for i, dd in enumerate(doc.get("depots", [])):
        dp = f"{path}.depots[{i}]"
        _expect(dd, dp, {"id", "station", "replacement_capacity", "min_idle"},
                {"id", "station", "replacement_capacity", "min_idle"})
        if dd["station"] not in stations:
            raise ScenarioFormatError(f"{dp}.station", f"unknown station {dd['station']}")
        depots.append(
            m.Depot(
                id=dd["id"],
                station=dd["station"],
                replacement_capacity=_int(dd["replacement_capacity"], f"{dp}.replacement_capacity", 0),
                min_idle=_int(dd["min_idle"], f"{dp}.min_idle", 0),
            )
        )
    switches = set(doc.get("switches", []))
    for s in switches:
        if s not in stations:
            raise ScenarioFormatError(f"{path}.switches", f"unknown station {s}")
    tracks = set()
    for i, tk in enumerate(doc.get("tracks", [])):
        tp = f"{path}.tracks[{i}]"
        if not (isinstance(tk, list) and len(tk) == 3 and tk[2] in (m.UP, m.DOWN)):
            raise ScenarioFormatError(tp, "expected [lo, hi, up|down]")
        tracks.add(m.TrackKey(tk[0], tk[1], tk[2]))
    try:
        topo = m.Topology(
            stations=stations,
            drive_times=drive_times,
            depots=depots,
            switches=switches,
            tracks=tracks,
        )
        topo.validate()
    except m.ModelError as exc:
        raise ScenarioFormatError(path, str(exc)) from exc
    return topo


def _parse_timetable(doc, path: str, topo: m.Topology, policy: m.Policy) -> m.Timetable:
    if "generate" in doc:
        _expect(doc, path, {"generate"}, {"generate"})
        gen = doc["generate"]
        gp = f"{path}.generate"
        _expect(gen, gp, {"cycle_time", "horizon", "buffer_fraction", "dwell"},
                {"cycle_time", "horizon", "buffer_fraction"})
        horizon = gen["horizon"]
        if not (isinstance(horizon, list) and len(horizon) == 2):
            raise ScenarioFormatError(f"{gp}.horizon", "expected [start, end]")
        try:
            return m.generate_cyclic_timetable(
                topo,
                _int(gen["cycle_time"], f"{gp}.cycle_time", 1),
                (
                    _int(horizon[0], f"{gp}.horizon[0]", 0),
                    _int(horizon[1], f"{gp}.horizon[1]", 0),
                ),
                _num(gen["buffer_fraction"], f"{gp}.buffer_fraction"),
                dwell=_int(gen.get("dwell", m.DEFAULT_DWELL), f"{gp}.dwell", 0),
                min_turnaround=policy.min_turnaround,
            )
        except m.ModelError as exc:
            raise ScenarioFormatError(gp, str(exc)) from exc

    _expect(doc, path, {"cycle_time", "horizon", "trips", "circulations"},
            {"cycle_time", "horizon", "trips", "circulations"})
    trips = []
    for i, td in enumerate(doc["trips"]):
        tp = f"{path}.trips[{i}]"
        _expect(td, tp, {"id", "train", "line", "from", "to", "dep", "arr"},
                {"id", "train", "line", "from", "to", "dep", "arr"})
        frm, to = td["from"], td["to"]
        for st in (frm, to):
            if st not in topo.stations:
                raise ScenarioFormatError(tp, f"unknown station {st}")
        if abs(topo.index(frm) - topo.index(to)) != 1:
            raise ScenarioFormatError(tp, f"{frm} and {to} are not adjacent")
        tag = m.UP if topo.index(frm) < topo.index(to) else m.DOWN
        trips.append(
            m.Trip(
                id=td["id"],
                train=td["train"],
                line=td["line"],
                frm=frm,
                to=to,
                track=topo.track_for(frm, to, tag),
                dep=_int(td["dep"], f"{tp}.dep", 0),
                arr=_int(td["arr"], f"{tp}.arr", 0),
            )
        )
    circulations = {}
    known = {t.id for t in trips}
    for train, chain in doc["circulations"].items():
        for tid in chain:
            if tid not in known:
                raise ScenarioFormatError(
                    f"{path}.circulations.{train}", f"unknown trip {tid}"
                )
        circulations[train] = list(chain)
    horizon = doc["horizon"]
    tt = m.Timetable(
        trips=trips,
        circulations=circulations,
        cycle_time=_int(doc["cycle_time"], f"{path}.cycle_time", 1),
        horizon=(
            _int(horizon[0], f"{path}.horizon[0]", 0),
            _int(horizon[1], f"{path}.horizon[1]", 0),
        ),
    )
    try:
        tt.validate(topo)
    except m.ModelError as exc:
        raise ScenarioFormatError(path, str(exc)) from exc
    return tt


_POLICY_FIELDS = {
    "max_delay", "recovery_horizon", "safety_margin", "turn_stations",
    "min_dwell", "min_turnaround", "depot_transfer", "turn_window",
    "action_window", "reinsert_candidates", "drive_stretch",
    "stretch_overrides", "default_weight", "direction_weights",
    "trip_weights", "turn_penalty", "return_penalty",
}


def _parse_policy(doc, path: str) -> m.Policy:
    _expect(doc, path, _POLICY_FIELDS, {"max_delay", "recovery_horizon", "safety_margin"})
    kwargs = {
        "max_delay": _int(doc["max_delay"], f"{path}.max_delay", 0),
        "recovery_horizon": _int(doc["recovery_horizon"], f"{path}.recovery_horizon", 0),
        "safety_margin": _int(doc["safety_margin"], f"{path}.safety_margin", 0),
        "turn_stations": set(doc.get("turn_stations", [])),
    }
    for key in ("min_dwell", "min_turnaround", "depot_transfer", "reinsert_candidates"):
        if key in doc:
            kwargs[key] = _int(doc[key], f"{path}.{key}", 0)
    for key in ("turn_window", "action_window", "drive_stretch"):
        if key in doc and doc[key] is not None:
            kwargs[key] = _int(doc[key], f"{path}.{key}", 0)
    if "stretch_overrides" in doc:
        kwargs["stretch_overrides"] = {
            k: _int(v, f"{path}.stretch_overrides.{k}", 0)
            for k, v in doc["stretch_overrides"].items()
        }
    for key in ("default_weight", "turn_penalty", "return_penalty"):
        if key in doc:
            value = _num(doc[key], f"{path}.{key}")
            if value < 0:
                raise ScenarioFormatError(f"{path}.{key}", "must be nonnegative")
            kwargs[key] = value
    for key in ("direction_weights", "trip_weights"):
        if key in doc:
            kwargs[key] = {
                k: _num(v, f"{path}.{key}.{k}") for k, v in doc[key].items()
            }
    return m.Policy(**kwargs)


def _parse_disruption(doc, path: str, topo: m.Topology, horizon) -> Optional[m.Blockage]:
    if not doc:
        return None
    _expect(doc, path, {"from", "to", "directions", "interval"},
            {"from", "to", "directions", "interval"})
    frm, to = doc["from"], doc["to"]
    for st in (frm, to):
        if st not in topo.stations:
            raise ScenarioFormatError(path, f"unknown station {st}")
    lo, hi = sorted((frm, to), key=topo.index)
    if lo == hi:
        raise ScenarioFormatError(path, "blocked section is empty")
    tags = doc["directions"]
    if not tags or any(t not in (m.UP, m.DOWN) for t in tags):
        raise ScenarioFormatError(f"{path}.directions", "expected up/down entries")
    interval = doc["interval"]
    if not (isinstance(interval, list) and len(interval) == 2):
        raise ScenarioFormatError(f"{path}.interval", "expected [start, end]")
    if interval[0] == interval[1]:
        return None  # zero-length closure: undisturbed
    i0 = topo.index(lo)
    i1 = topo.index(hi)
    tracks = set()
    for a, b in zip(topo.stations[i0:i1], topo.stations[i0 + 1 : i1 + 1]):
        for tag in tags:
            tk = m.TrackKey(a, b, tag)
            if tk not in topo.tracks:
                raise ScenarioFormatError(path, f"blocked track {tk} not in topology")
            tracks.add(tk)
    blockage = m.Blockage(
        tracks=tracks,
        start=_int(interval[0], f"{path}.interval[0]", 0),
        end=_int(interval[1], f"{path}.interval[1]", 0),
        section=(lo, hi),
        tags=set(tags),
    )
    try:
        blockage.validate(topo, horizon)
    except m.ModelError as exc:
        raise ScenarioFormatError(path, str(exc)) from exc
    return blockage


def parse_scenario(document) -> m.Scenario:
    """Parse and fully validate a scenario document (dict or JSON text)."""

    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError("$", f"invalid JSON: {exc}") from exc
    _expect(
        document,
        "$",
        {"version", "name", "topology", "timetable", "disruption", "policy", "solver"},
        {"version", "topology", "timetable", "policy"},
    )
    version = document["version"]
    if not isinstance(version, int) or version > SCHEMA_VERSION:
        raise ScenarioFormatError(
            "$.version", f"unsupported schema version {version!r} (reader is {SCHEMA_VERSION})"
        )
    topo = _parse_topology(document["topology"], "$.topology")
    policy = _parse_policy(document["policy"], "$.policy")
    timetable = _parse_timetable(document["timetable"], "$.timetable", topo, policy)
    blockage = _parse_disruption(
        document.get("disruption"), "$.disruption", topo, timetable.horizon
    )
    scenario = m.Scenario(
        topology=topo,
        timetable=timetable,
        blockage=blockage,
        policy=policy,
        solver_defaults=dict(document.get("solver", {})),
        name=document.get("name", "scenario"),
    )
    try:
        scenario.validate()
    except m.ModelError as exc:
        raise ScenarioFormatError("$", str(exc)) from exc
    return scenario


def write_scenario(scenario: m.Scenario) -> dict:
    """Emit a document that parses back to an equal scenario.

    The timetable is written explicitly even when the original document
    used the generator.
    """

    topo = scenario.topology
    pol = scenario.policy
    doc = {
        "version": SCHEMA_VERSION,
        "name": scenario.name,
        "topology": {
            "stations": list(topo.stations),
            "drive_times": {
                f"{lo}~{hi}": t for (lo, hi), t in sorted(topo.drive_times.items())
            },
            "switches": sorted(topo.switches),
            "depots": [
                {
                    "id": d.id,
                    "station": d.station,
                    "replacement_capacity": d.replacement_capacity,
                    "min_idle": d.min_idle,
                }
                for d in topo.depots
            ],
            "tracks": sorted([tk.lo, tk.hi, tk.tag] for tk in topo.tracks),
        },
        "timetable": {
            "cycle_time": scenario.timetable.cycle_time,
            "horizon": list(scenario.timetable.horizon),
            "trips": [
                {
                    "id": t.id,
                    "train": t.train,
                    "line": t.line,
                    "from": t.frm,
                    "to": t.to,
                    "dep": t.dep,
                    "arr": t.arr,
                }
                for t in scenario.timetable.trips
            ],
            "circulations": {
                k: list(v) for k, v in sorted(scenario.timetable.circulations.items())
            },
        },
        "policy": {
            "max_delay": pol.max_delay,
            "recovery_horizon": pol.recovery_horizon,
            "safety_margin": pol.safety_margin,
            "turn_stations": sorted(pol.turn_stations),
            "min_dwell": pol.min_dwell,
            "min_turnaround": pol.min_turnaround,
            "depot_transfer": pol.depot_transfer,
            "turn_window": pol.turn_window,
            "action_window": pol.action_window,
            "reinsert_candidates": pol.reinsert_candidates,
            "drive_stretch": pol.drive_stretch,
            "stretch_overrides": dict(pol.stretch_overrides),
            "default_weight": pol.default_weight,
            "direction_weights": dict(pol.direction_weights),
            "trip_weights": dict(pol.trip_weights),
            "turn_penalty": pol.turn_penalty,
            "return_penalty": pol.return_penalty,
        },
        "solver": dict(scenario.solver_defaults),
    }
    if scenario.blockage is not None:
        b = scenario.blockage
        doc["disruption"] = {
            "from": b.section[0],
            "to": b.section[1],
            "directions": sorted(b.tags),
            "interval": [b.start, b.end],
        }
    return doc


# ---------------------------------------------------------------------------
# solution files


def write_solution(
    solution: verify.Solution,
    report: verify.ValidationReport,
    scenario_digest: str = "",
) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "scenario": scenario_digest,
        "solution": {
            "selected": sorted(solution.selected),
            "delays": {k: solution.delays[k] for k in sorted(solution.delays)},
            "g": {k: solution.g[k] for k in sorted(solution.g)},
            "h": {k: solution.h[k] for k in sorted(solution.h)},
            "circulations": solution.circulations,
            "replacements_used": solution.replacements_used,
            "cancelled": solution.cancelled,
            "early_turns": solution.early_turns,
            "early_returns": solution.early_returns,
        },
        "report": report.to_dict(),
    }


def read_solution(
    document: dict, expected_digest: Optional[str] = None
) -> tuple[verify.Solution, verify.ValidationReport]:
    version = document.get("version")
    if not isinstance(version, int) or version > SCHEMA_VERSION:
        raise ScenarioFormatError("$.version", f"unsupported version {version!r}")
    if expected_digest and document.get("scenario") not in ("", expected_digest):
        logger.warning(
            "solution was produced for scenario %s, expected %s",
            document.get("scenario"),
            expected_digest,
        )
    s = document["solution"]
    solution = verify.Solution(
        selected=frozenset(s["selected"]),
        delays={k: int(v) for k, v in s["delays"].items()},
        g={k: int(v) for k, v in s["g"].items()},
        h={k: int(v) for k, v in s["h"].items()},
        circulations={k: list(v) for k, v in s.get("circulations", {}).items()},
        replacements_used=dict(s.get("replacements_used", {})),
        cancelled=list(s.get("cancelled", [])),
        early_turns=list(s.get("early_turns", [])),
        early_returns=list(s.get("early_returns", [])),
    )
    report = verify.ValidationReport.from_dict(document["report"])
    return solution, report


# ---------------------------------------------------------------------------
# time-space diagram

_COLORS = ["#1b6ca8", "#c23b22", "#2e8b57", "#8b5e3c", "#6a4fa3", "#c28f00"]


def render_time_space_diagram(
    scenario: m.Scenario,
    solution: verify.Solution,
    network: Optional[m.Network] = None,
    width: int = 1000,
    height: int = 620,
) -> str:
    """Draw the dispatching timetable as an SVG time-space diagram.

    Stations sit on the vertical axis at their cumulative driving time from
    the first terminal; one polyline per circulation; modified circulations
    are dashed, replacement vehicles dotted; the blockage is shaded.
    """

    if network is None:
        network = m.build_network(scenario)
    topo = scenario.topology
    tt = scenario.timetable
    margin_l, margin_r, margin_t, margin_b = 70, 20, 28, 96
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    pos = {topo.stations[0]: 0}
    acc = 0
    for lo, hi in topo.segments():
        acc += topo.drive_times[(lo, hi)]
        pos[hi] = acc
    total = acc or 1
    t0, t1 = tt.horizon
    span = max(1, t1 - t0)

    def sx(t: float) -> float:
        return margin_l + (t - t0) / span * plot_w

    def sy(station: str) -> float:
        return margin_t + pos[station] / total * plot_h

    out = _stdio.StringIO()
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    out.write(f'<rect width="{width}" height="{height}" fill="white"/>\n')

    if scenario.blockage is not None:
        b = scenario.blockage
        ylo = sy(b.section[0])
        yhi = sy(b.section[1])
        out.write(
            f'<rect x="{sx(b.start):.1f}" y="{min(ylo, yhi):.1f}" '
            f'width="{sx(b.end) - sx(b.start):.1f}" height="{abs(yhi - ylo):.1f}" '
            f'fill="#f2c4c4" stroke="none" opacity="0.7"/>\n'
        )

    for station in topo.stations:
        y = sy(station)
        out.write(
            f'<line x1="{margin_l}" y1="{y:.1f}" x2="{width - margin_r}" y2="{y:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>\n'
        )
        out.write(
            f'<text x="{margin_l - 6}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{station}</text>\n'
        )
    for t in range(t0, t1 + 1, max(600, span // 10 // 600 * 600 or 600)):
        x = sx(t)
        out.write(
            f'<line x1="{x:.1f}" y1="{margin_t}" x2="{x:.1f}" y2="{height - margin_b}" '
            f'stroke="#eeeeee" stroke-width="1"/>\n'
        )
        out.write(
            f'<text x="{x:.1f}" y="{height - margin_b + 14}" text-anchor="middle" '
            f'font-size="10" font-family="sans-serif">{t // 60}m</text>\n'
        )

    original = {
        train: list(chain) for train, chain in tt.circulations.items()
    }
    trip_by_id = {t.id: t for t in tt.trips}

    i = 0
    for name in sorted(solution.circulations):
        chain = solution.circulations[name]
        color = _COLORS[i % len(_COLORS)]
        i += 1
        modified = original.get(name) != chain or any(
            solution.delays.get(m.dep_id(t), 0) or solution.delays.get(m.arr_id(t), 0)
            for t in chain
        )
        if name.startswith("repl"):
            dash = ' stroke-dasharray="2,3"'
        elif modified:
            dash = ' stroke-dasharray="7,4"'
        else:
            dash = ""
        points = []
        prev_arr = None
        for tid in chain:
            trip = trip_by_id[tid]
            dep = trip.dep + solution.delays.get(m.dep_id(tid), 0)
            arr = trip.arr + solution.delays.get(m.arr_id(tid), 0)
            if prev_arr is not None:
                points.append((sx(dep), sy(trip.frm)))
            points.append((sx(dep), sy(trip.frm)))
            points.append((sx(arr), sy(trip.to)))
            prev_arr = arr
        path = " ".join(f"{x:.1f},{y:.1f}" for x, y in points)
        out.write(
            f'<polyline points="{path}" fill="none" stroke="{color}" '
            f'stroke-width="1.6"{dash}><title>{name}</title></polyline>\n'
        )

    legend_y = height - margin_b + 34
    cancelled = ", ".join(solution.cancelled) if solution.cancelled else "none"
    out.write(
        f'<text x="{margin_l}" y="{legend_y}" font-size="11" '
        f'font-family="sans-serif">cancelled trips: {cancelled}</text>\n'
    )
    out.write(
        f'<text x="{margin_l}" y="{legend_y + 16}" font-size="11" '
        f'font-family="sans-serif">dashed: modified circulation, '
        f"dotted: replacement vehicle, shaded: blocked section</text>\n"
    )
    out.write("</svg>\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# benchmark tables


@dataclass
class RunSummaryRow:
    label: str
    duration_min: float
    binaries: int
    integers: int
    trips: int
    sol: Optional[float]
    bound: Optional[float]
    time_s: float
    status: str
    sixty: Optional[float] = None
    reduction: Optional[float] = None
    error: Optional[str] = None


def run_benchmark(scenarios, params=None, budget_60s: bool = True) -> list[RunSummaryRow]:
    """Build, reduce, formulate and solve each scenario; one row per run.

    ``scenarios`` is an iterable of (label, Scenario).  Failures are
    recorded on the row and the run continues.
    """

    from . import solve as solver_mod

    rows = []
    for label, scenario in scenarios:
        dur = 0.0
        if scenario.blockage is not None:
            dur = (scenario.blockage.end - scenario.blockage.start) / 60.0
        try:
            t_start = time.monotonic()
            outcome = solver_mod.solve_scenario(scenario, params=params)
            elapsed = time.monotonic() - t_start
            res = outcome.result
            status = res.status
            if status == "optimal":
                status_txt = "opt"
            elif res.objective is not None and res.bound is not None and res.bound > 0:
                gap = (res.bound - res.objective) / max(1.0, abs(res.objective))
                status_txt = f"{gap * 100:.1f}%"
            else:
                status_txt = "--"
            sixty = None
            if budget_60s:
                p60 = solver_mod.SolveParams(
                    time_limit=60.0, node_selection="best-estimate"
                )
                out60 = solver_mod.solve_scenario(scenario, params=p60)
                sixty = out60.result.objective
            rows.append(
                RunSummaryRow(
                    label=label,
                    duration_min=dur,
                    binaries=outcome.stats["binaries_reduced"],
                    integers=outcome.stats["integers_reduced"],
                    trips=outcome.stats["trips"],
                    sol=res.objective,
                    bound=res.bound,
                    time_s=round(elapsed, 2),
                    status=status_txt,
                    sixty=sixty,
                    reduction=outcome.stats["reduction_factor"],
                )
            )
        except Exception as exc:  # per-row isolation
            logger.exception("benchmark row %s failed", label)
            rows.append(
                RunSummaryRow(
                    label=label,
                    duration_min=dur,
                    binaries=0,
                    integers=0,
                    trips=0,
                    sol=None,
                    bound=None,
                    time_s=0.0,
                    status="error",
                    error=str(exc),
                )
            )
    return rows


def format_benchmark_table(rows: list[RunSummaryRow]) -> str:
    headers = ["dur", "bin", "int", "trips", "sol", "u.bound", "time", "status", "60s", "red."]
    table = [headers]
    for r in rows:
        table.append(
            [
                f"{r.duration_min:g}",
                str(r.binaries),
                str(r.integers),
                str(r.trips),
                "--" if r.sol is None else f"{r.sol:g}",
                "--" if r.bound is None else f"{r.bound:.2f}",
                f"{r.time_s:g}",
                r.status,
                "--" if r.sixty is None else f"{r.sixty:g}",
                "--" if r.reduction is None else f"{r.reduction:.1f}x",
            ]
        )
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def rows_to_csv(rows: list[RunSummaryRow]) -> str:
    buf = _stdio.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["label", "duration_min", "binaries", "integers", "trips", "sol",
         "bound", "time_s", "status", "sixty", "reduction", "error"]
    )
    for r in rows:
        writer.writerow(
            [r.label, r.duration_min, r.binaries, r.integers, r.trips, r.sol,
             r.bound, r.time_s, r.status, r.sixty, r.reduction, r.error or ""]
        )
    return buf.getvalue()
