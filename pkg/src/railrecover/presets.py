"""Built-in scenario documents: the three-station bottleneck fixtures and
a synthetic 24-station line shaped like a big-city subway."""

from __future__ import annotations

# per-segment minimal driving times for the 24-station line; the pattern
# sums to 2040 s (34 min end to end)
_LINE24_TIMES = [
    80, 95, 110, 85, 90, 100, 80, 95, 85, 90, 110, 80,
    95, 85, 100, 90, 80, 95, 85, 90, 90, 70, 60,
]

assert sum(_LINE24_TIMES) == 2040


def mini_line_document(
    *,
    blocked: bool = True,
    turn_at_middle: bool = False,
    block_both_tags: bool = False,
    block_section: tuple[str, str] = ("A", "C"),
    safety_margin: int = 60,
    max_delay: int = 300,
    drive_stretch: int | None = None,
    drive_time: int = 150,
    scheduled: int = 165,
    turn_penalty: float = 0.0,
    return_penalty: float = 0.0,
    depot_at_middle: bool = False,
    horizon_end: int = 900,
) -> dict:
    """Two opposing trains over three stations, one direction blocked.

    With the default timings the corridor transit is 300 s minimum, the
    cycle is 300 s and both trains are due to enter at t=0, so at most one
    direction fits through the bottleneck.
    """

    dwell = 30
    t2 = scheduled + dwell  # second trip departure
    trips = []
    for line, stations in (("u00", ["A", "B", "C"]), ("d00", ["C", "B", "A"])):
        train = "t1" if line == "u00" else "t2"
        trips.append(
            {
                "id": f"{line}.00",
                "train": train,
                "line": line,
                "from": stations[0],
                "to": stations[1],
                "dep": 0,
                "arr": scheduled,
            }
        )
        trips.append(
            {
                "id": f"{line}.01",
                "train": train,
                "line": line,
                "from": stations[1],
                "to": stations[2],
                "dep": t2,
                "arr": t2 + scheduled,
            }
        )
    doc = {
        "version": 1,
        "name": "mini_line",
        "topology": {
            "stations": ["A", "B", "C"],
            "drive_times": {"A~B": drive_time, "B~C": drive_time},
            "switches": ["A", "C"] + (["B"] if turn_at_middle else []),
            "depots": (
                [{"id": "DB", "station": "B", "replacement_capacity": 0, "min_idle": 120}]
                if depot_at_middle
                else []
            ),
        },
        "timetable": {
            "cycle_time": 300,
            "horizon": [0, horizon_end],
            "trips": trips,
            "circulations": {
                "t1": ["u00.00", "u00.01"],
                "t2": ["d00.00", "d00.01"],
            },
        },
        "policy": {
            "max_delay": max_delay,
            "recovery_horizon": 0,
            "safety_margin": safety_margin,
            "turn_stations": ["B"] if turn_at_middle else [],
            "min_dwell": 20,
            "min_turnaround": 60,
            "turn_penalty": turn_penalty,
            "return_penalty": return_penalty,
        },
    }
    if drive_stretch is not None:
        doc["policy"]["drive_stretch"] = drive_stretch
    if blocked:
        doc["disruption"] = {
            "from": block_section[0],
            "to": block_section[1],
            "directions": ["up", "down"] if block_both_tags else ["down"],
            "interval": [0, horizon_end],
        }
    return doc


def fig1_document(safety_margin: int) -> dict:
    """The single-track three-station meet with wide delay windows.

    Drive slack is L_max - L_min = 60 on every segment, so the strict
    platform margin bound sits at 30.
    """

    doc = mini_line_document(
        blocked=True,
        safety_margin=safety_margin,
        max_delay=600,
        drive_time=60,
        scheduled=60,
        drive_stretch=60,
        horizon_end=1500,
    )
    doc["name"] = "fig1"
    doc["timetable"]["cycle_time"] = 600
    return doc


def u6_like_document(
    *,
    cycle_time: int = 600,
    blockage_start: int = 1800,
    blockage_minutes: int = 5,
    horizon_end: int | None = None,
    recovery_horizon: int = 3600,
    max_delay: int | None = None,
    turn_penalty: float = 0.0,
    return_penalty: float = 0.0,
) -> dict:
    """A 24-station shuttle line with depots, switches and one blockage.

    The per-station driving times are synthetic; only the line shape
    (24 stations, 34 minutes end to end) mirrors a real metro line.
    """

    stations = [f"S{i:02d}" for i in range(1, 25)]
    drive_times = {
        f"{a}~{b}": t for (a, b), t in zip(zip(stations, stations[1:]), _LINE24_TIMES)
    }
    t1 = blockage_start + blockage_minutes * 60
    if horizon_end is None:
        horizon_end = t1 + recovery_horizon + cycle_time
    doc = {
        "version": 1,
        "name": f"u6_like_c{cycle_time}_d{blockage_minutes}",
        "topology": {
            "stations": stations,
            "drive_times": drive_times,
            "switches": ["S01", "S05", "S08", "S10", "S13", "S16", "S20", "S24"],
            "depots": [
                {"id": "D-S05", "station": "S05", "replacement_capacity": 1, "min_idle": 300},
                {"id": "D-S12", "station": "S12", "replacement_capacity": 1, "min_idle": 300},
                {"id": "D-S24", "station": "S24", "replacement_capacity": 1, "min_idle": 300},
            ],
        },
        "timetable": {
            "generate": {
                "cycle_time": cycle_time,
                "horizon": [0, horizon_end],
                "buffer_fraction": 0.10,
            }
        },
        "disruption": {
            "from": "S10",
            "to": "S13",
            "directions": ["up"],
            "interval": [blockage_start, t1],
        },
        "policy": {
            "max_delay": cycle_time if max_delay is None else max_delay,
            "recovery_horizon": recovery_horizon,
            "safety_margin": 60,
            "turn_stations": ["S10", "S13"],
            "min_dwell": 20,
            "min_turnaround": 120,
            "turn_penalty": turn_penalty,
            "return_penalty": return_penalty,
        },
    }
    return doc
