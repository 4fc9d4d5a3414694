import random

import pytest

from railrecover import io, presets


def random_scenario_doc(seed: int) -> dict:
    """Small random line + disruption, sized for exhaustive checking."""

    rng = random.Random(seed)
    n_st = rng.choice([3, 3, 4])
    stations = [chr(ord("A") + i) for i in range(n_st)]
    drive_times = {
        f"{a}~{b}": rng.choice([60, 90, 120])
        for a, b in zip(stations, stations[1:])
    }
    cycle = rng.choice([240, 300])
    dwell = 30
    one_way = sum(
        int(t * 1.1 + 0.999) for t in drive_times.values()
    ) + dwell * (n_st - 2)
    horizon_end = one_way + rng.choice([0, 0, cycle])

    all_switches = rng.random() < 0.7
    switches = stations if all_switches else [stations[0], stations[-1]]
    turn_station = []
    if all_switches and n_st >= 3 and rng.random() < 0.5:
        turn_station = [stations[1]]

    depots = []
    if rng.random() < 0.4:
        depots.append(
            {
                "id": "D0",
                "station": rng.choice(stations),
                "replacement_capacity": rng.choice([0, 1]),
                "min_idle": 60,
            }
        )

    doc = {
        "version": 1,
        "name": f"rand{seed}",
        "topology": {
            "stations": stations,
            "drive_times": drive_times,
            "switches": switches,
            "depots": depots,
        },
        "timetable": {
            "generate": {
                "cycle_time": cycle,
                "horizon": [0, horizon_end],
                "buffer_fraction": 0.1,
            }
        },
        "policy": {
            "max_delay": cycle,
            "recovery_horizon": rng.choice([0, 3600]),
            "safety_margin": rng.choice([30, 60]),
            "min_turnaround": 60,
            "min_dwell": 20,
            "turn_stations": turn_station,
        },
    }
    if rng.random() < 0.9:
        a = rng.randrange(n_st - 1)
        b = rng.randrange(a + 1, n_st)
        t0 = rng.choice([0, 0, cycle // 2])
        if rng.random() < 0.6:
            t1 = horizon_end
        else:
            t1_lo = min(max(t0 + 60, horizon_end // 2), horizon_end)
            t1 = rng.randrange(t1_lo, horizon_end + 1)
        directions = rng.choice(
            [["down"], ["down"], ["down"], ["up"], ["up"], ["up", "down"]]
        )
        doc["disruption"] = {
            "from": stations[a],
            "to": stations[b],
            "directions": directions,
            "interval": [t0, t1],
        }
    return doc


def sized_random_scenarios(
    count: int, max_binaries: int, start_seed: int = 0, max_trips: int = None
):
    """First ``count`` random scenarios whose unreduced model stays small."""

    from railrecover import milp, model

    found = []
    seed = start_seed
    while len(found) < count and seed < start_seed + 40 * count:
        doc = random_scenario_doc(seed)
        seed += 1
        try:
            scen = io.parse_scenario(doc)
            net = model.build_network(scen)
        except io.ScenarioFormatError:
            continue
        if max_trips is not None and len(scen.timetable.trips) > max_trips:
            continue
        n_bin = len(milp.formulate(net).free_binaries())
        if n_bin <= max_binaries:
            found.append((doc["name"], scen, net))
    return found


@pytest.fixture(scope="session")
def mini_line():
    return io.parse_scenario(presets.mini_line_document())


@pytest.fixture(scope="session")
def mini_line_open():
    return io.parse_scenario(presets.mini_line_document(blocked=False))


@pytest.fixture(scope="session")
def mini_line_turn():
    return io.parse_scenario(
        presets.mini_line_document(
            turn_at_middle=True, block_both_tags=True, block_section=("B", "C")
        )
    )
