"""Event-activity network for a two-track rail line under disruption.

Events are departures, arrivals, depot arrivals and replacement sources;
activities connect them: drives, waits, turns, depot returns and
reinsertions, plus disjunctive headway pairs on contested tracks and
station platforms.  All times are integer seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

UP = "up"
DOWN = "down"

# event kinds
DEP = "dep"
ARR = "arr"
DEPOT_ARR = "depot_arr"
REPL = "repl"

# activity kinds
DRIVE = "drive"
WAIT = "wait"
TURN = "turn"
RETURN = "return"
REINSERT = "reinsert"
TRACK_HEADWAY = "track_headway"
STATION_HEADWAY = "station_headway"

FLOW_KINDS = (DRIVE, WAIT, TURN, RETURN, REINSERT)
TRAIN_KINDS = (DRIVE, WAIT, TURN)

# generator defaults (seconds)
DEFAULT_DWELL = 30


class ModelError(ValueError):
    """A scenario, timetable or network breaks a structural invariant."""


@dataclass(frozen=True, order=True)
class TrackKey:
    """One physical directed track between two adjacent stations.

    ``lo``/``hi`` are the stations in line order; ``tag`` is the direction
    the track nominally serves (UP runs lo->hi).
    """

    lo: str
    hi: str
    tag: str

    def opposite(self) -> "TrackKey":
        return TrackKey(self.lo, self.hi, DOWN if self.tag == UP else UP)

    def __str__(self) -> str:
        return f"{self.lo}~{self.hi}/{self.tag}"


@dataclass(frozen=True)
class Depot:
    id: str
    station: str
    replacement_capacity: int
    min_idle: int

    def validate(self) -> None:
        if self.replacement_capacity < 0:
            raise ModelError(f"depot {self.id}: replacement_capacity < 0")
        if self.min_idle < 0:
            raise ModelError(f"depot {self.id}: min_idle < 0")


@dataclass
class Topology:
    """Ordered station list of a single line plus tracks, depots, switches.

    ``drive_times`` holds the symmetric minimal driving time per adjacent
    station pair keyed by (lo, hi) in line order.
    """

    stations: list[str]
    drive_times: dict[tuple[str, str], int]
    depots: list[Depot] = field(default_factory=list)
    switches: set[str] = field(default_factory=set)
    tracks: set[TrackKey] = field(default_factory=set)
    platforms: dict[tuple[str, str], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.tracks:
            for lo, hi in self.segments():
                self.tracks.add(TrackKey(lo, hi, UP))
                self.tracks.add(TrackKey(lo, hi, DOWN))
        for st in self.stations:
            for tag in (UP, DOWN):
                self.platforms.setdefault((st, tag), f"{st}/{tag}")

    def segments(self) -> list[tuple[str, str]]:
        return list(zip(self.stations, self.stations[1:]))

    def index(self, station: str) -> int:
        return self.stations.index(station)

    def drive_time(self, a: str, b: str) -> int:
        lo, hi = (a, b) if self.index(a) < self.index(b) else (b, a)
        return self.drive_times[(lo, hi)]

    def track_for(self, frm: str, to: str, tag: str) -> TrackKey:
        lo, hi = (frm, to) if self.index(frm) < self.index(to) else (to, frm)
        return TrackKey(lo, hi, tag)

    def platform(self, station: str, tag: str) -> str:
        return self.platforms[(station, tag)]

    def validate(self) -> None:
        if len(self.stations) < 2:
            raise ModelError("topology needs at least two stations")
        if len(set(self.stations)) != len(self.stations):
            raise ModelError("duplicate station names")
        for lo, hi in self.segments():
            if (lo, hi) not in self.drive_times:
                raise ModelError(f"missing drive time for segment {lo}~{hi}")
            if self.drive_times[(lo, hi)] <= 0:
                raise ModelError(f"non-positive drive time for {lo}~{hi}")
        for tk in self.tracks:
            if tk.lo not in self.stations or tk.hi not in self.stations:
                raise ModelError(f"track {tk} references unknown station")
        for d in self.depots:
            d.validate()
            if d.station not in self.stations:
                raise ModelError(f"depot {d.id} at unknown station {d.station}")
        if not self.switches <= set(self.stations):
            raise ModelError("switches must be declared stations")


@dataclass(frozen=True)
class Trip:
    """A single scheduled run between two adjacent stations."""

    id: str
    train: str
    line: str
    frm: str
    to: str
    track: TrackKey
    dep: int
    arr: int

    @property
    def direction(self) -> str:
        return self.track.tag

    def validate(self, topology: Topology) -> None:
        if self.arr <= self.dep:
            raise ModelError(f"trip {self.id}: arrival not after departure")
        lo, hi = sorted((self.frm, self.to), key=topology.index)
        if (self.track.lo, self.track.hi) != (lo, hi):
            raise ModelError(f"trip {self.id}: track does not connect its stations")


@dataclass
class Timetable:
    trips: list[Trip]
    circulations: dict[str, list[str]]
    cycle_time: int
    horizon: tuple[int, int]

    def trip(self, trip_id: str) -> Trip:
        return self._by_id[trip_id]

    def __post_init__(self) -> None:
        self._by_id = {t.id: t for t in self.trips}

    def validate(self, topology: Topology) -> None:
        if self.cycle_time <= 0:
            raise ModelError("cycle_time must be positive")
        lo, hi = self.horizon
        for t in self.trips:
            t.validate(topology)
            if not (lo <= t.dep and t.arr <= hi):
                raise ModelError(f"trip {t.id} outside horizon")
        for train, chain in self.circulations.items():
            for a, b in zip(chain, chain[1:]):
                ta, tb = self._by_id[a], self._by_id[b]
                if ta.to != tb.frm:
                    raise ModelError(
                        f"circulation of {train}: {a} arrives at {ta.to} "
                        f"but {b} departs from {tb.frm}"
                    )
                if tb.dep < ta.arr:
                    raise ModelError(f"circulation of {train}: times decrease at {b}")


@dataclass
class Blockage:
    """A contiguous section of blocked tracks and its closure interval."""

    tracks: set[TrackKey]
    start: int
    end: int
    section: tuple[str, str]  # boundary stations in line order
    tags: set[str]

    def validate(self, topology: Topology, horizon: tuple[int, int]) -> None:
        if self.start >= self.end:
            raise ModelError("blocked interval is empty")
        if not (horizon[0] <= self.start and self.end <= horizon[1] + 1):
            raise ModelError("blocked interval outside timetable horizon")
        for tk in self.tracks:
            if tk not in topology.tracks:
                raise ModelError(f"blocked track {tk} not in topology")


@dataclass
class Policy:
    """Dispatching parameters for one disruption scenario."""

    max_delay: int
    recovery_horizon: int
    safety_margin: int
    turn_stations: set[str] = field(default_factory=set)
    min_dwell: int = 20
    min_turnaround: int = 120
    depot_transfer: int = 60
    turn_window: Optional[int] = None  # defaults to 2 * cycle_time
    action_window: Optional[int] = None  # defaults to cycle_time
    reinsert_candidates: int = 3
    drive_stretch: Optional[int] = None  # default 2 * per-trip buffer
    stretch_overrides: dict[str, int] = field(default_factory=dict)
    default_weight: float = 1.0
    direction_weights: dict[str, float] = field(default_factory=dict)
    trip_weights: dict[str, float] = field(default_factory=dict)
    turn_penalty: float = 0.0
    return_penalty: float = 0.0

    def weight(self, trip: Trip) -> float:
        if trip.id in self.trip_weights:
            return self.trip_weights[trip.id]
        return self.direction_weights.get(trip.direction, self.default_weight)


@dataclass
class Scenario:
    topology: Topology
    timetable: Timetable
    blockage: Optional[Blockage]
    policy: Policy
    solver_defaults: dict = field(default_factory=dict)
    name: str = "scenario"

    def validate(self) -> None:
        self.topology.validate()
        self.timetable.validate(self.topology)
        if self.policy.max_delay < 0:
            raise ModelError("max delay must be nonnegative")
        if self.policy.max_delay > self.timetable.cycle_time:
            raise ModelError("max delay exceeds cycle time")
        if self.blockage is not None:
            self.blockage.validate(self.topology, self.timetable.horizon)
        if not self.policy.turn_stations <= self.topology.switches:
            raise ModelError("turn stations must be switch stations")

    @property
    def recovery_end(self) -> Optional[int]:
        if self.blockage is None:
            return None
        return self.blockage.end + self.policy.recovery_horizon


@dataclass
class Event:
    id: str
    kind: str
    station: str
    platform: Optional[str] = None
    time: Optional[int] = None
    trip: Optional[str] = None
    direction: Optional[str] = None


@dataclass
class Activity:
    id: str
    kind: str
    tail: str
    head: str
    l_min: int = 0
    l_max: Optional[int] = None  # drives only
    headway: Optional[int] = None  # L_vw, headway kinds only
    margin: Optional[int] = None  # S, headway kinds only
    cost: float = 0.0  # c_a, drives only
    penalty: float = 0.0  # c_b, turns and returns only
    planned: bool = False
    forced_zero: bool = False
    trips: tuple[str, ...] = ()


@dataclass
class StationConflict:
    """Two arrivals competing for one platform, with coupled successor pairs.

    ``couples`` lists (successor activity of a, successor activity of b)
    combinations; ``transmission`` names the track headway pairs on either
    side of the station that must carry the same priority decision.
    """

    a: str
    b: str
    margin: int
    couples: list[tuple[str, str]]
    transmission: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class Network:
    events: dict[str, Event]
    activities: dict[str, Activity]
    conflicts: list[StationConflict]
    depots: dict[str, Depot]
    used_track: dict[str, TrackKey]
    rerouted: set[str]
    max_delay: int
    recovery_end: Optional[int]
    windows: dict[str, tuple[Optional[int], Optional[int]]]
    head_events: set[str]
    tail_events: set[str]
    provenance: dict[str, str] = field(default_factory=dict)
    trip_train: dict[str, str] = field(default_factory=dict)
    drive_by_trip: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.in_flow: dict[str, list[str]] = {e: [] for e in self.events}
        self.out_flow: dict[str, list[str]] = {e: [] for e in self.events}
        for a in self.activities.values():
            if a.kind in FLOW_KINDS:
                self.out_flow[a.tail].append(a.id)
                self.in_flow[a.head].append(a.id)
        for lst in self.in_flow.values():
            lst.sort()
        for lst in self.out_flow.values():
            lst.sort()

    def event(self, eid: str) -> Event:
        return self.events[eid]

    def activity(self, aid: str) -> Activity:
        return self.activities[aid]

    def pinned(self, eid: str) -> bool:
        ev = self.events[eid]
        return (
            self.recovery_end is not None
            and ev.time is not None
            and ev.time >= self.recovery_end
        )

    def delay_cap(self, eid: str) -> int:
        return 0 if self.pinned(eid) else self.max_delay

    def drive_of(self, trip_id: str) -> Activity:
        return self.activities[self.drive_by_trip[trip_id]]

    def selectable(self) -> list[Activity]:
        return [a for a in self.activities.values() if a.kind in FLOW_KINDS]

    def track_pairs(self) -> list[tuple[str, str]]:
        """Unordered track headway pairs as (forward id, reverse id)."""
        pairs = []
        for a in self.activities.values():
            if a.kind == TRACK_HEADWAY and a.tail < a.head:
                rev = headway_id("g", a.head, a.tail)
                pairs.append((a.id, rev))
        return sorted(pairs)

    def station_pairs(self) -> list[tuple[str, str]]:
        pairs = []
        for a in self.activities.values():
            if a.kind == STATION_HEADWAY and a.tail < a.head:
                rev = headway_id("h", a.head, a.tail)
                pairs.append((a.id, rev))
        return sorted(pairs)

    def timed_events(self) -> list[str]:
        return sorted(e for e, ev in self.events.items() if ev.time is not None)

    def stats(self) -> dict:
        kinds: dict[str, int] = {}
        for a in self.activities.values():
            kinds[a.kind] = kinds.get(a.kind, 0) + 1
        return {
            "events": len(self.events),
            "activities": len(self.activities),
            "conflicts": len(self.conflicts),
            "rerouted": len(self.rerouted),
            "by_kind": kinds,
        }


def dep_id(trip_id: str) -> str:
    return f"{trip_id}/d"


def arr_id(trip_id: str) -> str:
    return f"{trip_id}/a"


def headway_id(prefix: str, tail: str, head: str) -> str:
    return f"{prefix}:{tail}|{head}"


def generate_cyclic_timetable(
    topology: Topology,
    cycle_time: int,
    horizon: tuple[int, int],
    buffer_fraction: float,
    *,
    dwell: int = DEFAULT_DWELL,
    min_turnaround: int = 120,
) -> Timetable:
    """Generate a shuttle timetable between the two terminal stations.

    Each direction gets a departure every ``cycle_time`` seconds; scheduled
    segment durations are the minimal driving time stretched by
    ``buffer_fraction`` and rounded up to whole seconds.  Vehicles are
    instantiated as needed and alternate directions.
    """

    topology.validate()
    if cycle_time <= 0:
        raise ModelError("cycle_time must be positive")
    if not 0 <= buffer_fraction < 1:
        raise ModelError("buffer_fraction must be in [0, 1)")

    stations = topology.stations
    seg_sched = [
        math.ceil(topology.drive_times[(lo, hi)] * (1 + buffer_fraction))
        for lo, hi in topology.segments()
    ]
    one_way = sum(seg_sched) + dwell * (len(stations) - 2)
    start, end = horizon
    if end - start < one_way:
        raise ModelError("horizon shorter than one terminal-to-terminal run")

    runs: list[tuple[int, str]] = []  # (departure time, direction)
    t = start
    while t + one_way <= end:
        runs.append((t, UP))
        runs.append((t, DOWN))
        t += cycle_time

    trips: list[Trip] = []
    circulations: dict[str, list[str]] = {}
    # (ready time, vehicle) per terminal; earliest ready, then id, is next out
    idle: dict[str, list[tuple[int, str]]] = {stations[0]: [], stations[-1]: []}
    n_vehicles = 0
    slot_index = {UP: 0, DOWN: 0}

    for dep_time, direction in sorted(runs, key=lambda r: (r[0], r[1] != UP)):
        terminal = stations[0] if direction == UP else stations[-1]
        pool = sorted(idle[terminal])
        vehicle = None
        for ready, vid in pool:
            if ready <= dep_time:
                vehicle = vid
                idle[terminal].remove((ready, vid))
                break
        if vehicle is None:
            n_vehicles += 1
            vehicle = f"v{n_vehicles:02d}"
            circulations[vehicle] = []

        k = slot_index[direction]
        slot_index[direction] += 1
        line = f"{'u' if direction == UP else 'd'}{k:02d}"
        order = stations if direction == UP else list(reversed(stations))
        durations = seg_sched if direction == UP else list(reversed(seg_sched))
        t = dep_time
        for i, (frm, to) in enumerate(zip(order, order[1:])):
            arr = t + durations[i]
            trips.append(
                Trip(
                    id=f"{line}.{i:02d}",
                    train=vehicle,
                    line=line,
                    frm=frm,
                    to=to,
                    track=topology.track_for(frm, to, direction),
                    dep=t,
                    arr=arr,
                )
            )
            circulations[vehicle].append(f"{line}.{i:02d}")
            t = arr + dwell
        run_arrival = trips[-1].arr
        other = stations[-1] if direction == UP else stations[0]
        idle[other].append((run_arrival + min_turnaround, vehicle))

    tt = Timetable(trips, circulations, cycle_time, horizon)
    tt.validate(topology)
    return tt


def _classify_blocked_trip(
    trip: Trip, drive_min: int, blockage: Blockage, max_delay: int
) -> tuple[str, Optional[int], Optional[int]]:
    """Decide how a trip whose nominal track is blocked can still run.

    Returns (verdict, dep_lo, arr_hi) where verdict is one of "before"
    (must clear the section before the closure), "after" (must enter at or
    after reopening) or "blocked" (no feasible slot on its own track).
    """

    t0, t1 = blockage.start, blockage.end
    can_before = trip.dep + drive_min <= t0
    can_after = t1 - trip.dep <= max_delay
    if can_before:
        return "before", None, t0
    if can_after:
        return "after", t1, None
    return "blocked", None, None


def build_network(scenario: Scenario) -> Network:
    """Construct the full event-activity network for a scenario.

    Blocked trips are rerouted onto the opposite track when the section
    boundary stations are switches; otherwise their drive is forced to
    zero.  Headway pairs and platform conflicts are then enumerated on the
    contested resources.
    """

    scenario.validate()
    topo = scenario.topology
    tt = scenario.timetable
    pol = scenario.policy
    blockage = scenario.blockage
    Y = pol.max_delay

    events: dict[str, Event] = {}
    acts: dict[str, Activity] = {}
    used_track: dict[str, TrackKey] = {}
    rerouted: set[str] = set()
    windows: dict[str, tuple[Optional[int], Optional[int]]] = {}

    reroute_allowed = False
    if blockage is not None:
        lo_b, hi_b = blockage.section
        reroute_allowed = lo_b in topo.switches and hi_b in topo.switches

    trips_sorted = sorted(tt.trips, key=lambda t: (t.dep, t.frm, t.train))
    for trip in trips_sorted:
        drive_min = topo.drive_time(trip.frm, trip.to)
        sched = trip.arr - trip.dep
        if sched < drive_min:
            raise ModelError(f"trip {trip.id}: scheduled below minimal driving time")
        track = trip.track
        forced = False
        dep_lo = arr_hi = None
        if blockage is not None and track in blockage.tracks:
            verdict, dep_lo, arr_hi = _classify_blocked_trip(
                trip, drive_min, blockage, Y
            )
            if verdict == "blocked":
                opposite = track.opposite()
                if reroute_allowed and opposite not in blockage.tracks:
                    track = opposite
                    rerouted.add(trip.id)
                else:
                    forced = True

        used_track[trip.id] = track

        # a rerouted trip reaches the section boundary on its own rail
        # again (the switch sits before the platform), interior stations
        # are served from the opposite platform
        arr_tag = track.tag
        if trip.id in rerouted and blockage is not None:
            if trip.to in blockage.section:
                arr_tag = trip.direction

        dep_ev = Event(
            id=dep_id(trip.id),
            kind=DEP,
            station=trip.frm,
            platform=topo.platform(trip.frm, trip.direction),
            time=trip.dep,
            trip=trip.id,
            direction=trip.direction,
        )
        arr_ev = Event(
            id=arr_id(trip.id),
            kind=ARR,
            station=trip.to,
            platform=topo.platform(trip.to, arr_tag),
            time=trip.arr,
            trip=trip.id,
            direction=trip.direction,
        )
        events[dep_ev.id] = dep_ev
        events[arr_ev.id] = arr_ev

        if pol.drive_stretch is not None:
            stretch = pol.drive_stretch
        else:
            stretch = 2 * (sched - drive_min)
        stretch = pol.stretch_overrides.get(trip.id, stretch)
        drive = Activity(
            id=f"drv:{trip.id}",
            kind=DRIVE,
            tail=dep_ev.id,
            head=arr_ev.id,
            l_min=drive_min,
            l_max=sched + stretch,
            cost=pol.weight(trip),
            forced_zero=forced,
            trips=(trip.id,),
        )
        acts[drive.id] = drive
        if dep_lo is not None or arr_hi is not None:
            windows[drive.id] = (dep_lo, arr_hi)

    # waits within a line, planned turns between lines of one circulation
    for train in sorted(tt.circulations):
        chain = tt.circulations[train]
        for a, b in zip(chain, chain[1:]):
            ta, tb = tt.trip(a), tt.trip(b)
            if ta.line == tb.line:
                acts[f"wt:{a}>{b}"] = Activity(
                    id=f"wt:{a}>{b}",
                    kind=WAIT,
                    tail=arr_id(a),
                    head=dep_id(b),
                    l_min=pol.min_dwell,
                )
            else:
                acts[f"tn:{a}>{b}"] = Activity(
                    id=f"tn:{a}>{b}",
                    kind=TURN,
                    tail=arr_id(a),
                    head=dep_id(b),
                    l_min=pol.min_turnaround,
                    planned=True,
                )

    planned_pairs = {
        (a.tail, a.head) for a in acts.values() if a.kind == TURN and a.planned
    }

    # unplanned turns and depot moves are disruption responses; keep their
    # generation inside the active window around the blockage to hold the
    # binary count down
    turn_window = pol.turn_window
    if turn_window is None:
        turn_window = 2 * tt.cycle_time
    action_window = pol.action_window
    if action_window is None:
        action_window = tt.cycle_time
    recovery_end = scenario.recovery_end
    horizon_end = tt.horizon[1]
    insert_until = recovery_end if recovery_end is not None else horizon_end
    if blockage is not None:
        act_lo = blockage.start - action_window
        act_hi = blockage.end + action_window
    else:
        act_lo, act_hi = 1, 0  # empty window: no unplanned moves

    by_arr_station: dict[str, list[Trip]] = {}
    by_dep_station: dict[str, list[Trip]] = {}
    for trip in trips_sorted:
        by_arr_station.setdefault(trip.to, []).append(trip)
        by_dep_station.setdefault(trip.frm, []).append(trip)
    for station in sorted(pol.turn_stations):
        for ta in by_arr_station.get(station, []):
            if not act_lo <= ta.arr <= act_hi:
                continue
            for tb in by_dep_station.get(station, []):
                if ta.line == tb.line or ta.direction == tb.direction:
                    continue
                if (arr_id(ta.id), dep_id(tb.id)) in planned_pairs:
                    continue
                lo_ok = tb.dep + _cap(scenario, tb.dep) >= ta.arr + pol.min_turnaround
                hi_ok = tb.dep <= ta.arr + pol.min_turnaround + turn_window
                if lo_ok and hi_ok:
                    aid = f"tn:{ta.id}>{tb.id}"
                    acts[aid] = Activity(
                        id=aid,
                        kind=TURN,
                        tail=arr_id(ta.id),
                        head=dep_id(tb.id),
                        l_min=pol.min_turnaround,
                        penalty=pol.turn_penalty,
                    )

    def _insert_targets(station: str, ready: int, skip: Optional[str]) -> list[Trip]:
        """Earliest feasible departures after readiness and after reopening."""

        k = pol.reinsert_candidates
        picked: dict[str, Trip] = {}
        for anchor in (ready, blockage.end if blockage else ready):
            per_dir = {UP: 0, DOWN: 0}
            for tb in by_dep_station.get(station, []):
                if tb.id == skip or tb.dep > insert_until:
                    continue
                if tb.dep + _cap(scenario, tb.dep) < ready or tb.dep < anchor - tt.cycle_time:
                    continue
                if per_dir[tb.direction] >= k:
                    continue
                per_dir[tb.direction] += 1
                picked[tb.id] = tb
        return sorted(picked.values(), key=lambda t: (t.dep, t.id))

    for depot in sorted(topo.depots, key=lambda d: d.id):
        for ta in by_arr_station.get(depot.station, []):
            if not act_lo <= ta.arr <= act_hi:
                continue
            deid = f"{ta.id}/ret@{depot.id}"
            events[deid] = Event(
                id=deid,
                kind=DEPOT_ARR,
                station=depot.id,
                time=ta.arr + pol.depot_transfer,
                trip=ta.id,
            )
            rid = f"rt:{ta.id}@{depot.id}"
            acts[rid] = Activity(
                id=rid,
                kind=RETURN,
                tail=arr_id(ta.id),
                head=deid,
                l_min=pol.depot_transfer,
                penalty=pol.return_penalty,
            )
            ready = ta.arr + pol.depot_transfer + depot.min_idle
            for tb in _insert_targets(depot.station, ready, skip=ta.id):
                iid = f"ri:{ta.id}@{depot.id}>{tb.id}"
                acts[iid] = Activity(
                    id=iid,
                    kind=REINSERT,
                    tail=deid,
                    head=dep_id(tb.id),
                    l_min=depot.min_idle,
                )

        # replacement stock becomes available once the disruption starts
        if depot.replacement_capacity > 0 and blockage is not None:
            sid = f"src@{depot.id}"
            events[sid] = Event(id=sid, kind=REPL, station=depot.id)
            for tb in _insert_targets(depot.station, blockage.start, skip=None):
                aid = f"rp:{depot.id}>{tb.id}"
                acts[aid] = Activity(
                    id=aid, kind=REINSERT, tail=sid, head=dep_id(tb.id)
                )

    head_events = set()
    tail_events = set()
    for chain in tt.circulations.values():
        head_events.add(dep_id(chain[0]))
        tail_events.add(arr_id(chain[-1]))

    provenance = {
        eid: ev.trip for eid, ev in events.items() if ev.trip is not None
    }
    trip_train = {t.id: t.train for t in tt.trips}
    drive_by_trip = {t.id: f"drv:{t.id}" for t in tt.trips}
    net = Network(
        events=events,
        activities=acts,
        conflicts=[],
        depots={d.id: d for d in topo.depots},
        used_track=used_track,
        rerouted=rerouted,
        max_delay=Y,
        recovery_end=recovery_end,
        windows=windows,
        head_events=head_events,
        tail_events=tail_events,
        provenance=provenance,
        trip_train=trip_train,
        drive_by_trip=drive_by_trip,
    )

    for fwd, rev in enumerate_track_conflicts(net, scenario):
        acts[fwd.id] = fwd
        acts[rev.id] = rev
    net.conflicts = enumerate_station_conflicts(net, scenario)
    return net


def _cap(scenario: Scenario, time: int) -> int:
    rec = scenario.recovery_end
    if rec is not None and time >= rec:
        return 0
    return scenario.policy.max_delay


def enumerate_track_conflicts(
    network: Network, scenario: Scenario
) -> list[tuple[Activity, Activity]]:
    """Headway pairs between departures competing for a contested track.

    Only tracks that received rerouted traffic are contested.  A pair is
    skipped when the timetable order is satisfied for every admissible
    delay, which is exactly the disjoint-feasible-window case.
    """

    tt = scenario.timetable
    S = scenario.policy.safety_margin
    contested = {network.used_track[t] for t in network.rerouted}
    pairs: list[tuple[Activity, Activity]] = []
    for track in sorted(contested):
        users = sorted(
            (t for t in tt.trips if network.used_track[t.id] == track),
            key=lambda t: (t.dep, t.id),
        )
        for i, ta in enumerate(users):
            for tb in users[i + 1 :]:
                if ta.id == tb.id:
                    continue
                da = network.drive_of(ta.id)
                db = network.drive_of(tb.id)
                if da.forced_zero or db.forced_zero:
                    continue
                if ta.direction == tb.direction:
                    l_ab = l_ba = S
                else:
                    # opposite direction: transit time of the first train
                    # plus the margin; the platform margins cover the
                    # drive-time slack (see validate_safety_margins)
                    l_ab = da.l_min + S
                    l_ba = db.l_min + S
                cap_a = _cap(scenario, ta.dep)
                if tb.dep - ta.dep >= cap_a + l_ab:
                    continue  # order can never bind nor flip
                v, w = dep_id(ta.id), dep_id(tb.id)
                fwd = Activity(
                    id=headway_id("g", v, w),
                    kind=TRACK_HEADWAY,
                    tail=v,
                    head=w,
                    headway=l_ab,
                    margin=S,
                )
                rev = Activity(
                    id=headway_id("g", w, v),
                    kind=TRACK_HEADWAY,
                    tail=w,
                    head=v,
                    headway=l_ba,
                    margin=S,
                )
                pairs.append((fwd, rev))
    return pairs


def _successors(network: Network, arrival: str) -> list[Activity]:
    out = []
    for aid in network.out_flow[arrival]:
        act = network.activities[aid]
        if act.kind in (WAIT, TURN):
            out.append(act)
    return out


def enumerate_station_conflicts(
    network: Network, scenario: Scenario
) -> list[StationConflict]:
    """Platform conflicts between opposing arrivals, with coupled successors.

    Each conflict yields the two disjunctive station headway activities and
    the list of successor-departure couples the precedence constraint has
    to be instantiated for.
    """

    S = scenario.policy.safety_margin
    by_platform: dict[str, list[Event]] = {}
    for eid in sorted(network.events):
        ev = network.events[eid]
        if ev.kind == ARR and ev.platform is not None:
            by_platform.setdefault(ev.platform, []).append(ev)

    conflicts: list[StationConflict] = []
    for platform in sorted(by_platform):
        group = sorted(by_platform[platform], key=lambda e: (e.time, e.id))
        for i, va in enumerate(group):
            for vb in group[i + 1 :]:
                if va.direction == vb.direction:
                    continue
                da = network.drive_of(va.trip)
                db = network.drive_of(vb.trip)
                if da.forced_zero or db.forced_zero:
                    continue
                succ_a = _successors(network, va.id)
                succ_b = _successors(network, vb.id)
                if not succ_a or not succ_b:
                    continue

                def free(first_succ, second_ev):
                    return all(
                        network.events[s.head].time
                        + network.delay_cap(s.head)
                        + S
                        <= second_ev.time
                        for s in first_succ
                    )

                if free(succ_a, vb) or free(succ_b, va):
                    continue
                couples = sorted(
                    (sa.id, sb.id) for sa in succ_a for sb in succ_b
                )
                conflict = StationConflict(
                    a=va.id,
                    b=vb.id,
                    margin=S,
                    couples=couples,
                    transmission=_transmission_pairs(network, va, vb),
                )
                conflicts.append(conflict)
                network.activities[headway_id("h", va.id, vb.id)] = Activity(
                    id=headway_id("h", va.id, vb.id),
                    kind=STATION_HEADWAY,
                    tail=va.id,
                    head=vb.id,
                    margin=S,
                )
                network.activities[headway_id("h", vb.id, va.id)] = Activity(
                    id=headway_id("h", vb.id, va.id),
                    kind=STATION_HEADWAY,
                    tail=vb.id,
                    head=va.id,
                    margin=S,
                )
    return conflicts


def _transmission_pairs(
    network: Network, va: Event, vb: Event
) -> list[tuple[str, str]]:
    """Track headway pairs that must mirror this platform's priority."""

    pairs = []
    for first, second in ((va, vb), (vb, va)):
        pred = dep_id(first.trip)
        for succ in _successors(network, second.id):
            gid = headway_id("g", pred, succ.head)
            if gid in network.activities:
                pairs.append(tuple(sorted((gid, headway_id("g", succ.head, pred)))))
    return sorted(set(pairs))


@dataclass
class MarginViolation:
    conflict: StationConflict
    margin: int
    required_above: float
    drives: list[str]


def validate_safety_margins(network: Network) -> list[MarginViolation]:
    """Check every platform conflict against the strict margin lower bound.

    The margin must exceed half the largest drive-time slack adjoining the
    conflict; violations are reported, never rejected.
    """

    violations = []
    for c in network.conflicts:
        drives = []
        for arrival in (c.a, c.b):
            ev = network.events[arrival]
            drives.append(network.drive_of(ev.trip))
            for succ in _successors(network, arrival):
                head_ev = network.events[succ.head]
                if head_ev.trip is not None:
                    drives.append(network.drive_of(head_ev.trip))
        slack = max(d.l_max - d.l_min for d in drives)
        if c.margin * 2 <= slack:
            violations.append(
                MarginViolation(
                    conflict=c,
                    margin=c.margin,
                    required_above=slack / 2,
                    drives=sorted({d.id for d in drives}),
                )
            )
    return violations
