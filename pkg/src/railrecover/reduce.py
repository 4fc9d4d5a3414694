"""Network reduction: precedence fixing and drive/wait chain contraction.

Fixing pins headway orientations that are forced by the timetable order;
contraction merges corridor runs with no cross-constraints into single
drive activities.  Solutions of the reduced network expand back to the
original with equal objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import model as m
from .verify import Solution

logger = logging.getLogger(__name__)

SAME_DIRECTION = "same-direction order"
DISJOINT = "disjoint windows"


@dataclass
class FixedVars:
    """Forced headway orientations, keyed by directed activity id."""

    values: dict[str, int] = field(default_factory=dict)
    reasons: dict[str, str] = field(default_factory=dict)

    def fix_pair(self, keep: str, drop: str, reason: str) -> None:
        if self.values.get(keep) == 0 or self.values.get(drop) == 1:
            raise m.ModelError(f"contradictory fixing for pair {keep}/{drop}")
        self.values[keep] = 1
        self.values[drop] = 0
        self.reasons[keep] = reason
        self.reasons[drop] = reason

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class ChainStep:
    tail: str
    head: str
    l_min: int
    l_max_eff: int
    sched: int


@dataclass
class ChainInfo:
    events: list[str]
    steps: list[ChainStep]
    merged_activities: list[str]


@dataclass
class ContractionMap:
    chains: dict[str, ChainInfo] = field(default_factory=dict)


def _natural_order(network: m.Network, fwd: str, rev: str) -> tuple[str, str]:
    """Timetable order of a pair: (earlier-first arc, reverse arc)."""

    a = network.activities[fwd]
    tail_t = network.events[a.tail].time
    head_t = network.events[a.head].time
    if (tail_t, a.tail) <= (head_t, a.head):
        return fwd, rev
    return rev, fwd


def fix_natural_precedences(network: m.Network) -> FixedVars:
    """Fix orientations forced by direction or by disjoint delay windows.

    Same-direction trains on one track cannot pass each other; with the
    delay cap at most one cycle, reversing them is delay-infeasible
    whenever both trips run, so the timetable order is kept.  Pairs whose
    reverse order cannot fit in the delay windows are fixed the same way.
    """

    fixed = FixedVars()
    for fwd, rev in network.track_pairs():
        natural, reverse = _natural_order(network, fwd, rev)
        nat = network.activities[natural]
        recv = network.activities[reverse]
        tail_dir = network.events[nat.tail].direction
        head_dir = network.events[nat.head].direction
        if tail_dir == head_dir:
            fixed.fix_pair(natural, reverse, SAME_DIRECTION)
            continue
        # reverse order needs pi*(nat.tail) >= pi*(nat.head) + L
        tail_ev = network.events[nat.tail]
        head_ev = network.events[nat.head]
        cap = network.delay_cap(nat.tail)
        if tail_ev.time + cap < head_ev.time + recv.headway:
            fixed.fix_pair(natural, reverse, DISJOINT)

    acts = network.activities
    for c in network.conflicts:
        fids = (m.headway_id("h", c.a, c.b), m.headway_id("h", c.b, c.a))
        natural, reverse = _natural_order(network, *fids)
        first = acts[natural].tail
        second = acts[natural].head

        def orient_possible(first_arr: str, second_arr: str) -> bool:
            # some coupled row must be satisfiable for the orientation
            cap2 = network.delay_cap(second_arr)
            t2 = network.events[second_arr].time
            for sa, sb in c.couples:
                succ = sa if acts[sa].tail == first_arr else sb
                dep_t = network.events[acts[succ].head].time
                if dep_t + c.margin <= t2 + cap2:
                    return True
            return False

        if not orient_possible(second, first):
            # the reverse orientation can never be satisfied while both
            # trips run; keep the timetable order
            fixed.fix_pair(natural, reverse, DISJOINT)
    return fixed


def _special_events(network: m.Network) -> set[str]:
    """Events that may not sit in a chain interior."""

    special: set[str] = set()
    acts = network.activities
    for a in acts.values():
        if a.kind in (m.TURN, m.RETURN, m.REINSERT, m.TRACK_HEADWAY, m.STATION_HEADWAY):
            special.add(a.tail)
            special.add(a.head)
        elif a.forced_zero:
            special.add(a.tail)
            special.add(a.head)
    for aid in network.windows:
        special.add(acts[aid].tail)
        special.add(acts[aid].head)
    for c in network.conflicts:
        special.add(c.a)
        special.add(c.b)
        for sa, sb in c.couples:
            for sid in (sa, sb):
                special.add(acts[sid].tail)
                special.add(acts[sid].head)
    special |= network.head_events
    special |= network.tail_events
    return special


def contract_chains(
    network: m.Network, fixed: FixedVars
) -> tuple[m.Network, ContractionMap]:
    """Merge maximal drive/wait chains into single drive activities.

    A chain interior event must carry exactly one incoming and one outgoing
    train activity and no turn/return/headway/window incidence, and share
    the endpoints' recovery-pin status.  Safety margins and headways attach
    to the surviving endpoint events unchanged.
    """

    special = _special_events(network)
    acts = network.activities
    merged_into: dict[str, str] = {}
    cmap = ContractionMap()

    def sole_flow(adj: list[str]) -> str | None:
        flows = [a for a in adj if acts[a].kind in m.TRAIN_KINDS]
        alles = [a for a in adj if acts[a].kind in m.FLOW_KINDS]
        if len(flows) == 1 and len(alles) == 1:
            return flows[0]
        return None

    def interior_ok(eid: str, pinned: bool) -> bool:
        return (
            eid not in special
            and network.pinned(eid) == pinned
            and sole_flow(network.in_flow[eid]) is not None
            and sole_flow(network.out_flow[eid]) is not None
        )

    new_acts: dict[str, m.Activity] = {}
    dropped_events: set[str] = set()
    consumed_acts: set[str] = set()
    drive_by_trip = dict(network.drive_by_trip)

    # chains are time-monotone, so visiting drives chronologically always
    # reaches a chain's first drive before its continuations
    drives = sorted(
        (a.id for a in acts.values() if a.kind == m.DRIVE),
        key=lambda aid: (network.events[acts[aid].tail].time, aid),
    )
    for aid in drives:
        act = acts[aid]
        if aid in consumed_acts or act.forced_zero or aid in network.windows:
            continue
        pinned = network.pinned(act.tail)
        if network.pinned(act.head) != pinned:
            continue

        seq_events = [act.tail, act.head]
        seq_acts = [aid]
        cur = act
        while True:
            nxt_wait = sole_flow(network.out_flow[cur.head])
            if nxt_wait is None or acts[nxt_wait].kind != m.WAIT:
                break
            wait = acts[nxt_wait]
            if not interior_ok(cur.head, pinned) or not interior_ok(wait.head, pinned):
                break
            nxt_drive = sole_flow(network.out_flow[wait.head])
            if nxt_drive is None or acts[nxt_drive].kind != m.DRIVE:
                break
            drive = acts[nxt_drive]
            if (
                drive.forced_zero
                or nxt_drive in network.windows
                or nxt_drive in consumed_acts
                or network.pinned(drive.head) != pinned
            ):
                break
            if drive.head in seq_events:
                break
            seq_events.append(wait.head)
            seq_events.append(drive.head)
            seq_acts.extend([nxt_wait, nxt_drive])
            cur = drive

        if len(seq_acts) <= 1:
            continue

        chain_id = f"chain:{seq_events[0]}>{seq_events[-1]}"
        steps: list[ChainStep] = []
        l_min_sum = 0
        l_max_sum = 0
        cost = 0.0
        trips: list[str] = []
        Y = network.max_delay
        for sid in seq_acts:
            sact = acts[sid]
            sched = network.events[sact.head].time - network.events[sact.tail].time
            if sact.kind == m.DRIVE:
                l_max_eff = sact.l_max
                cost += sact.cost
                trips.extend(sact.trips)
            else:
                l_max_eff = sched + Y
            steps.append(
                ChainStep(
                    tail=sact.tail,
                    head=sact.head,
                    l_min=sact.l_min,
                    l_max_eff=l_max_eff,
                    sched=sched,
                )
            )
            l_min_sum += sact.l_min
            l_max_sum += l_max_eff
        sched_total = sum(s.sched for s in steps)
        l_max_chain = max(sched_total, min(l_max_sum, l_min_sum + Y))
        new_acts[chain_id] = m.Activity(
            id=chain_id,
            kind=m.DRIVE,
            tail=seq_events[0],
            head=seq_events[-1],
            l_min=l_min_sum,
            l_max=l_max_chain,
            cost=cost,
            trips=tuple(trips),
        )
        cmap.chains[chain_id] = ChainInfo(
            events=seq_events, steps=steps, merged_activities=seq_acts
        )
        consumed_acts.update(seq_acts)
        dropped_events.update(seq_events[1:-1])
        for trip in trips:
            drive_by_trip[trip] = chain_id
        for eid in seq_events[1:-1]:
            merged_into[eid] = chain_id

    if not cmap.chains:
        return network, cmap

    events = {
        eid: ev for eid, ev in network.events.items() if eid not in dropped_events
    }
    activities = {
        aid: a for aid, a in acts.items() if aid not in consumed_acts
    }
    activities.update(new_acts)
    reduced = m.Network(
        events=events,
        activities=activities,
        conflicts=list(network.conflicts),
        depots=dict(network.depots),
        used_track=dict(network.used_track),
        rerouted=set(network.rerouted),
        max_delay=network.max_delay,
        recovery_end=network.recovery_end,
        windows=dict(network.windows),
        head_events=set(network.head_events),
        tail_events=set(network.tail_events),
        provenance={
            eid: t for eid, t in network.provenance.items() if eid in events
        },
        trip_train=dict(network.trip_train),
        drive_by_trip=drive_by_trip,
    )
    logger.debug(
        "contracted %d chains, %d events and %d activities removed",
        len(cmap.chains),
        len(dropped_events),
        len(consumed_acts) - len(new_acts),
    )
    return reduced, cmap


def _interior_delays(steps: list[ChainStep], x_start: int, x_end: int) -> list[int]:
    """Delays for the chain's interior events by the monotone rule.

    Rising delays are placed as soon as possible, falling delays as late as
    possible, exactly the expansion strategy that keeps every intermediate
    event inside its own window.
    """

    n = len(steps)
    xs = [0] * (n + 1)
    xs[0] = x_start
    xs[n] = x_end
    if x_start <= x_end:
        cur = x_start
        for i in range(1, n):
            cur = min(x_end, cur + (steps[i - 1].l_max_eff - steps[i - 1].sched))
            xs[i] = cur
    else:
        cur = x_end
        for i in range(n - 1, 0, -1):
            cur = min(x_start, cur + (steps[i].sched - steps[i].l_min))
            xs[i] = cur
    return xs


def expand_solution(
    reduced_solution: Solution,
    cmap: ContractionMap,
    network: m.Network,
) -> Solution:
    """Lift a reduced-network solution back to the original network."""

    selected = set(reduced_solution.selected)
    delays = dict(reduced_solution.delays)
    for chain_id, info in cmap.chains.items():
        if chain_id in selected:
            selected.discard(chain_id)
            selected.update(info.merged_activities)
            x_start = delays.get(info.events[0], 0)
            x_end = delays.get(info.events[-1], 0)
            duration = sum(s.sched for s in info.steps) + x_end - x_start
            if not (
                sum(s.l_min for s in info.steps)
                <= duration
                <= sum(s.l_max_eff for s in info.steps)
            ):
                raise m.ModelError(
                    f"reduced solution infeasible: chain {chain_id} duration "
                    f"{duration} outside its step bounds"
                )
            xs = _interior_delays(info.steps, x_start, x_end)
            for eid, x in zip(info.events, xs):
                if x < 0 or x > network.delay_cap(eid):
                    raise m.ModelError(
                        f"chain {chain_id}: interior delay {x} outside window at {eid}"
                    )
                delays[eid] = x
        else:
            for eid in info.events[1:-1]:
                delays.setdefault(eid, 0)

    from . import verify as _verify

    return _verify.assemble_solution(
        network,
        frozenset(selected),
        delays,
        reduced_solution.g,
        reduced_solution.h,
    )
