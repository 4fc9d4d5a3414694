"""Independent feasibility checking and the exhaustive test oracle.

Everything here evaluates indicator conditions logically on the network —
no big-M arithmetic — so it stays independent of the IP encoder.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import model as m
from .dcs import solve_difference_system


class OracleCapExceeded(RuntimeError):
    pass


@dataclass
class Solution:
    """A dispatching decision: selected arcs, delays and precedences."""

    selected: frozenset[str]
    delays: dict[str, int]
    g: dict[str, int]
    h: dict[str, int]
    circulations: dict[str, list[str]] = field(default_factory=dict)
    replacements_used: dict[str, int] = field(default_factory=dict)
    cancelled: list[str] = field(default_factory=list)
    early_turns: list[str] = field(default_factory=list)
    early_returns: list[str] = field(default_factory=list)

    def served_trips(self, network: m.Network) -> list[str]:
        out = []
        for aid in self.selected:
            act = network.activities[aid]
            if act.kind == m.DRIVE:
                out.extend(act.trips)
        return sorted(out)


@dataclass
class Violation:
    tag: str
    entities: tuple[str, ...]
    slack: float
    message: str


@dataclass
class ValidationReport:
    ok: bool
    violations: list[Violation]
    objective: float
    counts: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "objective": self.objective,
            "counts": self.counts,
            "violations": [
                {
                    "tag": v.tag,
                    "entities": list(v.entities),
                    "slack": v.slack,
                    "message": v.message,
                }
                for v in self.violations
            ],
        }

    @staticmethod
    def from_dict(doc: dict) -> "ValidationReport":
        return ValidationReport(
            ok=doc["ok"],
            violations=[
                Violation(v["tag"], tuple(v["entities"]), v["slack"], v["message"])
                for v in doc["violations"]
            ],
            objective=doc["objective"],
            counts=doc["counts"],
        )


def assemble_solution(
    network: m.Network,
    selected: frozenset[str],
    delays: dict[str, int],
    g: dict[str, int],
    h: dict[str, int],
) -> Solution:
    """Derive circulations, cancellations and turn/return counts."""

    sol = Solution(selected=selected, delays=dict(delays), g=dict(g), h=dict(h))
    served = set(sol.served_trips(network))
    all_trips = sorted(
        {t for a in network.activities.values() if a.kind == m.DRIVE for t in a.trips}
    )
    sol.cancelled = [t for t in all_trips if t not in served]

    for aid in sorted(selected):
        act = network.activities[aid]
        if act.kind == m.TURN and not act.planned:
            sol.early_turns.append(aid)
        elif act.kind == m.RETURN:
            sol.early_returns.append(aid)
        elif act.kind == m.REINSERT:
            tail = network.events[act.tail]
            if tail.kind == m.REPL:
                depot = tail.station
                sol.replacements_used[depot] = sol.replacements_used.get(depot, 0) + 1

    # walk selected flow arcs into vertex-disjoint paths
    succ: dict[str, str] = {}
    has_in: set[str] = set()
    for aid in sorted(selected):
        act = network.activities[aid]
        succ[act.tail] = aid
        has_in.add(act.head)
    n_repl = 0
    for start in sorted(succ):
        if start in has_in:
            continue
        ev = network.events[start]
        if ev.kind == m.REPL:
            n_repl += 1
            name = f"repl{n_repl:02d}@{ev.station}"
        elif ev.trip is not None:
            # a path can only start at a circulation head, so the first
            # trip's scheduled owner names the vehicle
            name = network.trip_train.get(ev.trip, ev.trip)
        else:
            name = start
        path = []
        cur = start
        while cur in succ:
            act = network.activities[succ[cur]]
            if act.kind == m.DRIVE:
                path.extend(act.trips)
            cur = act.head
        if path:
            sol.circulations[name] = path
    return sol


def objective_value(
    network: m.Network, solution: Solution, extended: bool = False
) -> float:
    total = 0.0
    for aid in solution.selected:
        act = network.activities[aid]
        if act.kind == m.DRIVE:
            total += act.cost
        elif extended and act.kind in (m.TURN, m.RETURN):
            total -= act.penalty
    return total


def validate_solution(
    network: m.Network,
    scenario: m.Scenario,
    solution: Solution,
    extended: bool = False,
) -> ValidationReport:
    """Check constraints (2)-(10), domains, blockage windows and recovery."""

    viol: list[Violation] = []
    acts = network.activities
    events = network.events

    for aid in solution.selected:
        if aid not in acts:
            raise m.ModelError(f"solution references unknown activity {aid}")
    for eid in solution.delays:
        if eid not in events:
            raise m.ModelError(f"solution references unknown event {eid}")

    def time_of(eid: str) -> Optional[int]:
        ev = events[eid]
        if ev.time is None:
            return None
        return ev.time + solution.delays.get(eid, 0)

    def selected(aid: str) -> bool:
        return aid in solution.selected

    # domains (11)-(15) plus recovery pins
    for eid in network.timed_events():
        x = solution.delays.get(eid, 0)
        if not isinstance(x, int):
            viol.append(Violation("dom", (eid,), 0, f"delay of {eid} not integer"))
            continue
        cap = network.delay_cap(eid)
        if x < 0 or x > cap:
            tag = "recovery" if network.pinned(eid) and x != 0 else "dom"
            viol.append(
                Violation(tag, (eid,), x - cap, f"delay {x} outside [0, {cap}] at {eid}")
            )

    for aid in sorted(solution.selected):
        act = acts[aid]
        if act.forced_zero:
            viol.append(Violation("forced", (aid,), 1, f"{aid} is not selectable"))

    # (2): minimum separations on selected flow arcs with timed tails
    for act in acts.values():
        if act.kind not in m.FLOW_KINDS or not selected(act.id):
            continue
        tt, th = time_of(act.tail), time_of(act.head)
        if tt is None:
            continue
        if th - tt < act.l_min:
            viol.append(
                Violation(
                    "eq2",
                    (act.id,),
                    act.l_min - (th - tt),
                    f"{act.id}: {th} - {tt} < {act.l_min}",
                )
            )
        # (3): drives bounded above
        if act.kind == m.DRIVE and th - tt > act.l_max:
            viol.append(
                Violation(
                    "eq3",
                    (act.id,),
                    (th - tt) - act.l_max,
                    f"{act.id}: duration {th - tt} > {act.l_max}",
                )
            )

    def trip_served(eid: str) -> bool:
        trip = events[eid].trip
        return trip is not None and selected(network.drive_of(trip).id)

    # (4)/(5): track headway disjunctions
    for fwd_id, rev_id in network.track_pairs():
        gf = solution.g.get(fwd_id, 0)
        gr = solution.g.get(rev_id, 0)
        if gf + gr != 1:
            viol.append(
                Violation("eq5", (fwd_id, rev_id), abs(1 - gf - gr), "g pair not complementary")
            )
        for hid, val in ((fwd_id, gf), (rev_id, gr)):
            act = acts[hid]
            if val == 1 and trip_served(act.tail) and trip_served(act.head):
                tt, th = time_of(act.tail), time_of(act.head)
                if th - tt < act.headway:
                    viol.append(
                        Violation(
                            "eq4",
                            (hid,),
                            act.headway - (th - tt),
                            f"{hid}: separation {th - tt} < {act.headway}",
                        )
                    )

    # (6)/(7): platform conflicts
    for c in network.conflicts:
        hf = m.headway_id("h", c.a, c.b)
        hr = m.headway_id("h", c.b, c.a)
        vf = solution.h.get(hf, 0)
        vr = solution.h.get(hr, 0)
        if vf + vr != 1:
            viol.append(Violation("eq7", (hf, hr), abs(1 - vf - vr), "h pair not complementary"))
        for first, second, val in ((c.a, c.b, vf), (c.b, c.a, vr)):
            if val != 1:
                continue
            for sa, sb in c.couples:
                succ_first = sa if acts[sa].tail == first else sb
                succ_second = sb if succ_first == sa else sa
                if selected(succ_first) and selected(succ_second):
                    dep_t = time_of(acts[succ_first].head)
                    arr_t = time_of(second)
                    if dep_t + c.margin > arr_t:
                        viol.append(
                            Violation(
                                "eq6",
                                (first, second, succ_first),
                                dep_t + c.margin - arr_t,
                                f"platform not cleared: {dep_t}+{c.margin} > {arr_t}",
                            )
                        )

    # (8) flow conservation with window boundaries
    for eid in sorted(events):
        ev = events[eid]
        if ev.kind not in (m.DEP, m.ARR):
            continue
        inflow = sum(1 for a in network.in_flow[eid] if selected(a))
        outflow = sum(1 for a in network.out_flow[eid] if selected(a))
        if eid in network.head_events:
            ok = 0 <= outflow - inflow <= 1
        elif eid in network.tail_events:
            ok = 0 <= inflow - outflow <= 1
        else:
            ok = inflow == outflow
        if not ok:
            viol.append(
                Violation(
                    "eq8",
                    (eid,),
                    abs(inflow - outflow),
                    f"flow at {eid}: in {inflow}, out {outflow}",
                )
            )

    # (9): depots absorb at most one train per arrival event, never emit
    for eid in sorted(events):
        ev = events[eid]
        if ev.kind != m.DEPOT_ARR:
            continue
        inflow = sum(1 for a in network.in_flow[eid] if selected(a))
        outflow = sum(1 for a in network.out_flow[eid] if selected(a))
        if inflow - outflow > 1:
            viol.append(Violation("eq9", (eid,), inflow - outflow - 1, "depot overabsorbs"))
        if outflow > inflow:
            viol.append(
                Violation("eq9b", (eid,), outflow - inflow, "reinsertion without return")
            )

    # (10): replacement capacity
    for eid in sorted(events):
        ev = events[eid]
        if ev.kind != m.REPL:
            continue
        outflow = sum(1 for a in network.out_flow[eid] if selected(a))
        cap = network.depots[ev.station].replacement_capacity
        if outflow > cap:
            viol.append(Violation("eq10", (eid,), outflow - cap, "replacement capacity"))

    # blockage windows on served drives
    for aid, (dep_lo, arr_hi) in sorted(network.windows.items()):
        if not selected(aid):
            continue
        act = acts[aid]
        if dep_lo is not None:
            t = time_of(act.tail)
            if t < dep_lo:
                viol.append(
                    Violation("blk", (aid,), dep_lo - t, f"{aid} enters blocked section at {t}")
                )
        if arr_hi is not None:
            t = time_of(act.head)
            if t > arr_hi:
                viol.append(
                    Violation("blk", (aid,), t - arr_hi, f"{aid} clears blocked section at {t}")
                )

    sol_full = solution if solution.circulations else assemble_solution(
        network, solution.selected, solution.delays, solution.g, solution.h
    )
    obj = objective_value(network, solution, extended)
    counts = {
        "served": len(sol_full.served_trips(network)),
        "cancelled": len(sol_full.cancelled),
        "turns": len(sol_full.early_turns),
        "returns": len(sol_full.early_returns),
        "replacements": sum(sol_full.replacements_used.values()),
    }
    return ValidationReport(ok=not viol, violations=viol, objective=obj, counts=counts)


# ---------------------------------------------------------------------------
# exhaustive oracle


def _delay_edges(
    network: m.Network,
    selected: set[str],
    g: dict[str, int],
    h: dict[str, int],
) -> tuple[dict[str, tuple[int, int]], list[tuple[str, str, int]]]:
    """Active difference constraints for a full binary assignment."""

    bounds = {}
    for eid in network.timed_events():
        ev = network.events[eid]
        bounds[eid] = (ev.time, ev.time + network.delay_cap(eid))
    edges = []
    acts = network.activities

    def served(eid: str) -> bool:
        trip = network.events[eid].trip
        return trip is not None and network.drive_of(trip).id in selected

    for aid in selected:
        act = acts[aid]
        if act.kind not in m.FLOW_KINDS:
            continue
        if network.events[act.tail].time is None:
            continue
        edges.append((act.tail, act.head, act.l_min))
        if act.kind == m.DRIVE:
            edges.append((act.head, act.tail, -act.l_max))
            win = network.windows.get(aid)
            if win:
                dep_lo, arr_hi = win
                if dep_lo is not None:
                    lo, hi = bounds[act.tail]
                    bounds[act.tail] = (max(lo, dep_lo), hi)
                if arr_hi is not None:
                    lo, hi = bounds[act.head]
                    bounds[act.head] = (lo, min(hi, arr_hi))

    for fwd_id, rev_id in network.track_pairs():
        for hid in (fwd_id, rev_id):
            act = acts[hid]
            if g.get(hid, 0) == 1 and served(act.tail) and served(act.head):
                edges.append((act.tail, act.head, act.headway))

    for c in network.conflicts:
        for first, second in ((c.a, c.b), (c.b, c.a)):
            hid = m.headway_id("h", first, second)
            if h.get(hid, 0) != 1:
                continue
            for sa, sb in c.couples:
                succ_first = sa if acts[sa].tail == first else sb
                succ_second = sb if succ_first == sa else sa
                if succ_first in selected and succ_second in selected:
                    edges.append((acts[succ_first].head, second, c.margin))
    return bounds, edges


def feasible_delays(
    network: m.Network,
    selected: set[str],
    g: dict[str, int],
    h: dict[str, int],
) -> Optional[dict[str, int]]:
    """Earliest feasible delays for a binary assignment, or None."""

    bounds, edges = _delay_edges(network, selected, g, h)
    times, _ = solve_difference_system(bounds, edges)
    if times is None:
        return None
    return {
        eid: times[eid] - network.events[eid].time for eid in times
    }


def enumerate_feasible(
    network: m.Network,
    extended: bool = False,
    cap: int = 20,
):
    """Yield every feasible (selected, g, h, delays, objective) assignment.

    Flow arcs are enumerated with early conservation pruning; for each flow
    the orientations of all headway pairs whose constraints can bind are
    enumerated, inert pairs take the canonical orientation.  Delays come
    from the difference system, so each yielded assignment is feasible.
    """

    flow_vars = sorted(a.id for a in network.selectable() if not a.forced_zero)
    track_pairs = network.track_pairs()
    station_pairs = network.station_pairs()
    n_bin = len(flow_vars) + len(track_pairs) + len(station_pairs)
    if n_bin > cap:
        raise OracleCapExceeded(f"{n_bin} free binaries exceed the cap of {cap}")

    # assign arcs grouped by event time so conservation prunes early
    order: list[str] = []
    seen: set[str] = set()
    free = set(flow_vars)
    for eid in sorted(
        network.events, key=lambda e: (network.events[e].time or 0, e)
    ):
        for aid in network.in_flow[eid] + network.out_flow[eid]:
            if aid in free and aid not in seen:
                seen.add(aid)
                order.append(aid)
    position = {aid: i for i, aid in enumerate(order)}
    events_by_last: dict[int, list[str]] = {}
    for eid in network.events:
        incident = [
            a for a in network.in_flow[eid] + network.out_flow[eid] if a in free
        ]
        if incident:
            idx = max(position[a] for a in incident)
            events_by_last.setdefault(idx, []).append(eid)

    selected: set[str] = set()

    def leaves():
        obj = 0.0
        for aid in selected:
            act = network.activities[aid]
            if act.kind == m.DRIVE:
                obj += act.cost
            elif extended and act.kind in (m.TURN, m.RETURN):
                obj -= act.penalty

        def served(trip):
            return network.drive_by_trip[trip] in selected

        active_g = [
            (fwd, rev)
            for fwd, rev in track_pairs
            if served(network.events[network.activities[fwd].tail].trip)
            and served(network.events[network.activities[fwd].head].trip)
        ]
        active_h = []
        for c in network.conflicts:
            relevant = any(
                sa in selected and sb in selected for sa, sb in c.couples
            )
            if relevant and served(network.events[c.a].trip) and served(
                network.events[c.b].trip
            ):
                active_h.append(c)
        inactive_g = [p for p in track_pairs if p not in active_g]
        inactive_h = [
            (m.headway_id("h", c.a, c.b), m.headway_id("h", c.b, c.a))
            for c in network.conflicts
            if c not in active_h
        ]

        for bits_g in itertools.product([0, 1], repeat=len(active_g)):
            g = {}
            for (fwd, rev), bit in zip(active_g, bits_g):
                first, second = sorted((fwd, rev))
                g[first] = bit
                g[second] = 1 - bit
            for fwd, rev in inactive_g:
                first, second = sorted((fwd, rev))
                g[first] = 0
                g[second] = 1
            for bits_h in itertools.product([0, 1], repeat=len(active_h)):
                h = {}
                for c, bit in zip(active_h, bits_h):
                    first, second = sorted(
                        (m.headway_id("h", c.a, c.b), m.headway_id("h", c.b, c.a))
                    )
                    h[first] = bit
                    h[second] = 1 - bit
                for f_id, r_id in inactive_h:
                    first, second = sorted((f_id, r_id))
                    h[first] = 0
                    h[second] = 1
                delays = feasible_delays(network, selected, g, h)
                if delays is not None:
                    yield frozenset(selected), g, h, delays, obj

    def recurse(i: int):
        if i == len(order):
            yield from leaves()
            return
        aid = order[i]
        for take in (0, 1):
            if take:
                selected.add(aid)
            ok = True
            for eid in events_by_last.get(i, []):
                if not _flow_ok_single(network, eid, selected):
                    ok = False
                    break
            if ok:
                yield from recurse(i + 1)
            if take:
                selected.discard(aid)

    yield from recurse(0)


def canonical_order(network: m.Network) -> list[str]:
    """The canonical binary variable order used for tie-breaking."""

    flow_vars = sorted(a.id for a in network.selectable() if not a.forced_zero)
    names = [f"y({a})" for a in flow_vars]
    for fwd, rev in network.track_pairs():
        names.append(f"g({fwd})")
        names.append(f"g({rev})")
    for fwd, rev in network.station_pairs():
        names.append(f"h({fwd})")
        names.append(f"h({rev})")
    return sorted(names)


def assignment_vector(
    network: m.Network,
    canonical: list[str],
    selected: frozenset[str],
    g: dict[str, int],
    h: dict[str, int],
) -> tuple:
    vals: dict[str, int] = {}
    for name in canonical:
        inner = name[2:-1]
        if name.startswith("y("):
            vals[name] = 1 if inner in selected else 0
        elif name.startswith("g("):
            vals[name] = g.get(inner, 0)
        else:
            vals[name] = h.get(inner, 0)
    return tuple(vals[n] for n in canonical)


def brute_force_optimum(
    network: m.Network,
    scenario: m.Scenario,
    extended: bool = False,
    cap: int = 20,
) -> Solution:
    """Exact maximum-objective solution by exhaustive enumeration.

    Ties break to the lexicographically smallest assignment over the
    canonical variable order, so the result is deterministic.
    """

    canonical = canonical_order(network)
    best = None
    for selected, g, h, delays, obj in enumerate_feasible(network, extended, cap):
        vec = assignment_vector(network, canonical, selected, g, h)
        key = (obj, tuple(-b for b in vec))
        if best is None or key > best[0]:
            best = (key, (selected, g, h, delays))
    if best is None:
        return assemble_solution(network, frozenset(), {}, {}, {})
    selected, g, h, delays = best[1]
    return assemble_solution(network, selected, delays, g, h)


def _flow_ok_single(network: m.Network, eid: str, selected: set[str]) -> bool:
    ev = network.events[eid]
    inflow = sum(1 for a in network.in_flow[eid] if a in selected)
    outflow = sum(1 for a in network.out_flow[eid] if a in selected)
    if ev.kind in (m.DEP, m.ARR):
        if eid in network.head_events:
            return 0 <= outflow - inflow <= 1
        if eid in network.tail_events:
            return 0 <= inflow - outflow <= 1
        return inflow == outflow
    if ev.kind == m.DEPOT_ARR:
        return inflow - outflow <= 1 and outflow <= inflow
    if ev.kind == m.REPL:
        return outflow <= network.depots[ev.station].replacement_capacity
    return True
