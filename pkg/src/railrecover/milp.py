"""Big-M integer program for the event-activity network.

Variables: y per selectable activity (circulation flow), g per track
headway arc, h per station headway arc, x per timed event (delay).  Rows
are tagged with the constraint family they instantiate, and carry the
logical indicator structure so the delay system can activate them without
big-M arithmetic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import model as m


class FormulationError(ValueError):
    pass


@dataclass
class Var:
    name: str
    kind: str  # y | g | h | x
    lb: float
    ub: float
    integer: bool
    entity: str


@dataclass
class Row:
    name: str
    tag: str
    coeffs: dict[str, float]
    sense: str  # "<=", ">=", "=="
    rhs: float
    # logical reading: with all indicator binaries at 1,
    #   t[head] - t[tail] >= const   (or <=; tail None means a plain bound)
    indicators: tuple[str, ...] = ()
    diff: Optional[tuple[str, Optional[str], int, str]] = None


@dataclass
class MilpModel:
    variables: dict[str, Var]
    rows: list[Row]
    objective: dict[str, float]
    big_m: int
    g_pairs: list[tuple[str, str]]
    h_pairs: list[tuple[str, str]]
    extended: bool = False
    name: str = "model"
    meta: dict = field(default_factory=dict)

    def binaries(self) -> list[str]:
        return [v.name for v in self.variables.values() if v.integer and v.ub <= 1]

    def free_binaries(self) -> list[str]:
        return [
            v.name
            for v in self.variables.values()
            if v.integer and v.ub <= 1 and v.lb != v.ub
        ]

    def integer_vars(self) -> list[str]:
        return [
            v.name for v in self.variables.values() if v.integer and v.ub > 1
        ]

    def y_name(self, activity_id: str) -> str:
        return f"y({activity_id})"

    def x_name(self, event_id: str) -> str:
        return f"x({event_id})"


def compute_big_m(network: m.Network, max_delay: int) -> int:
    """The paper's global constant: Y plus the largest arc slack term.

    Arc terms are (pi_head - pi_tail) + L + S with L and S taken as zero
    where undefined; arcs missing a scheduled endpoint contribute L + S
    only.
    """

    best = 0
    for a in network.activities.values():
        t_tail = network.events[a.tail].time
        t_head = network.events[a.head].time
        d = 0
        if t_tail is not None and t_head is not None:
            d = t_head - t_tail
        term = d + (a.headway or 0) + (a.margin or 0)
        best = max(best, term)
    return max_delay + best


def formulate(
    network: m.Network,
    weights: Optional[dict[str, float]] = None,
    extended: bool = False,
    fixed: Optional[dict[str, int]] = None,
    per_row_m: bool = False,
) -> MilpModel:
    """Encode constraints (2)-(10) with domains and the (1)/(16) objective.

    ``weights`` overrides per-trip drive costs; ``fixed`` pins headway
    orientations as variable bounds.  The global M is the paper's formula,
    raised if needed so no deactivated row can cut a feasible point;
    ``per_row_m`` switches to the tightest M per row instead.
    """

    if weights is not None and any(w < 0 for w in weights.values()):
        raise FormulationError("trip weights must be nonnegative")
    fixed = fixed or {}
    acts = network.activities
    events = network.events
    Y = network.max_delay

    variables: dict[str, Var] = {}
    objective: dict[str, float] = {}

    def add_var(name, kind, lb, ub, integer, entity):
        variables[name] = Var(name, kind, lb, ub, integer, entity)

    for a in sorted(network.selectable(), key=lambda a: a.id):
        ub = 0 if a.forced_zero else 1
        add_var(f"y({a.id})", "y", 0, ub, True, a.id)
        if a.kind == m.DRIVE:
            cost = a.cost
            if weights is not None and a.trips:
                cost = sum(weights[t] for t in a.trips if t in weights)
                cost += sum(
                    a.cost / len(a.trips) for t in a.trips if t not in weights
                )
            if cost < 0:
                raise FormulationError(f"negative weight on {a.id}")
            objective[f"y({a.id})"] = cost
        elif extended and a.kind in (m.TURN, m.RETURN) and a.penalty:
            objective[f"y({a.id})"] = -a.penalty

    g_pairs = network.track_pairs()
    h_pairs = network.station_pairs()
    for fwd, rev in g_pairs + h_pairs:
        if rev not in acts:
            raise FormulationError(f"missing reverse headway partner for {fwd}")
        kind = "g" if acts[fwd].kind == m.TRACK_HEADWAY else "h"
        for hid in (fwd, rev):
            if hid in fixed:
                add_var(f"{kind}({hid})", kind, fixed[hid], fixed[hid], True, hid)
            else:
                add_var(f"{kind}({hid})", kind, 0, 1, True, hid)
    for fwd, rev in g_pairs + h_pairs:
        partner = {fwd: rev, rev: fwd}
        for hid in (fwd, rev):
            if hid in fixed and partner[hid] in fixed:
                if fixed[hid] + fixed[partner[hid]] != 1:
                    raise FormulationError(f"fixing breaks complementarity at {hid}")

    for eid in network.timed_events():
        add_var(f"x({eid})", "x", 0, network.delay_cap(eid), True, eid)

    rows: list[Row] = []
    m_need = 0  # largest slack any deactivated row must absorb

    def x(eid):
        return f"x({eid})"

    def y(aid):
        return f"y({aid})"

    def cap(eid):
        return network.delay_cap(eid)

    def add_m_row(name, tag, base_coeffs, sense, base_rhs, indicators, diff, need):
        # need = worst violation when deactivated; one missing indicator
        # contributes one M of slack
        nonlocal m_need
        m_need = max(m_need, need)
        rows.append(
            Row(
                name=name,
                tag=tag,
                coeffs=base_coeffs,
                sense=sense,
                rhs=base_rhs,
                indicators=tuple(indicators),
                diff=diff,
            )
        )

    # (2) minimum durations on flow arcs with timed tails
    for a in sorted(network.selectable(), key=lambda a: a.id):
        tt = events[a.tail].time
        th = events[a.head].time
        if tt is None:
            continue
        delta = th - tt
        need = a.l_min - delta + cap(a.tail)
        add_m_row(
            f"eq2[{a.id}]",
            "eq2",
            {x(a.head): 1, x(a.tail): -1},
            ">=",
            a.l_min - delta,
            (y(a.id),),
            (a.head, a.tail, a.l_min, ">="),
            need,
        )
        # (3) maximum durations on drives
        if a.kind == m.DRIVE:
            need3 = delta + cap(a.head) - a.l_max
            add_m_row(
                f"eq3[{a.id}]",
                "eq3",
                {x(a.head): 1, x(a.tail): -1},
                "<=",
                a.l_max - delta,
                (y(a.id),),
                (a.head, a.tail, a.l_max, "<="),
                need3,
            )

    # (4) track headway disjunctions
    for fwd, rev in g_pairs:
        for hid in (fwd, rev):
            a = acts[hid]
            tt = events[a.tail].time
            th = events[a.head].time
            delta = th - tt
            tail_trip = events[a.tail].trip
            head_trip = events[a.head].trip
            ind = (
                y(network.drive_by_trip[tail_trip]),
                y(network.drive_by_trip[head_trip]),
                f"g({hid})",
            )
            need = a.headway - delta + cap(a.tail)
            add_m_row(
                f"eq4[{hid}]",
                "eq4",
                {x(a.head): 1, x(a.tail): -1},
                ">=",
                a.headway - delta,
                ind,
                (a.head, a.tail, a.headway, ">="),
                need,
            )
        rows.append(
            Row(
                name=f"eq5[{fwd}]",
                tag="eq5",
                coeffs={f"g({fwd})": 1, f"g({rev})": 1},
                sense="==",
                rhs=1,
            )
        )

    # (6) platform conflicts, one row per orientation and coupled pair
    for c in network.conflicts:
        for first, second in ((c.a, c.b), (c.b, c.a)):
            hid = m.headway_id("h", first, second)
            for sa, sb in c.couples:
                succ_first = sa if acts[sa].tail == first else sb
                succ_second = sb if succ_first == sa else sa
                dep_ev = acts[succ_first].head
                delta = events[second].time - events[dep_ev].time
                ind = (y(succ_first), y(succ_second), f"h({hid})")
                need = c.margin - delta + cap(dep_ev)
                add_m_row(
                    f"eq6[{hid}|{succ_first}]",
                    "eq6",
                    {x(second): 1, x(dep_ev): -1},
                    ">=",
                    c.margin - delta,
                    ind,
                    (second, dep_ev, c.margin, ">="),
                    need,
                )
        hf = m.headway_id("h", c.a, c.b)
        hr = m.headway_id("h", c.b, c.a)
        rows.append(
            Row(
                name=f"eq7[{hf}]",
                tag="eq7",
                coeffs={f"h({hf})": 1, f"h({hr})": 1},
                sense="==",
                rhs=1,
            )
        )

    # (8) flow conservation with window boundaries
    for eid in sorted(events):
        ev = events[eid]
        if ev.kind not in (m.DEP, m.ARR):
            continue
        coeffs: dict[str, float] = {}
        for aid in network.in_flow[eid]:
            coeffs[y(aid)] = coeffs.get(y(aid), 0) + 1
        for aid in network.out_flow[eid]:
            coeffs[y(aid)] = coeffs.get(y(aid), 0) - 1
        if not coeffs:
            continue
        if eid in network.head_events:
            rows.append(Row(f"eq8src[{eid}]", "eq8", dict(coeffs), ">=", -1))
            rows.append(Row(f"eq8src2[{eid}]", "eq8", dict(coeffs), "<=", 0))
        elif eid in network.tail_events:
            rows.append(Row(f"eq8snk[{eid}]", "eq8", dict(coeffs), "<=", 1))
            rows.append(Row(f"eq8snk2[{eid}]", "eq8", dict(coeffs), ">=", 0))
        else:
            rows.append(Row(f"eq8[{eid}]", "eq8", coeffs, "==", 0))

    # (9) depot absorption, (9b) no reinsertion without a return
    for eid in sorted(events):
        ev = events[eid]
        if ev.kind != m.DEPOT_ARR:
            continue
        coeffs = {}
        for aid in network.in_flow[eid]:
            coeffs[y(aid)] = coeffs.get(y(aid), 0) + 1
        for aid in network.out_flow[eid]:
            coeffs[y(aid)] = coeffs.get(y(aid), 0) - 1
        if coeffs:
            rows.append(Row(f"eq9[{eid}]", "eq9", dict(coeffs), "<=", 1))
            rows.append(Row(f"eq9b[{eid}]", "eq9b", dict(coeffs), ">=", 0))

    # (10) replacement capacity
    for eid in sorted(events):
        ev = events[eid]
        if ev.kind != m.REPL:
            continue
        coeffs = {y(aid): 1 for aid in network.out_flow[eid]}
        if coeffs:
            rows.append(
                Row(
                    f"eq10[{eid}]",
                    "eq10",
                    coeffs,
                    "<=",
                    network.depots[ev.station].replacement_capacity,
                )
            )

    # blockage windows on drives, conditional on selection
    for aid in sorted(network.windows):
        a = acts[aid]
        dep_lo, arr_hi = network.windows[aid]
        if dep_lo is not None:
            need = dep_lo - events[a.tail].time
            add_m_row(
                f"blk_lo[{aid}]",
                "blk",
                {x(a.tail): 1},
                ">=",
                dep_lo - events[a.tail].time,
                (y(aid),),
                (a.tail, None, dep_lo, ">="),
                need,
            )
        if arr_hi is not None:
            need = events[a.head].time + cap(a.head) - arr_hi
            add_m_row(
                f"blk_hi[{aid}]",
                "blk",
                {x(a.head): 1},
                "<=",
                arr_hi - events[a.head].time,
                (y(aid),),
                (a.head, None, arr_hi, "<="),
                need,
            )

    formula_m = compute_big_m(network, Y)
    big_m = max(formula_m, m_need)

    # expand indicator slack into the row coefficients:
    #   ">=": lhs - M*sum(ind) >= rhs - k*M   (active iff all indicators 1)
    #   "<=": lhs + M*sum(ind) <= rhs + k*M
    for row in rows:
        if not row.indicators:
            continue
        M = _row_m(row, network, Y) if per_row_m else big_m
        k = len(row.indicators)
        step = -M if row.sense == ">=" else M
        for ind in row.indicators:
            row.coeffs[ind] = row.coeffs.get(ind, 0) + step
        row.rhs += k * step

    model = MilpModel(
        variables=variables,
        rows=rows,
        objective=objective,
        big_m=big_m,
        g_pairs=g_pairs,
        h_pairs=h_pairs,
        extended=extended,
        meta={
            "formula_m": formula_m,
            "m_need": m_need,
            "event_times": {
                eid: events[eid].time for eid in network.timed_events()
            },
        },
    )
    return model


def _row_m(row: Row, network: m.Network, Y: int) -> int:
    head, tail, const, op = row.diff
    t_head = network.events[head].time
    cap_head = network.delay_cap(head)
    if tail is None:
        if op == ">=":
            return max(0, const - t_head)
        return max(0, t_head + cap_head - const)
    t_tail = network.events[tail].time
    cap_tail = network.delay_cap(tail)
    if op == ">=":
        return max(0, const - (t_head - t_tail) + cap_tail)
    return max(0, (t_head - t_tail) + cap_head - const)


# ---------------------------------------------------------------------------
# text export

_NAME_RE = re.compile(r"^[\w\[\]()@>|.:~/-]+$")


def export_model(model: MilpModel) -> str:
    """Serialize the model to the repository's LP text format.

    The format is line oriented and deterministic: objective, rows (named,
    tagged), bounds, then integrality sections.  See docs/lp_format.md.
    """

    out = ["\\ railrecover model export", "\\ format: lp-text v1"]
    out.append("MAXIMIZE")
    out.append("  obj: " + _linear(model.objective))
    out.append("SUBJECT TO")
    for row in model.rows:
        out.append(f"  {row.name}: {_linear(row.coeffs)} {row.sense} {_fmt(row.rhs)}")
    out.append("BOUNDS")
    for name in sorted(model.variables):
        v = model.variables[name]
        out.append(f"  {_fmt(v.lb)} <= {name} <= {_fmt(v.ub)}")
    out.append("BINARY")
    for name in sorted(model.binaries()):
        out.append(f"  {name}")
    out.append("GENERAL")
    for name in sorted(model.integer_vars()):
        out.append(f"  {name}")
    out.append("END")
    return "\n".join(out) + "\n"


def _fmt(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return repr(v)


def _linear(coeffs: dict[str, float]) -> str:
    if not coeffs:
        return "0"
    parts = []
    for name in sorted(coeffs):
        c = coeffs[name]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = name if mag == 1 else f"{_fmt(mag)} {name}"
        parts.append((sign, term))
    if not parts:
        return "0"
    first_sign, first_term = parts[0]
    text = ("-" if first_sign == "-" else "") + first_term
    for sign, term in parts[1:]:
        text += f" {sign} {term}"
    return text


@dataclass
class ParsedModel:
    objective: dict[str, float]
    rows: list[tuple[str, dict[str, float], str, float]]
    bounds: dict[str, tuple[float, float]]
    binary: set[str]
    general: set[str]


def parse_lp_text(text: str) -> ParsedModel:
    """Re-read an exported model; used for round-trip checks."""

    objective: dict[str, float] = {}
    rows = []
    bounds = {}
    binary: set[str] = set()
    general: set[str] = set()
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        if line in ("MAXIMIZE", "SUBJECT TO", "BOUNDS", "BINARY", "GENERAL", "END"):
            section = line
            continue
        if section == "MAXIMIZE":
            _, expr = line.split(": ", 1)
            objective = _parse_linear(expr)
        elif section == "SUBJECT TO":
            name, rest = line.split(": ", 1)
            sense_match = re.search(r"(<=|>=|==)", rest)
            if not sense_match:
                raise ValueError(f"row without sense: {line}")
            sense = sense_match.group(1)
            lhs, rhs = rest.split(sense)
            rows.append((name.strip(), _parse_linear(lhs), sense, float(rhs)))
        elif section == "BOUNDS":
            lo, _, name, _, hi = line.split()
            bounds[name] = (float(lo), float(hi))
        elif section == "BINARY":
            binary.add(line)
        elif section == "GENERAL":
            general.add(line)
    return ParsedModel(objective, rows, bounds, binary, general)


def _parse_linear(expr: str) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    tokens = expr.split()
    sign = 1.0
    pending: Optional[float] = None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        elif tok == "0" and pending is None:
            continue
        else:
            neg = tok.startswith("-")
            if neg:
                tok = tok[1:]
                sign = -1.0
            try:
                pending = float(tok)
                continue
            except ValueError:
                pass
            coeff = sign * (pending if pending is not None else 1.0)
            coeffs[tok] = coeffs.get(tok, 0) + coeff
            sign = 1.0
            pending = None
    return coeffs
