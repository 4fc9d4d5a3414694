"""Branch and bound over the big-M model.

Bounds come from the HiGHS linear relaxation; once every binary is
integral the delay variables are decided exactly by a difference-constraint
system (integral data, so an integer solution exists whenever the
relaxation admits one).  Incumbents are verified against the original
network before they are accepted.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from . import milp, model as m, reduce as reduce_mod, verify
from .dcs import solve_difference_system

logger = logging.getLogger(__name__)

INT_TOL = 1e-6


@dataclass
class SolveParams:
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    gap: float = 0.0
    node_selection: str = "best-bound"  # best-bound | best-estimate | depth-first
    branch_rule: str = "headway-first"  # headway-first | most-fractional
    seed: int = 0
    rho: float = 0.0  # best-estimate weight on unfixed binaries
    dive_every: int = 200  # primal fix-and-dive frequency, 0 disables

    def __post_init__(self) -> None:
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time limit must be nonnegative")
        if self.node_limit is not None and self.node_limit < 0:
            raise ValueError("node limit must be nonnegative")
        if not 0 <= self.gap <= 1:
            raise ValueError("gap tolerance must be in [0, 1]")


@dataclass
class Progress:
    nodes: int
    primal: Optional[float]
    dual: float
    gap: Optional[float]
    elapsed: float


@dataclass
class SolveResult:
    status: str  # optimal | feasible | infeasible | limit
    assignment: Optional[dict[str, int]]
    solution: Optional[verify.Solution]
    objective: Optional[float]
    bound: Optional[float]
    gap: Optional[float]
    nodes: int
    wall_time: float


class _LpData:
    """Matrix form of the model, shared across nodes."""

    def __init__(self, model: milp.MilpModel):
        self.names = sorted(model.variables)
        self.index = {n: i for i, n in enumerate(self.names)}
        n = len(self.names)
        self.c = np.zeros(n)
        for name, coef in model.objective.items():
            self.c[self.index[name]] = coef
        rows_ub, rhs_ub, rows_eq, rhs_eq = [], [], [], []
        for row in model.rows:
            items = [(self.index[k], v) for k, v in row.coeffs.items() if v != 0]
            if row.sense == "==":
                rows_eq.append(items)
                rhs_eq.append(row.rhs)
            elif row.sense == "<=":
                rows_ub.append(items)
                rhs_ub.append(row.rhs)
            else:
                rows_ub.append([(i, -v) for i, v in items])
                rhs_ub.append(-row.rhs)

        def build(rows):
            data, ri, ci = [], [], []
            for i, items in enumerate(rows):
                for j, v in items:
                    ri.append(i)
                    ci.append(j)
                    data.append(v)
            return sparse.csr_matrix(
                (data, (ri, ci)), shape=(len(rows), n)
            ) if rows else None

        self.A_ub = build(rows_ub)
        self.b_ub = np.array(rhs_ub) if rhs_ub else None
        self.A_eq = build(rows_eq)
        self.b_eq = np.array(rhs_eq) if rhs_eq else None
        self.base_bounds = np.array(
            [[model.variables[n].lb, model.variables[n].ub] for n in self.names],
            dtype=float,
        )
        self.binaries = sorted(model.free_binaries())
        self.binary_idx = [self.index[b] for b in self.binaries]


def _solve_lp(data: _LpData, fixed: dict[str, int]):
    bounds = data.base_bounds.copy()
    for name, val in fixed.items():
        i = data.index[name]
        bounds[i, 0] = val
        bounds[i, 1] = val
    res = linprog(
        -data.c,
        A_ub=data.A_ub,
        b_ub=data.b_ub,
        A_eq=data.A_eq,
        b_eq=data.b_eq,
        bounds=bounds,
        method="highs",
    )
    if res.status == 2:  # infeasible
        return None, None
    if res.status != 0:
        raise RuntimeError(f"LP solve failed with status {res.status}: {res.message}")
    values = {n: float(res.x[i]) for i, n in enumerate(data.names)}
    return -res.fun, values


def lp_bound(
    model: milp.MilpModel, partial: Optional[dict[str, int]] = None
) -> Optional[float]:
    """Optimal value of the linear relaxation with the given binaries fixed.

    Returns None when the restricted relaxation is infeasible (prune).
    """

    data = _LpData(model)
    value, _ = _solve_lp(data, partial or {})
    return value


def check_delay_system(
    model: milp.MilpModel, assignment: dict[str, int]
) -> tuple[Optional[dict[str, int]], Optional[list[str]]]:
    """Decide the delay variables exactly for a full binary assignment.

    Activates each tagged row logically via its indicators and solves the
    resulting difference system; returns (delays-by-event, None) or
    (None, witness).
    """

    event_times = model.meta["event_times"]
    bounds: dict[str, tuple[int, int]] = {}
    for var in model.variables.values():
        if var.kind == "x":
            t = event_times[var.entity]
            bounds[var.entity] = (t + int(var.lb), t + int(var.ub))
    edges = []
    for row in model.rows:
        if row.diff is None:
            continue
        if any(assignment.get(ind, 0) != 1 for ind in row.indicators):
            continue
        head, tail, const, op = row.diff
        if tail is None:
            lo, hi = bounds[head]
            if op == ">=":
                bounds[head] = (max(lo, const), hi)
            else:
                bounds[head] = (lo, min(hi, const))
        elif op == ">=":
            edges.append((tail, head, const))
        else:
            edges.append((head, tail, -const))
    times, witness = solve_difference_system(bounds, edges)
    if times is None:
        return None, witness
    event_times = model.meta["event_times"]
    return {eid: t - event_times[eid] for eid, t in times.items()}, None


def branch_select(
    values: dict[str, float],
    free: list[str],
    rule: str = "headway-first",
) -> Optional[str]:
    """Choose the branching variable, or None when all binaries are integral."""

    def frac(name: str) -> float:
        v = values[name]
        return abs(v - round(v))

    fractional = [n for n in free if frac(n) > INT_TOL]
    if not fractional:
        return None
    if rule == "headway-first":
        headways = [n for n in fractional if n.startswith(("g(", "h("))]
        pool = headways or fractional
    else:
        pool = fractional
    return min(pool, key=lambda n: (abs(values[n] - 0.5), n))


def _natural_orientation(model: milp.MilpModel) -> dict[str, int]:
    """Timetable-order values for the free headway variables."""

    times = model.meta["event_times"]
    out: dict[str, int] = {}
    for name in model.free_binaries():
        if not name.startswith(("g(", "h(")):
            continue
        inner = name[2:-1]
        tail, head = inner.split(":", 1)[1].split("|")
        out[name] = 1 if (times[tail], tail) <= (times[head], head) else 0
    return out


def _pair_partner(model: milp.MilpModel, name: str) -> Optional[str]:
    inner = name[2:-1]
    for fwd, rev in model.g_pairs:
        if inner == fwd:
            return f"g({rev})"
        if inner == rev:
            return f"g({fwd})"
    for fwd, rev in model.h_pairs:
        if inner == fwd:
            return f"h({rev})"
        if inner == rev:
            return f"h({fwd})"
    return None


@dataclass(order=True)
class _Node:
    key: tuple
    node_id: int
    fixed: dict[str, int] = field(compare=False)
    bound: float = field(compare=False)


def solve(
    model: milp.MilpModel,
    params: Optional[SolveParams] = None,
    network: Optional[m.Network] = None,
    scenario: Optional[m.Scenario] = None,
    contraction: Optional[reduce_mod.ContractionMap] = None,
    original: Optional[m.Network] = None,
    progress: Optional[Callable[[Progress], None]] = None,
    stop: Optional[Callable[[], bool]] = None,
    progress_every: int = 25,
) -> SolveResult:
    """Best-bound branch and bound with exact delay checks at the leaves.

    When ``network``/``scenario`` are given every incumbent is expanded
    (through ``contraction`` if present) and validated independently before
    acceptance, so no unverified incumbent is ever reported.
    """

    params = params or SolveParams()
    data = _LpData(model)
    start = time.monotonic()
    canonical = sorted(data.binaries)

    best_value: Optional[float] = None
    best_vec: Optional[tuple] = None
    best_assignment: Optional[dict[str, int]] = None
    best_solution: Optional[verify.Solution] = None
    nodes = 0
    next_id = 0
    interrupted = False

    integral_obj = all(
        abs(c - round(c)) < 1e-9 for c in model.objective.values()
    )

    root_bound, _ = _solve_lp(data, {})
    if root_bound is None:
        return SolveResult(
            "infeasible", None, None, None, None, None, 0, time.monotonic() - start
        )

    heap: list[_Node] = []

    def push(fixed: dict[str, int], bound: float, depth: int):
        nonlocal next_id
        if params.node_selection == "depth-first":
            key = (-depth, -next_id)
        elif params.node_selection == "best-estimate":
            unfixed = len(data.binaries) - len(fixed)
            key = (-(bound - params.rho * unfixed), next_id)
        else:
            key = (-bound, next_id)
        heapq.heappush(heap, _Node(key, next_id, fixed, bound))
        next_id += 1

    push({}, root_bound, 0)
    dual_bound = root_bound

    def tighten(b: float) -> float:
        if integral_obj:
            return float(np.floor(b + 1e-6))
        return b

    def current_gap() -> Optional[float]:
        if best_value is None:
            return None
        return max(0.0, (dual_bound - best_value) / max(1.0, abs(best_value)))

    def emit_progress():
        if progress is not None:
            progress(
                Progress(
                    nodes=nodes,
                    primal=best_value,
                    dual=dual_bound,
                    gap=current_gap(),
                    elapsed=time.monotonic() - start,
                )
            )

    def accept_incumbent(assignment: dict[str, int], value: float) -> None:
        nonlocal best_value, best_vec, best_assignment, best_solution
        vec = tuple(assignment.get(n, 0) for n in canonical)
        if best_value is not None:
            if value < best_value - 1e-9:
                return
            if abs(value - best_value) <= 1e-9 and best_vec is not None and vec >= best_vec:
                return
        solution = None
        if network is not None and scenario is not None:
            solution = _assignment_to_solution(model, network, assignment)
            if contraction is not None and original is not None:
                solution = reduce_mod.expand_solution(solution, contraction, original)
            check_net = original if original is not None else network
            report = verify.validate_solution(
                check_net, scenario, solution, extended=model.extended
            )
            if not report.ok:
                logger.warning(
                    "incumbent rejected by verifier: %s",
                    [v.message for v in report.violations[:3]],
                )
                return
        best_value = value
        best_vec = vec
        best_assignment = dict(assignment)
        best_solution = solution

    def out_of_budget() -> bool:
        if stop is not None and stop():
            return True
        if params.time_limit is not None and time.monotonic() - start > params.time_limit:
            return True
        return params.node_limit is not None and nodes >= params.node_limit

    def try_leaf(fixed: dict[str, int], values: dict[str, float]) -> bool:
        """Full integral point: decide delays and record the incumbent."""

        assignment = {n: int(round(values[n])) for n in data.binaries}
        assignment.update(fixed)
        for var in model.variables.values():
            if var.integer and var.ub <= 1 and var.lb == var.ub:
                assignment[var.name] = int(var.lb)
        delays, _ = check_delay_system(model, assignment)
        if delays is None:
            return False
        assignment.update({f"x({eid})": d for eid, d in delays.items()})
        obj = sum(
            model.objective.get(n, 0) * v
            for n, v in assignment.items()
            if n in model.objective
        )
        accept_incumbent(assignment, obj)
        return True

    natural = _natural_orientation(model)

    def dive(fixed_base: dict[str, int]) -> None:
        """Rounding heuristic: pin open headway pairs to the timetable
        order, then fix fractional flow variables one at a time."""

        fixed = dict(fixed_base)
        for name, v in natural.items():
            fixed.setdefault(name, v)
        value, values = _solve_lp(data, fixed)
        if value is None:
            return
        for _ in range(len(data.binaries) + 4):
            if out_of_budget():
                return
            if best_value is not None and tighten(value) <= best_value + 1e-9:
                return
            target = branch_select(values, data.binaries, "most-fractional")
            if target is None:
                try_leaf(fixed, values)
                return
            for choice in (int(round(values[target])), 1 - int(round(values[target]))):
                attempt = dict(fixed)
                attempt[target] = choice
                partner = _pair_partner(model, target)
                if partner is not None:
                    attempt[partner] = 1 - choice
                value2, values2 = _solve_lp(data, attempt)
                if value2 is not None:
                    fixed, value, values = attempt, value2, values2
                    break
            else:
                return

    if params.dive_every:
        dive({})

    while heap:
        if out_of_budget():
            interrupted = True
            break

        node = heapq.heappop(heap)
        open_bounds = [n.bound for n in heap] + [node.bound]
        if best_value is not None:
            open_bounds.append(best_value)
        dual_bound = min(dual_bound, max(open_bounds))
        if params.gap > 0 and best_value is not None and current_gap() <= params.gap:
            break

        if best_value is not None and tighten(node.bound) <= best_value + 1e-9:
            continue

        nodes += 1
        value, values = _solve_lp(data, node.fixed)
        if value is None:
            continue
        value = min(value, node.bound)
        if best_value is not None and tighten(value) <= best_value + 1e-9:
            continue

        if nodes % progress_every == 0:
            emit_progress()
        if params.dive_every and nodes % params.dive_every == 0:
            dive(node.fixed)

        branch_var = branch_select(values, data.binaries, params.branch_rule)
        if branch_var is None:
            if not try_leaf(node.fixed, values):
                # integral LP point without integer delays can only stem
                # from numeric wobble; split on the first free binary
                free_here = [n for n in data.binaries if n not in node.fixed]
                if free_here:
                    var = free_here[0]
                    for v in (0, 1):
                        child = dict(node.fixed)
                        child[var] = v
                        partner = _pair_partner(model, var)
                        if partner is not None:
                            child[partner] = 1 - v
                        push(child, value, len(child))
            continue

        frac_val = values[branch_var]
        first = int(round(frac_val))
        for v in (first, 1 - first):
            child = dict(node.fixed)
            child[branch_var] = v
            partner = _pair_partner(model, branch_var)
            if partner is not None:
                child[partner] = 1 - v
            push(child, value, len(child))

    wall = time.monotonic() - start
    if best_value is not None and not heap and not interrupted:
        dual_bound = best_value
    gap = None
    if best_value is not None:
        gap = max(0.0, (dual_bound - best_value) / max(1.0, abs(best_value)))

    if interrupted:
        status = "feasible" if best_value is not None else "limit"
    elif best_value is None:
        status = "infeasible"
    else:
        status = "optimal" if gap is not None and gap <= params.gap + 1e-9 else "feasible"
    emit_progress()
    return SolveResult(
        status=status,
        assignment=best_assignment,
        solution=best_solution,
        objective=best_value,
        bound=dual_bound if best_value is not None or heap or interrupted else None,
        gap=gap,
        nodes=nodes,
        wall_time=wall,
    )


def _assignment_to_solution(
    model: milp.MilpModel, network: m.Network, assignment: dict[str, int]
) -> verify.Solution:
    selected = set()
    g: dict[str, int] = {}
    h: dict[str, int] = {}
    delays: dict[str, int] = {}
    for name, value in assignment.items():
        inner = name[2:-1]
        if name.startswith("y(") and value == 1:
            selected.add(inner)
        elif name.startswith("g("):
            g[inner] = value
        elif name.startswith("h("):
            h[inner] = value
        elif name.startswith("x("):
            delays[inner] = value
    return verify.assemble_solution(network, frozenset(selected), delays, g, h)


@dataclass
class RecoveryOutcome:
    result: SolveResult
    solution: Optional[verify.Solution]
    report: Optional[verify.ValidationReport]
    network: m.Network
    reduced: m.Network
    model: milp.MilpModel
    stats: dict


def solve_scenario(
    scenario: m.Scenario,
    params: Optional[SolveParams] = None,
    extended: bool = False,
    reduce_network: bool = True,
    progress: Optional[Callable[[Progress], None]] = None,
    stop: Optional[Callable[[], bool]] = None,
) -> RecoveryOutcome:
    """Full pipeline: build, reduce, formulate, solve, expand, verify."""

    network = m.build_network(scenario)
    full_model = milp.formulate(network, extended=extended)
    if reduce_network:
        fixed = reduce_mod.fix_natural_precedences(network)
        reduced, cmap = reduce_mod.contract_chains(network, fixed)
        model = milp.formulate(reduced, extended=extended, fixed=fixed.values)
        contraction = cmap if cmap.chains else None
    else:
        reduced, model, contraction = network, full_model, None

    result = solve(
        model,
        params=params,
        network=reduced,
        scenario=scenario,
        contraction=contraction,
        original=network,
        progress=progress,
        stop=stop,
    )
    report = None
    if result.solution is not None:
        report = verify.validate_solution(
            network, scenario, result.solution, extended=extended
        )
    n_free_full = len(full_model.free_binaries())
    n_free_red = len(model.free_binaries())
    stats = {
        "trips": len(network.drive_by_trip),
        "binaries_full": n_free_full,
        "binaries_reduced": n_free_red,
        "integers_full": len(full_model.integer_vars()),
        "integers_reduced": len(model.integer_vars()),
        "reduction_factor": (n_free_full / n_free_red) if n_free_red else float("inf"),
        "big_m": model.big_m,
    }
    return RecoveryOutcome(
        result=result,
        solution=result.solution,
        report=report,
        network=network,
        reduced=reduced,
        model=model,
        stats=stats,
    )
