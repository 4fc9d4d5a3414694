"""Difference-constraint feasibility over integer event times.

Constraints have the form ``t[u] - t[v] >= c`` plus box bounds
``lo[v] <= t[v] <= hi[v]``.  Feasibility is decided by longest paths from a
virtual root; a positive cycle is the infeasibility witness.  With integer
data the returned times are integral and componentwise minimal.
"""

from __future__ import annotations

from collections import deque
from typing import Optional


def solve_difference_system(
    bounds: dict[str, tuple[int, int]],
    edges: list[tuple[str, str, int]],
) -> tuple[Optional[dict[str, int]], Optional[list[str]]]:
    """Return (times, None) if feasible else (None, witness).

    ``edges`` entries (v, u, c) require t[u] - t[v] >= c.  The witness is a
    list of node ids on a positive cycle, or a single node whose bounds
    cannot be met.
    """

    for node, (lo, hi) in bounds.items():
        if lo > hi:
            return None, [node]

    nodes = sorted(bounds)
    # longest path from a virtual root seeded with the lower bounds
    dist = {n: bounds[n][0] for n in nodes}
    adj: dict[str, list[tuple[str, int]]] = {n: [] for n in nodes}
    for v, u, c in edges:
        adj[v].append((u, c))
    for n in nodes:
        adj[n].sort()

    pred: dict[str, Optional[str]] = {n: None for n in nodes}
    in_queue = {n: True for n in nodes}
    relax_count = {n: 0 for n in nodes}
    queue = deque(nodes)
    limit = len(nodes) + 1
    while queue:
        v = queue.popleft()
        in_queue[v] = False
        dv = dist[v]
        for u, c in adj[v]:
            cand = dv + c
            if cand > dist[u]:
                if cand > bounds[u][1]:
                    # check whether the push is cyclic before failing: a
                    # plain bound conflict is also a valid witness
                    witness = _trace(pred, v, u)
                    if witness is None:
                        witness = [u]
                    return None, witness
                dist[u] = cand
                pred[u] = v
                relax_count[u] += 1
                if relax_count[u] > limit:
                    witness = _trace(pred, v, u) or [u]
                    return None, witness
                if not in_queue[u]:
                    in_queue[u] = True
                    queue.append(u)
    return dist, None


def _trace(pred: dict[str, Optional[str]], v: str, u: str) -> Optional[list[str]]:
    """Walk predecessors from v looking for a cycle through u."""

    seen = [u, v]
    cur = pred.get(v)
    steps = 0
    while cur is not None and steps <= len(pred):
        if cur in seen:
            i = seen.index(cur)
            return seen[i:]
        seen.append(cur)
        cur = pred.get(cur)
        steps += 1
    return None
