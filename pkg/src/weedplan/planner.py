"""Per-head route planning over a segment's assigned targets.

Two planners compute the same objective — visit as many targets as the
robot's forward motion allows, then spend the least lateral travel doing it:

- plan_brute_force enumerates every ordering of the assigned nodes, prunes
  each against the reachability test, and keeps the selection-rule winner.
  Factorial; capped, and kept as the oracle for the DP.
- plan_notsp runs an exact dynamic program over (visited-subset, last-node)
  states. Transitions only ever advance along the tool-line gap axis, since
  a backward node can never be serviced and pruning would discard it anyway;
  the two planners therefore agree on (visited_count, movement_cost).

Both planners reason purely in gap space: toolline_gaps[i] is node i's
forward distance from the tool line at planning time, and every forward
check compares gaps, never raw field x.

Movement cost is the squared-lateral-step sum including the approach move
from the head's start position.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .errors import ParameterError, PlannerSizeError
from .target_graph import TargetNode

BRUTE_FORCE = "brute_force"
NOTSP = "notsp"
PLANNERS = (BRUTE_FORCE, NOTSP)

BRUTE_FORCE_MAX_NODES = 10
NOTSP_MAX_NODES = 24

_PERM_CACHE_MAX = 8
_PERM_CHUNK = 200_000
_perm_cache: dict[int, np.ndarray] = {}


@dataclass
class Trajectory:
    """A planned visit order with its post-pruning feasibility mask.

    visit_order lists node ids; feasible_mask aligns with it; movement_cost
    is the squared-lateral-step sum over the feasible entries only.
    """

    head_index: int
    visit_order: list[int]
    feasible_mask: list[bool]
    visited_count: int
    movement_cost: float
    planner: str

    def __post_init__(self) -> None:
        if len(self.visit_order) != len(self.feasible_mask):
            raise ValueError("visit_order and feasible_mask must have equal length")
        if self.visited_count != sum(self.feasible_mask):
            raise ValueError("visited_count must equal the number of feasible entries")
        if self.movement_cost < 0:
            raise ValueError("movement_cost must be >= 0")


def movement_cost(ys: Sequence[float], start_y: float) -> float:
    """Squared lateral steps along a visit sequence, approach move included."""
    total = 0.0
    prev = start_y
    for y in ys:
        total += (prev - y) ** 2
        prev = y
    return total


def prune_infeasible(
    order: Sequence[TargetNode],
    start_y: float,
    robot_speed: float,
    head_speed: float,
    toolline_gaps: Sequence[float],
) -> tuple[list[bool], int]:
    """Greedy feasibility scan of a candidate visit order.

    Walks the order keeping the head's (x, y) anchor; a node is feasible iff
    it lies strictly ahead of the anchor and the lateral move fits in the
    forward gap; infeasible nodes are skipped without advancing the anchor.
    toolline_gaps[i] is order[i]'s forward distance from the tool line, so
    the anchor starts at gap 0.
    """
    if len(order) != len(toolline_gaps):
        raise ParameterError("order and toolline_gaps must have equal length")
    mask: list[bool] = []
    cur_gap = 0.0
    cur_y = start_y
    for node, gap in zip(order, toolline_gaps):
        dx = gap - cur_gap
        dy = abs(node.y - cur_y)
        ok = gap > cur_gap and (dy == 0.0 or robot_speed * dy < head_speed * dx)
        mask.append(ok)
        if ok:
            cur_gap = gap
            cur_y = node.y
    return mask, sum(mask)


def select_trajectory(candidates: Sequence[Trajectory]) -> Trajectory:
    """Most visits win; ties by lower cost, then smallest visit_order."""
    if not candidates:
        raise ParameterError("empty candidate list")
    return min(
        candidates,
        key=lambda t: (-t.visited_count, t.movement_cost, tuple(t.visit_order)),
    )


def format_plan_line(traj: Trajectory) -> str:
    """One-line plan dump used by the CLI and golden tests."""
    order = ",".join(str(i) for i in traj.visit_order)
    mask = ",".join("1" if m else "0" for m in traj.feasible_mask)
    return (
        f"head={traj.head_index} visits={traj.visited_count} "
        f"cost={traj.movement_cost:.6f} order=[{order}] mask=[{mask}]"
    )


def _sorted_instance(
    nodes: Sequence[TargetNode], toolline_gaps: Sequence[float]
) -> tuple[list[TargetNode], np.ndarray, np.ndarray]:
    """Sort an instance by its planning coordinate (the forward gap)."""
    if len(nodes) != len(toolline_gaps):
        raise ParameterError("nodes and toolline_gaps must have equal length")
    pairs = sorted(zip(nodes, toolline_gaps), key=lambda p: (p[1], p[0].y, p[0].node_id))
    snodes = [p[0] for p in pairs]
    ys = np.array([nd.y for nd in snodes], dtype=np.float64)
    gaps = np.array([p[1] for p in pairs], dtype=np.float64)
    return snodes, ys, gaps


def _perm_chunks(n: int):
    """Yield permutation index arrays; full array for small n, chunks above."""
    if n <= _PERM_CACHE_MAX:
        if n not in _perm_cache:
            _perm_cache[n] = np.array(
                list(itertools.permutations(range(n))), dtype=np.int64
            )
        yield _perm_cache[n]
        return
    it = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(it, _PERM_CHUNK))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.int64)


def _scan_orders(
    perms: np.ndarray,
    ys: np.ndarray,
    gaps: np.ndarray,
    start_y: float,
    robot_speed: float,
    head_speed: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized greedy prune of many candidate orders at once."""
    count, n = perms.shape
    cur_gap = np.zeros(count)
    cur_y = np.full(count, start_y)
    cost = np.zeros(count)
    visits = np.zeros(count, dtype=np.int64)
    mask = np.zeros((count, n), dtype=bool)
    for t in range(n):
        idx = perms[:, t]
        g = gaps[idx]
        y = ys[idx]
        dx = g - cur_gap
        dy = np.abs(y - cur_y)
        ok = (g > cur_gap) & ((dy == 0.0) | (robot_speed * dy < head_speed * dx))
        mask[:, t] = ok
        visits += ok
        cost = np.where(ok, cost + (cur_y - y) ** 2, cost)
        cur_gap = np.where(ok, g, cur_gap)
        cur_y = np.where(ok, y, cur_y)
    return visits, cost, mask


def plan_brute_force(
    nodes: Sequence[TargetNode],
    start_y: float,
    robot_speed: float,
    head_speed: float,
    toolline_gaps: Sequence[float],
    head_index: int = 0,
    max_nodes: int = BRUTE_FORCE_MAX_NODES,
) -> Trajectory:
    """Exhaustive search over all orderings of one head's nodes.

    Every permutation is pruned greedily; the winner maximizes visits, then
    minimizes cost, then takes the lexicographically smallest id order.
    """
    n = len(nodes)
    if n > max_nodes:
        raise PlannerSizeError(
            f"{n} nodes exceeds the brute-force cap of {max_nodes}; use the notsp planner"
        )
    if n == 0:
        return Trajectory(head_index, [], [], 0, 0.0, BRUTE_FORCE)
    snodes, ys, gaps = _sorted_instance(nodes, toolline_gaps)
    ids = np.array([nd.node_id for nd in snodes], dtype=np.int64)

    best: tuple[int, float, tuple[int, ...]] | None = None  # (-visits, cost, id order)
    best_order: np.ndarray | None = None
    best_mask: np.ndarray | None = None
    for perms in _perm_chunks(n):
        visits, cost, mask = _scan_orders(perms, ys, gaps, start_y, robot_speed, head_speed)
        v_max = int(visits.max())
        tied = visits == v_max
        c_min = float(cost[tied].min())
        rows = np.flatnonzero(tied & (cost == c_min))
        id_rows = ids[perms[rows]]
        local = min(range(len(rows)), key=lambda i: tuple(id_rows[i]))
        cand = (-v_max, c_min, tuple(int(v) for v in id_rows[local]))
        if best is None or cand < best:
            best = cand
            best_order = perms[rows[local]].copy()
            best_mask = mask[rows[local]].copy()

    assert best is not None and best_order is not None and best_mask is not None
    return Trajectory(
        head_index=head_index,
        visit_order=[int(ids[i]) for i in best_order],
        feasible_mask=[bool(b) for b in best_mask],
        visited_count=-best[0],
        movement_cost=best[1],
        planner=BRUTE_FORCE,
    )


@njit(cache=True)
def _notsp_kernel(ys, gaps, start_y, robot_speed, head_speed):  # pragma: no cover
    n = ys.shape[0]
    size = 1 << n
    inf = np.inf
    dp = np.full(size * n, inf)
    parent = np.full(size * n, -1, np.int32)
    counts = np.zeros(size, np.uint8)
    for m in range(1, size):
        counts[m] = counts[m >> 1] + (m & 1)

    for k in range(n):
        if gaps[k] > 0.0:
            dy = abs(ys[k] - start_y)
            if dy == 0.0 or robot_speed * dy < head_speed * gaps[k]:
                dp[(1 << k) * n + k] = (start_y - ys[k]) ** 2

    best_count = 0
    best_cost = 0.0
    best_state = -1
    for mask in range(1, size):
        for last in range(n):
            if not (mask >> last) & 1:
                continue
            c = dp[mask * n + last]
            if c == inf:
                continue
            cnt = counts[mask]
            if cnt > best_count or (cnt == best_count and c < best_cost):
                best_count = cnt
                best_cost = c
                best_state = mask * n + last
            # Extend only to spatially later nodes: earlier ones can never
            # be serviced after this one under forward robot motion.
            for k in range(last + 1, n):
                if (mask >> k) & 1:
                    continue
                dx = gaps[k] - gaps[last]
                if dx <= 0.0:
                    continue
                dy = abs(ys[k] - ys[last])
                if dy == 0.0 or robot_speed * dy < head_speed * dx:
                    nc = c + (ys[last] - ys[k]) ** 2
                    idx = (mask | (1 << k)) * n + k
                    if nc < dp[idx]:
                        dp[idx] = nc
                        parent[idx] = last

    order = np.empty(best_count, np.int32)
    if best_state >= 0:
        state = best_state
        for i in range(best_count - 1, -1, -1):
            mask = state // n
            last = state % n
            order[i] = last
            p = parent[state]
            if p < 0:
                break
            state = (mask ^ (1 << last)) * n + p
    return best_count, best_cost, order


def plan_notsp(
    nodes: Sequence[TargetNode],
    start_y: float,
    robot_speed: float,
    head_speed: float,
    toolline_gaps: Sequence[float],
    head_index: int = 0,
    max_nodes: int = NOTSP_MAX_NODES,
) -> Trajectory:
    """Exact subset DP: maximize feasible visits, then minimize movement cost.

    State is (visited subset, last node); every node on a stored path is
    feasible by construction, so the path of the best state is the optimal
    pruned trajectory and its mask is all-true.
    """
    n = len(nodes)
    if n > max_nodes:
        raise PlannerSizeError(
            f"{n} nodes exceeds the notsp subset-table guard of {max_nodes}; "
            "split the segment"
        )
    if n == 0:
        return Trajectory(head_index, [], [], 0, 0.0, NOTSP)
    snodes, ys, gaps = _sorted_instance(nodes, toolline_gaps)
    count, cost, order = _notsp_kernel(
        ys, gaps, float(start_y), float(robot_speed), float(head_speed)
    )
    visit_order = [snodes[i].node_id for i in order]
    return Trajectory(
        head_index=head_index,
        visit_order=visit_order,
        feasible_mask=[True] * int(count),
        visited_count=int(count),
        movement_cost=float(cost),
        planner=NOTSP,
    )
