"""Partition a segment's target nodes among the intervention heads.

Three strategies:

- distance (D): every node goes to the laterally closest head, using the
  heads' live positions at planning time; ties to the lowest head index.
- static division (SD): the lane is cut into num_heads equal fixed
  sub-sections; a head owns whatever falls in its section.
- dynamic division (DD): the segment's own lateral extent [y_min, y_max] is
  cut into num_heads equal sub-regions, so the heads share the region where
  weeds actually are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import ParameterError
from .kinematics import HeadState
from .target_graph import TargetGraph, TargetNode

DISTANCE = "D"
STATIC_DIVISION = "SD"
DYNAMIC_DIVISION = "DD"
STRATEGIES = (DISTANCE, STATIC_DIVISION, DYNAMIC_DIVISION)


@dataclass
class HeadAssignment:
    """Per-head node-id lists (x-ascending) plus the strategy that made them.

    region_bounds holds each head's [y_lo, y_hi) interval for the division
    strategies (the last interval is closed at its upper edge); None for D.
    """

    head_lists: list[list[int]]
    strategy: str
    region_bounds: list[tuple[float, float]] | None = None

    def nodes_for_head(self, head_index: int, graph: TargetGraph) -> list[TargetNode]:
        by_id = {nd.node_id: nd for nd in graph.nodes}
        return [by_id[nid] for nid in self.head_lists[head_index]]


def _split(graph: TargetGraph, num_heads: int, head_of: Callable[[TargetNode], int]) -> list[list[int]]:
    lists: list[list[int]] = [[] for _ in range(num_heads)]
    for nd in graph.nodes:  # nodes already x-sorted, so lists stay x-ascending
        lists[head_of(nd)].append(nd.node_id)
    return lists


def assign_distance(graph: TargetGraph, heads: list[HeadState]) -> HeadAssignment:
    """Laterally-closest-head assignment against a snapshot of head positions."""
    if not heads:
        raise ParameterError("need at least one head")
    positions = [h.y_position for h in heads]

    def nearest(nd: TargetNode) -> int:
        best = 0
        best_d = abs(positions[0] - nd.y)
        for i in range(1, len(positions)):
            d = abs(positions[i] - nd.y)
            if d < best_d:
                best, best_d = i, d
        return best

    return HeadAssignment(
        head_lists=_split(graph, len(heads), nearest),
        strategy=DISTANCE,
    )


def assign_static_division(graph: TargetGraph, num_heads: int, lane_width: float) -> HeadAssignment:
    """Fixed equal sub-sections of the lane; node at y = lane_width goes last."""
    if num_heads < 1:
        raise ParameterError(f"num_heads must be >= 1, got {num_heads}")
    if lane_width <= 0:
        raise ParameterError(f"lane_width must be > 0, got {lane_width}")

    def section(nd: TargetNode) -> int:
        return min(int(nd.y * num_heads / lane_width), num_heads - 1)

    step = lane_width / num_heads
    bounds = [(i * step, (i + 1) * step) for i in range(num_heads)]
    return HeadAssignment(
        head_lists=_split(graph, num_heads, section),
        strategy=STATIC_DIVISION,
        region_bounds=bounds,
    )


def assign_dynamic_division(graph: TargetGraph, num_heads: int, lane_width: float) -> HeadAssignment:
    """Equal sub-regions of the segment's own lateral span [y_min, y_max].

    Degenerate segments (one node, or all nodes at one y) collapse to the
    head whose rest position is laterally nearest; the rest stay idle.
    lane_width only locates those rest positions, the regions themselves
    depend on the weed ys alone.
    """
    if num_heads < 1:
        raise ParameterError(f"num_heads must be >= 1, got {num_heads}")
    if lane_width <= 0:
        raise ParameterError(f"lane_width must be > 0, got {lane_width}")

    ys = [nd.y for nd in graph.nodes]
    if not ys:
        return HeadAssignment(
            head_lists=[[] for _ in range(num_heads)],
            strategy=DYNAMIC_DIVISION,
            region_bounds=None,
        )
    y_min, y_max = min(ys), max(ys)
    span = y_max - y_min
    if len(ys) <= 1 or span == 0.0:
        rests = [(i + 0.5) * lane_width / num_heads for i in range(num_heads)]
        target = min(range(num_heads), key=lambda i: (abs(rests[i] - y_min), i))
        return HeadAssignment(
            head_lists=_split(graph, num_heads, lambda nd: target),
            strategy=DYNAMIC_DIVISION,
            region_bounds=None,
        )

    def region(nd: TargetNode) -> int:
        return min(int(math.floor((nd.y - y_min) * num_heads / span)), num_heads - 1)

    step = span / num_heads
    bounds = [(y_min + i * step, y_min + (i + 1) * step) for i in range(num_heads)]
    return HeadAssignment(
        head_lists=_split(graph, num_heads, region),
        strategy=DYNAMIC_DIVISION,
        region_bounds=bounds,
    )
