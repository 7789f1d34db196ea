"""Uni-directional constrained node-graph over one segment's weeds.

Nodes are the segment's weeds sorted by (x, y, id). A link j->k exists for
every pair with j strictly before k in that order, so the graph is a complete
DAG whose topological order is the spatial order. Each link carries a squared
lateral cost and a reachability flag for the current speed pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .field import WEED, PlantInstance
from .kinematics import feasible

LATERAL_SQ = "lateral_sq"
EUCLIDEAN_SQ = "euclidean_sq"
COST_METRICS = (LATERAL_SQ, EUCLIDEAN_SQ)


@dataclass(frozen=True)
class TargetNode:
    node_id: int
    plant: PlantInstance
    x: float
    y: float


@dataclass
class TargetGraph:
    """Nodes plus upper-triangular cost and feasibility matrices.

    cost_matrix[j, k] is defined for j < k in sorted order only; the lower
    triangle and diagonal hold NaN. link_feasibility[j, k] mirrors that
    layout with False off the upper triangle.
    """

    nodes: list[TargetNode]
    cost_matrix: np.ndarray
    link_feasibility: np.ndarray
    robot_speed: float
    head_speed: float

    def __len__(self) -> int:
        return len(self.nodes)

    def links(self) -> list[tuple[int, int]]:
        """All forward index pairs (j, k), j < k, in deterministic order."""
        n = len(self.nodes)
        return [(j, k) for j in range(n) for k in range(j + 1, n)]

    def to_edge_list(self) -> str:
        """Debug export: one line per link, `j -> k [cost=..., feasible=0|1]`.

        j and k are node ids, not positions, so the dump is stable across
        input orderings.
        """
        out = []
        for j, k in self.links():
            cost = self.cost_matrix[j, k]
            feas = 1 if self.link_feasibility[j, k] else 0
            out.append(
                f"{self.nodes[j].node_id} -> {self.nodes[k].node_id} "
                f"[cost={cost:.6f}, feasible={feas}]"
            )
        return "\n".join(out)


def build_graph(
    weeds: list[PlantInstance],
    robot_speed: float,
    head_speed: float,
    cost_metric: str = LATERAL_SQ,
) -> TargetGraph:
    """Build the segment graph: sort weeds spatially, fill cost/feasibility.

    cost_metric selects the link cost annotation: squared lateral gap
    (matches the planner's movement cost) or squared euclidean distance.
    Feasibility of j->k is the reachability test on (x_k - x_j, |y_j - y_k|).
    """
    if cost_metric not in COST_METRICS:
        raise ParameterError(f"cost_metric must be one of {COST_METRICS}, got {cost_metric!r}")
    for w in weeds:
        if w.kind != WEED:
            raise ParameterError(f"plant {w.id} is not a weed")

    ordered = sorted(weeds, key=lambda p: (p.x, p.y, p.id))
    nodes = [TargetNode(node_id=p.id, plant=p, x=p.x, y=p.y) for p in ordered]
    n = len(nodes)
    cost = np.full((n, n), np.nan)
    feas = np.zeros((n, n), dtype=bool)
    if n:
        xs = np.array([nd.x for nd in nodes])
        ys = np.array([nd.y for nd in nodes])
        dx = xs[None, :] - xs[:, None]
        dy = np.abs(ys[None, :] - ys[:, None])
        upper = np.triu(np.ones((n, n), dtype=bool), k=1)
        lat_sq = (ys[None, :] - ys[:, None]) ** 2
        if cost_metric == LATERAL_SQ:
            cost[upper] = lat_sq[upper]
        else:
            cost[upper] = (lat_sq + dx ** 2)[upper]
        feas_full = (dy == 0.0) | (robot_speed * dy < head_speed * dx)
        feas[upper] = feas_full[upper]
    return TargetGraph(
        nodes=nodes,
        cost_matrix=cost,
        link_feasibility=feas,
        robot_speed=robot_speed,
        head_speed=head_speed,
    )
