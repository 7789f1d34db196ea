"""Discrete-time execution of a spraying pass over one lane.

Geometry: the robot drives in +x at constant speed. At t=0 the camera's
detection edge sits at x=0 and the tool line trails it by camera_tool_gap_m.
Weeds are detected when the edge passes them and batched into fixed-length
segments of robot travel; when a segment's window closes, assignment and
planning run instantaneously but the resulting head commands activate only
after the latency budget. Heads execute their queues target by target; a
weed counts as sprayed iff, when it reaches the tool line, its owning head
sits within half a footprint of it and has dwelled there at least the
actuation latency. Weeds left out of every feasible plan are missed.

All event times are computed analytically and then quantized up onto the
time_step_s grid, so the report is reproducible bit-for-bit for a given
config and the quantization error stays bounded by one step.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from itertools import repeat
from pathlib import Path
from typing import Sequence

import numpy as np

from .assignment import (
    DISTANCE,
    DYNAMIC_DIVISION,
    STATIC_DIVISION,
    STRATEGIES,
    assign_distance,
    assign_dynamic_division,
    assign_static_division,
)
from .errors import ConfigError, InsufficientDataError, WeedPlanError
from .field import UniformityVerdict, WeedField, generate_field, load_field, uniformity_test
from .kinematics import (
    CONSTANT_VELOCITY,
    MOTION_PROFILES,
    HeadState,
    ToolRig,
    head_travel_time,
)
from .planner import BRUTE_FORCE, NOTSP, PLANNERS, plan_brute_force, plan_notsp
from .target_graph import build_graph

logger = logging.getLogger("weedplan.simulator")

SPRAYED = "sprayed"
MISSED = "missed"

RESULTS_HEADER = (
    "lambda,H,strategy,planner,seed,total,sprayed,missed,"
    "loss_pct,travel_mean_m,travel_std_m,planning_wall_s"
)

# Per-head targets are planned in consecutive x-chunks of this size; exact
# within a chunk, greedily chained across chunks. Keeps run() total under
# the planner caps no matter how dense the field is.
_NOTSP_CHUNK = 12
_BRUTE_CHUNK = 8

# Event priorities at equal quantized times: a segment must close before
# plans activate, and both before any weed of that instant reaches the tools.
_PRIO_CLOSE = 0
_PRIO_ACTIVATE = 1
_PRIO_ARRIVAL = 2


@dataclass
class SimulationConfig:
    """Full description of one simulated pass."""

    field: WeedField
    rig: ToolRig = dc_field(default_factory=ToolRig)
    robot_speed: float = 0.5
    strategy: str = DISTANCE
    planner: str = NOTSP
    segment_length_m: float = 0.78
    latency_budget_s: float = 0.2
    time_step_s: float = 0.001
    motion_profile: str = CONSTANT_VELOCITY
    seed: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.field, WeedField):
            raise ConfigError("field must be a WeedField")
        if not isinstance(self.rig, ToolRig):
            raise ConfigError("rig must be a ToolRig")
        for name in ("robot_speed", "segment_length_m", "time_step_s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {v!r}")
        if not (
            isinstance(self.latency_budget_s, (int, float))
            and math.isfinite(self.latency_budget_s)
            and self.latency_budget_s >= 0
        ):
            raise ConfigError(
                f"latency_budget_s must be finite and >= 0, got {self.latency_budget_s!r}"
            )
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.planner not in PLANNERS:
            raise ConfigError(f"unknown planner {self.planner!r}; expected one of {PLANNERS}")
        if self.motion_profile not in MOTION_PROFILES:
            raise ConfigError(
                f"unknown motion_profile {self.motion_profile!r}; "
                f"expected one of {MOTION_PROFILES}"
            )
        # Plans must be ready before their targets reach the tool line.
        max_latency = self.rig.camera_tool_gap_m / self.robot_speed
        if self.latency_budget_s > max_latency:
            raise ConfigError(
                f"latency_budget_s={self.latency_budget_s} exceeds "
                f"camera_tool_gap_m/robot_speed={max_latency}; "
                "targets would pass the tools before their plan exists"
            )


@dataclass(frozen=True)
class SimEvent:
    """One spray attempt outcome; head is -1 and head_y None when unowned."""

    t_s: float
    head: int
    node: int
    outcome: str
    head_y: float | None
    weed_y: float


@dataclass
class SimulationReport:
    total_weeds: int
    sprayed: int
    missed: int
    loss_pct: float
    per_head_travel_m: list[float]
    travel_mean_m: float
    travel_std_m: float
    event_log: list[SimEvent]
    wall_clock_planning_s: float
    uniformity: UniformityVerdict | None = None


class _HeadRuntime:
    """One head's motion state between events.

    Motion is analytic: position(t) interpolates the active move under the
    configured profile. travel accumulates settled legs at each command;
    the in-flight remainder is added from the last logged event at the end,
    so the reported distance is exactly recomputable from the event log.
    """

    __slots__ = (
        "index", "y_from", "y_to", "t_start", "t_end", "travel",
        "pending", "profile", "max_velocity", "max_accel",
    )

    def __init__(self, index: int, rest_y: float, rig: ToolRig, profile: str) -> None:
        self.index = index
        self.y_from = rest_y
        self.y_to = rest_y
        self.t_start = 0.0
        self.t_end = 0.0
        self.travel = 0.0
        self.pending: deque[tuple[int, float, float]] = deque()  # (node_id, y, t_arr_q)
        self.profile = profile
        self.max_velocity = rig.head_max_velocity
        self.max_accel = rig.head_max_accel

    def position(self, t: float) -> float:
        if self.y_from == self.y_to or t >= self.t_end:
            return self.y_to
        if t <= self.t_start:
            return self.y_from
        d = abs(self.y_to - self.y_from)
        sign = 1.0 if self.y_to > self.y_from else -1.0
        tau = t - self.t_start
        if self.profile == CONSTANT_VELOCITY:
            x = min(self.max_velocity * tau, d)
        else:
            v, a = self.max_velocity, self.max_accel
            if d >= v * v / a:
                ta = v / a
                da = v * v / (2 * a)
                total = d / v + v / a
                if tau <= ta:
                    x = 0.5 * a * tau * tau
                elif tau <= total - ta:
                    x = da + v * (tau - ta)
                else:
                    rem = total - tau
                    x = d - 0.5 * a * rem * rem
            else:
                th = math.sqrt(d / a)
                if tau <= th:
                    x = 0.5 * a * tau * tau
                else:
                    rem = 2 * th - tau
                    x = d - 0.5 * a * rem * rem
            x = min(max(x, 0.0), d)
        return self.y_from + sign * x

    def command(self, target: float, t: float) -> None:
        """Redirect the head toward target at time t, settling travel so far."""
        pos = self.position(t)
        self.travel += abs(pos - self.y_from)
        was_moving = t < self.t_end
        self.y_from = pos
        self.y_to = target
        self.t_start = t
        d = abs(target - pos)
        if d == 0.0:
            # Already on target: an interrupted move stops now and the dwell
            # clock restarts; a parked head keeps its original dwell clock.
            if was_moving:
                self.t_end = t
        else:
            self.t_end = t + head_travel_time(
                d, self.max_velocity, self.max_accel, self.profile
            )


def run(config: SimulationConfig) -> SimulationReport:
    """Simulate one full pass; deterministic for a given config."""
    rig = config.rig
    gamma = config.robot_speed
    seg = config.segment_length_m
    tau = config.latency_budget_s
    dt = config.time_step_s
    gap_ct = rig.camera_tool_gap_m
    num_heads = rig.num_heads
    half_fp = rig.spray_footprint_m / 2.0

    if gap_ct < seg + gamma * tau:
        logger.warning(
            "camera_tool_gap_m=%.3f < segment_length_m + robot_speed*latency_budget_s"
            "=%.3f: weeds near segment starts will pass the tools before their "
            "plan activates and are structurally missed",
            gap_ct, seg + gamma * tau,
        )

    def quant(t: float) -> float:
        return math.ceil(t / dt - 1e-9) * dt

    weeds = config.field.weeds()
    segments: dict[int, list] = {}
    for w in weeds:
        segments.setdefault(int(w.x / seg), []).append(w)

    rests = rig.rest_positions()
    runtimes = [_HeadRuntime(i, rests[i], rig, config.motion_profile) for i in range(num_heads)]
    chain_x = [-math.inf] * num_heads
    chain_y = list(rests)
    owned: dict[int, tuple[int, bool]] = {}

    heap: list[tuple] = []
    seq = 0
    for k in sorted(segments):
        heapq.heappush(heap, (quant((k + 1) * seg / gamma), _PRIO_CLOSE, seq, "close", k))
        seq += 1
    for w in weeds:
        heapq.heappush(heap, (quant((w.x + gap_ct) / gamma), _PRIO_ARRIVAL, seq, "arrival", w))
        seq += 1

    if config.planner == BRUTE_FORCE:
        plan_fn, chunk = plan_brute_force, _BRUTE_CHUNK
    else:
        plan_fn, chunk = plan_notsp, _NOTSP_CHUNK

    planning_s = 0.0
    sprayed = missed = 0
    log: list[SimEvent] = []
    last_event_t: list[float | None] = [None] * num_heads

    while heap:
        t_now, _prio, _seq, kind, payload = heapq.heappop(heap)

        if kind == "close":
            k = payload
            t_close = (k + 1) * seg / gamma
            graph = build_graph(segments[k], gamma, rig.head_max_velocity)
            if config.strategy == DISTANCE:
                heads_now = [
                    HeadState(i, runtimes[i].position(t_now)) for i in range(num_heads)
                ]
                assignment = assign_distance(graph, heads_now)
            elif config.strategy == STATIC_DIVISION:
                assignment = assign_static_division(graph, num_heads, rig.lane_width_m)
            else:
                assignment = assign_dynamic_division(graph, num_heads, rig.lane_width_m)

            x_tool_act = gamma * (t_close + tau) - gap_ct
            activations: dict[int, list[tuple[int, float, float]]] = {}
            for h in range(num_heads):
                nodes = assignment.nodes_for_head(h, graph)
                if not nodes:
                    continue
                planned_ids: set[int] = set()
                entries: list[tuple[int, float, float]] = []
                for lo in range(0, len(nodes), chunk):
                    part = nodes[lo : lo + chunk]
                    ref_x = max(chain_x[h], x_tool_act)
                    gaps = [nd.x - ref_x for nd in part]
                    t0 = time.perf_counter()
                    traj = plan_fn(part, chain_y[h], gamma, rig.head_max_velocity, gaps, h)
                    planning_s += time.perf_counter() - t0
                    by_id = {nd.node_id: nd for nd in part}
                    for nid, ok in zip(traj.visit_order, traj.feasible_mask):
                        if not ok:
                            continue
                        nd = by_id[nid]
                        entries.append((nid, nd.y, quant((nd.x + gap_ct) / gamma)))
                        planned_ids.add(nid)
                        chain_x[h] = nd.x
                        chain_y[h] = nd.y
                if entries:
                    activations[h] = entries
                for nd in nodes:
                    owned[nd.node_id] = (h, nd.node_id in planned_ids)
            heapq.heappush(
                heap, (quant(t_close + tau), _PRIO_ACTIVATE, seq, "activate", activations)
            )
            seq += 1

        elif kind == "activate":
            for h, entries in payload.items():
                rt = runtimes[h]
                keep = [e for e in entries if e[2] >= t_now]
                if not keep:
                    continue
                was_empty = not rt.pending
                rt.pending.extend(keep)
                if was_empty:
                    rt.command(rt.pending[0][1], t_now)

        else:  # arrival
            w = payload
            h, planned = owned.get(w.id, (-1, False))
            if h < 0:
                missed += 1
                log.append(SimEvent(t_now, -1, w.id, MISSED, None, w.y))
                continue
            rt = runtimes[h]
            pos = rt.position(t_now)
            hit = False
            if planned and rt.pending and rt.pending[0][0] == w.id:
                rt.pending.popleft()
                hit = (
                    abs(pos - w.y) <= half_fp + 1e-12
                    and (t_now - rt.t_end) + 1e-12 >= rig.actuation_latency_s
                )
                if rt.pending:
                    rt.command(rt.pending[0][1], t_now)
            if hit:
                sprayed += 1
                log.append(SimEvent(t_now, h, w.id, SPRAYED, pos, w.y))
            else:
                missed += 1
                log.append(SimEvent(t_now, h, w.id, MISSED, pos, w.y))
            last_event_t[h] = t_now

    travels = []
    for rt, t_last in zip(runtimes, last_event_t):
        extra = abs(rt.position(t_last) - rt.y_from) if t_last is not None else 0.0
        travels.append(rt.travel + extra)

    total = len(weeds)
    if sprayed + missed != total:
        raise RuntimeError(
            f"event accounting broke conservation: {sprayed}+{missed} != {total}"
        )
    return SimulationReport(
        total_weeds=total,
        sprayed=sprayed,
        missed=missed,
        loss_pct=0.0 if total == 0 else 100.0 * missed / total,
        per_head_travel_m=travels,
        travel_mean_m=float(np.mean(travels)),
        travel_std_m=float(np.std(travels)),
        event_log=log,
        wall_clock_planning_s=planning_s,
    )


def replay_real(
    field_path: str | Path,
    config: SimulationConfig,
    num_bins_x: int = 4,
    num_bins_y: int = 2,
) -> SimulationReport:
    """Run the identical engine on a field loaded from disk.

    The report additionally carries the spatial-uniformity verdict for the
    loaded distribution; None when the field is too sparse to test.
    """
    fld = load_field(field_path)
    report = run(replace(config, field=fld))
    try:
        report.uniformity = uniformity_test(fld, num_bins_x, num_bins_y)
    except InsufficientDataError:
        logger.info("field too sparse for a uniformity verdict; skipping")
        report.uniformity = None
    return report


@dataclass
class SweepSpec:
    """Axes and shared parameters for a batch evaluation grid."""

    densities: Sequence[float]
    head_counts: Sequence[int]
    strategies: Sequence[str]
    planners: Sequence[str]
    seeds: Sequence[int]
    length_m: float = 20.0
    lane_width_m: float = 1.3
    num_crop_rows: int = 3
    crop_spacing_m: float = 0.15
    robot_speed: float = 0.5
    segment_length_m: float = 0.78
    latency_budget_s: float = 0.2
    time_step_s: float = 0.001
    motion_profile: str = CONSTANT_VELOCITY
    rig_template: ToolRig = dc_field(default_factory=ToolRig)

    def __post_init__(self) -> None:
        for name in ("densities", "head_counts", "strategies", "planners", "seeds"):
            if not list(getattr(self, name)):
                raise ConfigError(f"sweep axis {name} must be non-empty")


@dataclass(frozen=True)
class ResultRow:
    """One (cell, seed) simulation outcome."""

    density: float
    num_heads: int
    strategy: str
    planner: str
    seed: int
    total: int
    sprayed: int
    missed: int
    loss_pct: float
    travel_mean_m: float
    travel_std_m: float
    planning_wall_s: float


@dataclass(frozen=True)
class CellAggregate:
    """Column-wise means over one cell's seeds; dispersion of loss kept too."""

    density: float
    num_heads: int
    strategy: str
    planner: str
    seeds_used: int
    total_mean: float
    sprayed_mean: float
    missed_mean: float
    loss_pct_mean: float
    loss_pct_std: float
    travel_mean_m_mean: float
    travel_mean_m_std: float
    travel_std_m_mean: float
    planning_wall_s_mean: float


@dataclass(frozen=True)
class FailedCell:
    density: float
    num_heads: int
    strategy: str
    planner: str
    seed: int
    error: str


@dataclass
class SweepResult:
    rows: list[ResultRow]
    aggregates: list[CellAggregate]
    failed: list[FailedCell]


def _run_sweep_task(
    spec: SweepSpec, task: tuple[float, int, str, str, int]
) -> tuple[str, object]:
    density, heads, strategy, planner, seed = task
    try:
        rig = replace(spec.rig_template, num_heads=heads)
        fld = generate_field(
            density,
            spec.length_m,
            spec.lane_width_m,
            num_crop_rows=spec.num_crop_rows,
            crop_spacing=spec.crop_spacing_m,
            seed=seed,
        )
        cfg = SimulationConfig(
            field=fld,
            rig=rig,
            robot_speed=spec.robot_speed,
            strategy=strategy,
            planner=planner,
            segment_length_m=spec.segment_length_m,
            latency_budget_s=spec.latency_budget_s,
            time_step_s=spec.time_step_s,
            motion_profile=spec.motion_profile,
            seed=seed,
        )
        rep = run(cfg)
    except (WeedPlanError, ValueError) as exc:
        return "err", FailedCell(float(density), heads, strategy, planner, seed, str(exc))
    return "ok", ResultRow(
        density=float(density),
        num_heads=heads,
        strategy=strategy,
        planner=planner,
        seed=seed,
        total=rep.total_weeds,
        sprayed=rep.sprayed,
        missed=rep.missed,
        loss_pct=rep.loss_pct,
        travel_mean_m=rep.travel_mean_m,
        travel_std_m=rep.travel_std_m,
        planning_wall_s=rep.wall_clock_planning_s,
    )


def sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Run the full cartesian grid; failed cells are recorded, not raised.

    Cells are keyed, so aggregation is independent of execution order and
    jobs > 1 changes wall time only, not the result.
    """
    tasks = [
        (float(d), int(h), st, pl, int(seed))
        for d in spec.densities
        for h in spec.head_counts
        for st in spec.strategies
        for pl in spec.planners
        for seed in spec.seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            outcomes = list(ex.map(_run_sweep_task, repeat(spec), tasks))
    else:
        outcomes = [_run_sweep_task(spec, t) for t in tasks]

    rows: list[ResultRow] = []
    failed: list[FailedCell] = []
    by_cell: dict[tuple, list[ResultRow]] = {}
    for (status, obj), task in zip(outcomes, tasks):
        if status == "ok":
            row = obj
            rows.append(row)
            by_cell.setdefault(task[:4], []).append(row)
        else:
            failed.append(obj)

    aggregates = []
    for key, cell_rows in by_cell.items():
        density, heads, strategy, planner = key
        losses = np.array([r.loss_pct for r in cell_rows])
        tmeans = np.array([r.travel_mean_m for r in cell_rows])
        aggregates.append(
            CellAggregate(
                density=density,
                num_heads=heads,
                strategy=strategy,
                planner=planner,
                seeds_used=len(cell_rows),
                total_mean=float(np.mean([r.total for r in cell_rows])),
                sprayed_mean=float(np.mean([r.sprayed for r in cell_rows])),
                missed_mean=float(np.mean([r.missed for r in cell_rows])),
                loss_pct_mean=float(np.mean(losses)),
                loss_pct_std=float(np.std(losses)),
                travel_mean_m_mean=float(np.mean(tmeans)),
                travel_mean_m_std=float(np.std(tmeans)),
                travel_std_m_mean=float(np.mean([r.travel_std_m for r in cell_rows])),
                planning_wall_s_mean=float(np.mean([r.planning_wall_s for r in cell_rows])),
            )
        )
    return SweepResult(rows=rows, aggregates=aggregates, failed=failed)


def write_results_csv(result: SweepResult, path: str | Path) -> None:
    """Emit per-(cell, seed) rows followed by per-cell `seed=agg` mean rows."""
    lines = [RESULTS_HEADER]
    for r in result.rows:
        lines.append(
            f"{float(r.density)!r},{r.num_heads},{r.strategy},{r.planner},{r.seed},"
            f"{r.total},{r.sprayed},{r.missed},{float(r.loss_pct)!r},"
            f"{float(r.travel_mean_m)!r},{float(r.travel_std_m)!r},"
            f"{float(r.planning_wall_s)!r}"
        )
    for a in result.aggregates:
        lines.append(
            f"{float(a.density)!r},{a.num_heads},{a.strategy},{a.planner},agg,"
            f"{float(a.total_mean)!r},{float(a.sprayed_mean)!r},{float(a.missed_mean)!r},"
            f"{float(a.loss_pct_mean)!r},{float(a.travel_mean_m_mean)!r},"
            f"{float(a.travel_std_m_mean)!r},{float(a.planning_wall_s_mean)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_event_log(report: SimulationReport, path: str | Path) -> None:
    """One JSON object per line, schema version 1."""
    lines = []
    for e in report.event_log:
        lines.append(
            json.dumps(
                {
                    "v": 1,
                    "t_s": e.t_s,
                    "head": e.head,
                    "node": e.node,
                    "outcome": e.outcome,
                    "head_y": e.head_y,
                    "weed_y": e.weed_y,
                },
                separators=(",", ":"),
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
