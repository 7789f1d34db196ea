"""Command-line front end: generate fields, plan single segments, run the
evaluation grid, and benchmark the planners.

Exit codes: 0 success, 1 runtime or infeasibility error, 2 usage or config
parse error. The WEEDPLAN_LOG environment variable (error, info, debug)
controls stderr verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .assignment import (
    DISTANCE,
    STATIC_DIVISION,
    STRATEGIES,
    assign_distance,
    assign_dynamic_division,
    assign_static_division,
)
from .errors import ConfigError, WeedPlanError
from .field import WEED, PlantInstance, generate_field, load_field, save_field
from .kinematics import MOTION_PROFILES, HeadState, ToolRig
from .planner import (
    BRUTE_FORCE,
    NOTSP,
    PLANNERS,
    format_plan_line,
    plan_brute_force,
    plan_notsp,
)
from .simulator import SweepSpec, sweep, write_results_csv
from .target_graph import build_graph

logger = logging.getLogger("weedplan.cli")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


@dataclass
class RunManifest:
    """Everything needed to reproduce a sweep's outputs."""

    config_path: str
    resolved_spec: dict
    tool_version: str
    timestamp: str
    output_dir: str
    results_csv: str
    jobs: int
    failed_cells: list

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")


def _setup_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("WEEDPLAN_LOG", "error"), logging.ERROR)
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def cmd_generate(args: argparse.Namespace) -> int:
    fld = generate_field(
        args.density,
        args.length,
        args.lane_width,
        num_crop_rows=args.rows,
        crop_spacing=args.crop_spacing,
        seed=args.seed,
    )
    save_field(fld, args.out)
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    fld = load_field(args.field)
    if args.segment_index < 0:
        raise ConfigError("--segment-index must be >= 0")
    seg = args.segment_length
    weeds = [w for w in fld.weeds() if int(w.x / seg) == args.segment_index]
    rig = ToolRig(
        num_heads=args.heads,
        lane_width_m=fld.lane_width_m,
        head_max_velocity=args.theta,
    )
    if not weeds:
        print("visited=0/0")
        return 0
    graph = build_graph(weeds, args.gamma, args.theta)
    if args.strategy == DISTANCE:
        heads = [HeadState(i, y) for i, y in enumerate(rig.rest_positions())]
        assignment = assign_distance(graph, heads)
    elif args.strategy == STATIC_DIVISION:
        assignment = assign_static_division(graph, args.heads, fld.lane_width_m)
    else:
        assignment = assign_dynamic_division(graph, args.heads, fld.lane_width_m)

    # The segment is planned in isolation: heads at rest, tool line trailing
    # the segment's end by the camera-tool gap. Planner size caps are not
    # worked around here; exceeding one is reported as an error.
    x_tool = (args.segment_index + 1) * seg - rig.camera_tool_gap_m
    plan_fn = plan_brute_force if args.planner == BRUTE_FORCE else plan_notsp
    rests = rig.rest_positions()
    visited = 0
    lines = []
    for h in range(args.heads):
        nodes = assignment.nodes_for_head(h, graph)
        gaps = [nd.x - x_tool for nd in nodes]
        traj = plan_fn(nodes, rests[h], args.gamma, args.theta, gaps, h)
        visited += traj.visited_count
        lines.append(format_plan_line(traj))
    for line in lines:
        print(line)
    print(f"visited={visited}/{len(weeds)}")
    return 0


_SWEEP_LIST_KEYS = {
    "densities": float,
    "head_counts": int,
    "seeds": int,
    "strategies": str,
    "planners": str,
}
_SWEEP_FLOAT_KEYS = (
    "length_m",
    "lane_width_m",
    "crop_spacing_m",
    "robot_speed",
    "segment_length_m",
    "latency_budget_s",
    "time_step_s",
)
_SWEEP_INT_KEYS = ("num_crop_rows",)
_RIG_FLOAT_KEYS = (
    "head_max_velocity",
    "head_max_accel",
    "spray_footprint_m",
    "actuation_latency_s",
    "camera_tool_gap_m",
    "workspace_depth_m",
)


def parse_sweep_config(path: str | Path) -> SweepSpec:
    """Parse the flat key=value sweep config; errors carry 1-based line numbers."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    spec_kwargs: dict = {}
    rig_kwargs: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        try:
            if key in _SWEEP_LIST_KEYS:
                conv = _SWEEP_LIST_KEYS[key]
                items = [tok.strip() for tok in value.split(",") if tok.strip()]
                if not items:
                    raise ValueError("empty list")
                spec_kwargs[key] = [conv(tok) for tok in items]
            elif key in _SWEEP_FLOAT_KEYS:
                spec_kwargs[key] = float(value)
            elif key in _SWEEP_INT_KEYS:
                spec_kwargs[key] = int(value)
            elif key == "motion_profile":
                if value not in MOTION_PROFILES:
                    raise ValueError(f"expected one of {MOTION_PROFILES}")
                spec_kwargs[key] = value
            elif key in _RIG_FLOAT_KEYS:
                rig_kwargs[key] = float(value)
            else:
                raise ValueError("unknown key")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad entry {key!r}={value!r}: {exc}") from exc

    missing = [k for k in _SWEEP_LIST_KEYS if k not in spec_kwargs]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    bad = set(spec_kwargs["strategies"]) - set(STRATEGIES)
    if bad:
        raise ConfigError(f"unknown strategies: {sorted(bad)}; expected subset of {STRATEGIES}")
    bad = set(spec_kwargs["planners"]) - set(PLANNERS)
    if bad:
        raise ConfigError(f"unknown planners: {sorted(bad)}; expected subset of {PLANNERS}")
    try:
        if rig_kwargs:
            spec_kwargs["rig_template"] = ToolRig(**rig_kwargs)
        return SweepSpec(**spec_kwargs)
    except WeedPlanError as exc:
        raise ConfigError(f"config invalid: {exc}") from exc


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        spec = parse_sweep_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)

    result = sweep(spec, jobs=jobs)
    csv_path = out_dir / "results.csv"
    write_results_csv(result, csv_path)
    manifest = RunManifest(
        config_path=str(args.config),
        resolved_spec=asdict(spec),
        tool_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
        output_dir=str(out_dir),
        results_csv=str(csv_path),
        jobs=jobs,
        failed_cells=[asdict(f) for f in result.failed],
    )
    manifest.write(out_dir / "manifest.json")
    for f in result.failed:
        logger.error(
            "cell failed: lambda=%s H=%s %s/%s seed=%s: %s",
            f.density, f.num_heads, f.strategy, f.planner, f.seed, f.error,
        )
    if not result.rows:
        print("error: every sweep cell failed; see manifest.json", file=sys.stderr)
        return 1
    print(f"wrote {csv_path} ({len(result.rows)} rows, {len(result.aggregates)} aggregates)")
    return 0


def _bench_instance(rng: np.random.Generator, n: int):
    xs = np.sort(rng.uniform(0.0, 0.78, size=n))
    ys = rng.uniform(0.0, 1.3, size=n)
    weeds = [
        PlantInstance(id=i, kind=WEED, species="bench", x=float(xs[i]), y=float(ys[i]))
        for i in range(n)
    ]
    graph = build_graph(weeds, 0.5, 5.0)
    gaps = [nd.x + 0.22 for nd in graph.nodes]
    return graph.nodes, gaps


def cmd_bench(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    rng = np.random.default_rng(args.seed)
    instances = [_bench_instance(rng, args.n) for _ in range(args.trials)]

    # Warm both planners so compilation and cache setup stay out of the timings.
    wnodes, wgaps = _bench_instance(rng, min(args.n, 6))
    plan_notsp(wnodes, 0.65, 0.5, 5.0, wgaps)
    plan_brute_force(wnodes, 0.65, 0.5, 5.0, wgaps)

    medians = {}
    results = {}
    for name, fn in ((BRUTE_FORCE, plan_brute_force), (NOTSP, plan_notsp)):
        times = []
        outs = []
        for nodes, gaps in instances:
            t0 = time.perf_counter()
            traj = fn(nodes, 0.65, 0.5, 5.0, gaps)
            times.append(time.perf_counter() - t0)
            outs.append((traj.visited_count, round(traj.movement_cost, 12)))
        medians[name] = statistics.median(times)
        results[name] = outs
    if results[BRUTE_FORCE] != results[NOTSP]:
        print("error: planners disagreed on the benchmark instances", file=sys.stderr)
        return 1

    print(f"n={args.n} trials={args.trials} seed={args.seed}")
    for name in (BRUTE_FORCE, NOTSP):
        print(f"{name} median_s={medians[name]:.3e}")
    ratio = medians[BRUTE_FORCE] / max(medians[NOTSP], 1e-9)
    print(f"ratio={ratio:.1f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weedplan",
        description="Weed-field generation, per-segment head planning, and "
        "batch spray-pass simulation.",
    )
    parser.add_argument("--version", action="version", version=f"weedplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a random weed field CSV")
    p.add_argument("--lambda", dest="density", type=float, required=True,
                   help="weed density (weeds per square metre)")
    p.add_argument("--length", type=float, default=20.0, help="lane length in metres")
    p.add_argument("--lane-width", type=float, default=1.3, help="lane width in metres")
    p.add_argument("--rows", type=int, default=3, help="number of crop rows")
    p.add_argument("--crop-spacing", type=float, default=0.15,
                   help="crop spacing along a row in metres")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True, help="output field CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("plan", help="plan one detection segment of a field file")
    p.add_argument("--field", required=True, help="field CSV path")
    p.add_argument("--segment-index", type=int, default=0)
    p.add_argument("--segment-length", type=float, default=0.78,
                   help="detection window length in metres")
    p.add_argument("--strategy", choices=STRATEGIES, default=DISTANCE)
    p.add_argument("--planner", choices=PLANNERS, default=NOTSP)
    p.add_argument("--gamma", type=float, default=0.5, help="robot forward speed m/s")
    p.add_argument("--theta", type=float, default=5.0, help="head max lateral speed m/s")
    p.add_argument("-H", "--heads", type=int, default=4)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="run a batch evaluation grid from a config file")
    p.add_argument("--config", required=True, help="flat key=value sweep config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=0,
                   help="parallel workers (default: logical processors)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="time both planners on random instances")
    p.add_argument("--n", type=int, default=10, help="targets per instance")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WeedPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
