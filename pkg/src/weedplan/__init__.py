"""Selective-weeding toolkit: Poisson weed fields, per-head kinematic
feasibility, target assignment, per-segment route planning, and a
discrete-time simulator for whole spraying passes."""

__version__ = "0.1.0"

from .assignment import (
    DISTANCE,
    DYNAMIC_DIVISION,
    STATIC_DIVISION,
    STRATEGIES,
    HeadAssignment,
    assign_distance,
    assign_dynamic_division,
    assign_static_division,
)
from .errors import (
    ConfigError,
    FieldBoundsError,
    FieldFormatError,
    InsufficientDataError,
    ParameterError,
    PastTargetError,
    PlannerSizeError,
    WeedPlanError,
)
from .field import (
    CROP,
    WEED,
    PlantInstance,
    UniformityVerdict,
    WeedField,
    generate_field,
    load_field,
    save_field,
    uniformity_test,
)
from .kinematics import (
    CONSTANT_VELOCITY,
    MOTION_PROFILES,
    TRAPEZOIDAL,
    HeadState,
    RobotState,
    ToolRig,
    feasible,
    head_travel_time,
    lateral_distance,
    weed_arrival_time,
)
from .planner import (
    BRUTE_FORCE,
    BRUTE_FORCE_MAX_NODES,
    NOTSP,
    NOTSP_MAX_NODES,
    PLANNERS,
    Trajectory,
    format_plan_line,
    movement_cost,
    plan_brute_force,
    plan_notsp,
    prune_infeasible,
    select_trajectory,
)
from .simulator import (
    MISSED,
    RESULTS_HEADER,
    SPRAYED,
    CellAggregate,
    FailedCell,
    ResultRow,
    SimEvent,
    SimulationConfig,
    SimulationReport,
    SweepResult,
    SweepSpec,
    replay_real,
    run,
    sweep,
    write_event_log,
    write_results_csv,
)
from .target_graph import (
    COST_METRICS,
    EUCLIDEAN_SQ,
    LATERAL_SQ,
    TargetGraph,
    TargetNode,
    build_graph,
)

__all__ = [
    "__version__",
    "WeedPlanError", "ParameterError", "FieldFormatError", "FieldBoundsError",
    "InsufficientDataError", "PastTargetError", "PlannerSizeError", "ConfigError",
    "CROP", "WEED", "PlantInstance", "WeedField", "UniformityVerdict",
    "generate_field", "save_field", "load_field", "uniformity_test",
    "CONSTANT_VELOCITY", "TRAPEZOIDAL", "MOTION_PROFILES",
    "ToolRig", "HeadState", "RobotState",
    "lateral_distance", "feasible", "head_travel_time", "weed_arrival_time",
    "LATERAL_SQ", "EUCLIDEAN_SQ", "COST_METRICS",
    "TargetNode", "TargetGraph", "build_graph",
    "DISTANCE", "STATIC_DIVISION", "DYNAMIC_DIVISION", "STRATEGIES",
    "HeadAssignment", "assign_distance", "assign_static_division",
    "assign_dynamic_division",
    "BRUTE_FORCE", "NOTSP", "PLANNERS",
    "BRUTE_FORCE_MAX_NODES", "NOTSP_MAX_NODES",
    "Trajectory", "movement_cost", "prune_infeasible", "select_trajectory",
    "plan_brute_force", "plan_notsp", "format_plan_line",
    "SPRAYED", "MISSED", "RESULTS_HEADER",
    "SimulationConfig", "SimulationReport", "SimEvent",
    "SweepSpec", "SweepResult", "ResultRow", "CellAggregate", "FailedCell",
    "run", "sweep", "replay_real", "write_results_csv", "write_event_log",
]
