"""Robot/tool geometry and the lateral reachability test.

A target is reachable when the head's lateral travel at full actuator speed
finishes before the robot's forward motion carries the target past the tool
line: robot_speed * dy < head_speed * dx, strict, with dy == 0 always
reachable. The cross-multiplied form avoids dividing by zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError, PastTargetError
from .field import PlantInstance

CONSTANT_VELOCITY = "constant_velocity"
TRAPEZOIDAL = "trapezoidal"
MOTION_PROFILES = (CONSTANT_VELOCITY, TRAPEZOIDAL)


@dataclass(frozen=True)
class ToolRig:
    """Geometry and kinematic limits of the lateral intervention heads."""

    num_heads: int = 4
    lane_width_m: float = 1.3
    head_max_velocity: float = 5.0  # m/s
    head_max_accel: float = 10.0  # m/s^2
    spray_footprint_m: float = 0.05  # ground-circle diameter per actuation
    actuation_latency_s: float = 0.012  # nozzle on/off time
    camera_tool_gap_m: float = 1.0  # tool line to camera detection edge
    workspace_depth_m: float = 0.36  # tool workspace extent along x

    def __post_init__(self) -> None:
        if self.num_heads < 1:
            raise ParameterError(f"num_heads must be >= 1, got {self.num_heads}")
        positives = {
            "lane_width_m": self.lane_width_m,
            "head_max_velocity": self.head_max_velocity,
            "head_max_accel": self.head_max_accel,
            "spray_footprint_m": self.spray_footprint_m,
            "workspace_depth_m": self.workspace_depth_m,
        }
        for name, v in positives.items():
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v}")
        for name, v in (("actuation_latency_s", self.actuation_latency_s),
                        ("camera_tool_gap_m", self.camera_tool_gap_m)):
            if not (math.isfinite(v) and v >= 0):
                raise ParameterError(f"{name} must be finite and >= 0, got {v}")
        # Footprint must fit a static sub-division of the lane.
        if self.spray_footprint_m > self.lane_width_m / self.num_heads:
            raise ParameterError(
                f"spray_footprint_m={self.spray_footprint_m} exceeds lane_width/num_heads="
                f"{self.lane_width_m / self.num_heads}"
            )

    def rest_positions(self) -> list[float]:
        """Head park positions: centers of the static lane sub-divisions."""
        step = self.lane_width_m / self.num_heads
        return [(i + 0.5) * step for i in range(self.num_heads)]


@dataclass
class HeadState:
    head_index: int
    y_position: float
    busy_until: float = 0.0  # simulation time when the current motion completes


@dataclass
class RobotState:
    forward_speed: float  # m/s, constant per run
    x_position: float  # camera detection edge
    toolline_x: float  # x of the intervention heads' line


def lateral_distance(head: HeadState, weed: PlantInstance) -> float:
    """Lateral gap |head_y - weed_y| a head must close to service a weed."""
    return abs(head.y_position - weed.y)


def feasible(dx: float, dy: float, robot_speed: float, head_speed: float) -> bool:
    """True iff a head can close dy laterally while the robot closes dx forward.

    Strict test robot_speed * dy < head_speed * dx; dy == 0 is always feasible.
    """
    if dy == 0.0:
        return True
    return robot_speed * dy < head_speed * dx


def head_travel_time(dy: float, head_speed: float, max_accel: float, profile: str) -> float:
    """Time for a head to travel dy laterally under the given motion profile.

    constant_velocity: dy / head_speed. trapezoidal: bang-bang with
    acceleration limit; short moves never reach cruise speed.
    """
    if dy < 0:
        raise ParameterError(f"dy must be >= 0, got {dy}")
    if profile == CONSTANT_VELOCITY:
        return dy / head_speed
    if profile == TRAPEZOIDAL:
        if dy >= head_speed * head_speed / max_accel:
            return dy / head_speed + head_speed / max_accel
        return 2.0 * math.sqrt(dy / max_accel)
    raise ParameterError(f"unknown motion profile {profile!r}")


def weed_arrival_time(weed: PlantInstance, robot: RobotState) -> float:
    """Time until the weed crosses the tool line at the robot's constant speed."""
    if weed.x < robot.toolline_x:
        raise PastTargetError(
            f"weed at x={weed.x} already behind tool line x={robot.toolline_x}"
        )
    return (weed.x - robot.toolline_x) / robot.forward_speed
