"""Guided planning loop: high-level push actions delivered by a pluggable
guidance provider, turned into approach + push plans with short budgets, and a
final reach plan with whatever overall budget remains."""

import math
import time
from dataclasses import dataclass, field, replace

from .geometry import Pose2, min_enclosing_circle, point_to_shape_distance
from .planners import (
    ObjectToRegion,
    Plan,
    PlannerConfig,
    PlanningFailure,
    ReachGoalObject,
    RobotPoses,
    PLANNERS,
)
from .world import Scene, SystemState, is_valid, state_to_json_dict


@dataclass(frozen=True)
class Push:
    """Push an object so its centroid enters the target region."""

    object_id: str
    centroid: tuple[float, float]


@dataclass(frozen=True)
class ReachGoal:
    """Terminal action: reach for the goal object."""


HighLevelAction = Push | ReachGoal


@dataclass(frozen=True)
class GuidedConfig:
    t_overall: float = 300.0
    t_pushing: float = 10.0
    region_diameter: float = 0.08
    approach_clearance: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.t_pushing > self.t_overall:
            raise ValueError("t_pushing must not exceed t_overall")
        if self.region_diameter <= 0.0:
            raise ValueError("region_diameter must be positive")


class GuidanceProvider:
    """Source of high-level actions. `next_high_level_action` may return None
    to signal that no action is available this round; the loop then asks again
    (the accumulated guidance_time keeps counting against the overall budget)."""

    guidance_time: float = 0.0

    def next_high_level_action(self, state: SystemState) -> HighLevelAction | None:
        raise NotImplementedError


class ScriptedGuidance(GuidanceProvider):
    """Replays a fixed action list, then returns ReachGoal forever."""

    def __init__(self, script: list[HighLevelAction]):
        if not script:
            raise ValueError("script must be non-empty")
        self.guidance_time = 0.0
        self._script = list(script)
        self._next = 0

    def next_high_level_action(self, state: SystemState) -> HighLevelAction:
        if self._next < len(self._script):
            action = self._script[self._next]
            self._next += 1
            return action
        return ReachGoal()


def scripted_guidance(script: list[HighLevelAction]) -> ScriptedGuidance:
    return ScriptedGuidance(script)


class ApproachInfeasible(Exception):
    """Neither approach pose around the object is placeable."""


def compute_approach_states(
    scene: Scene,
    state: SystemState,
    object_id: str,
    centroid: tuple[float, float],
    clearance: float = 0.01,
) -> list[Pose2]:
    """Poses from which to push the object toward the target centroid.

    The forward-push pose sits behind the object on the line to the target;
    the side-push pose sits at 90 degrees, on whichever side is valid and
    farther from the nearest wall. Returns the placeable subset, side pose
    first; raises ApproachInfeasible when neither is placeable.
    """
    idx = scene.object_index(object_id)
    obj = scene.objects[idx]
    opose = state.objects[idx]
    cx, cy = centroid
    dx, dy = opose.x - cx, opose.y - cy
    dist = math.hypot(dx, dy)
    if dist < 1e-9:
        raise ValueError("target centroid coincides with the object centroid")
    ux, uy = dx / dist, dy / dist
    radius = min_enclosing_circle(obj.shape, opose).radius
    standoff = radius + scene.robot.mouth_depth + clearance

    def pose_along(nx: float, ny: float) -> Pose2:
        return Pose2(opose.x + nx * standoff, opose.y + ny * standoff, math.atan2(-ny, -nx))

    def pose_ok(p: Pose2) -> bool:
        return is_valid(scene, SystemState(p, state.objects))

    def wall_distance(p: Pose2) -> float:
        return min(point_to_shape_distance(p.x, p.y, ws, wp) for ws, wp in scene.walls)

    forward = pose_along(ux, uy)
    side_candidates = [pose_along(-uy, ux), pose_along(uy, -ux)]  # +90deg first
    side_valid = [p for p in side_candidates if pose_ok(p)]
    side = None
    if len(side_valid) == 2:
        d0, d1 = wall_distance(side_valid[0]), wall_distance(side_valid[1])
        side = side_valid[0] if d0 >= d1 else side_valid[1]
    elif side_valid:
        side = side_valid[0]

    poses = []
    if side is not None:
        poses.append(side)
    if pose_ok(forward):
        poses.append(forward)
    if not poses:
        raise ApproachInfeasible(object_id)
    return poses


@dataclass
class Segment:
    """One push attempt: the action, its two plans (or the failure that cut it
    short), and the state after execution."""

    action: HighLevelAction
    approach_plan: Plan | None
    push_plan: Plan | None
    failure: str | None
    state_after: SystemState

    def executed(self) -> bool:
        return self.failure is None


@dataclass
class ExecutionLog:
    segments: list[Segment] = field(default_factory=list)
    final_reach: Plan | None = None
    final_failure: str | None = None
    final_state: SystemState | None = None
    success: bool = False
    proposed_actions: int = 0
    successful_actions: int = 0
    planning_time: float = 0.0
    guidance_time: float = 0.0

    def to_json_dict(self) -> dict:
        def plan_dict(plan: Plan | None):
            if plan is None:
                return None
            return {
                "controls": [[c.vx, c.vy, c.omega, c.duration] for c in plan.controls],
                "states": [state_to_json_dict(s) for s in plan.states],
                "planning_time": plan.planning_time,
            }

        def action_dict(action: HighLevelAction):
            if isinstance(action, Push):
                return {
                    "type": "push",
                    "object_id": action.object_id,
                    "x": action.centroid[0],
                    "y": action.centroid[1],
                }
            return {"type": "reach"}

        return {
            "success": self.success,
            "counters": {
                "proposed_actions": self.proposed_actions,
                "successful_actions": self.successful_actions,
            },
            "timings": {
                "planning_time": self.planning_time,
                "guidance_time": self.guidance_time,
            },
            "segments": [
                {
                    "action": action_dict(s.action),
                    "approach_plan": plan_dict(s.approach_plan),
                    "push_plan": plan_dict(s.push_plan),
                    "failure": s.failure,
                    "state_after": state_to_json_dict(s.state_after),
                }
                for s in self.segments
            ],
            "final_reach": {
                "plan": plan_dict(self.final_reach),
                "failure": self.final_failure,
            },
            "final_state": state_to_json_dict(self.final_state) if self.final_state else None,
        }


def derive_seed(seed: int, k: int) -> int:
    return (seed + k * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF


def plan_push_segment(
    scene: Scene,
    q_current: SystemState,
    action: Push,
    gcfg: GuidedConfig,
    pcfg: PlannerConfig,
    planner_name: str,
    seed_counter: int,
    budget: float,
) -> tuple[Segment, float, int]:
    """Approach + push planning for one Push action.

    Returns (segment, metered planning seconds, updated seed counter). The
    segment's state_after equals q_current unless both plans succeeded.
    """
    planner = PLANNERS[planner_name]
    spent = 0.0
    try:
        approach_poses = compute_approach_states(
            scene, q_current, action.object_id, action.centroid, gcfg.approach_clearance
        )
    except ApproachInfeasible:
        return (
            Segment(action, None, None, "approach_infeasible", q_current),
            spent,
            seed_counter,
        )

    approach_budget = min(gcfg.t_pushing, budget)
    if approach_budget <= 0.0:
        return Segment(action, None, None, "budget_exhausted", q_current), spent, seed_counter
    cfg_a = replace(pcfg, seed=derive_seed(gcfg.seed, seed_counter), time_limit=approach_budget)
    seed_counter += 1
    goal_a = RobotPoses(tuple(approach_poses))
    result_a = planner(scene, q_current, goal_a, cfg_a)
    if isinstance(result_a, PlanningFailure):
        # A timed-out call deterministically consumes its whole budget.
        spent += approach_budget if result_a.reason == "timeout" else result_a.elapsed
        return (
            Segment(action, None, None, f"approach_{result_a.reason}", q_current),
            spent,
            seed_counter,
        )
    spent += result_a.planning_time

    push_budget = min(gcfg.t_pushing, budget - spent)
    if push_budget <= 0.0:
        return Segment(action, result_a, None, "budget_exhausted", q_current), spent, seed_counter
    cfg_p = replace(pcfg, seed=derive_seed(gcfg.seed, seed_counter), time_limit=push_budget)
    seed_counter += 1
    goal_p = ObjectToRegion(action.object_id, action.centroid, gcfg.region_diameter)
    reached = result_a.states[-1]
    result_p = planner(scene, reached, goal_p, cfg_p)
    if isinstance(result_p, PlanningFailure):
        spent += push_budget if result_p.reason == "timeout" else result_p.elapsed
        return (
            Segment(action, result_a, None, f"push_{result_p.reason}", q_current),
            spent,
            seed_counter,
        )
    spent += result_p.planning_time

    # Executing in simulation reproduces the plans exactly, so the state after
    # execution is the push plan's final state.
    return (
        Segment(action, result_a, result_p, None, result_p.states[-1]),
        spent,
        seed_counter,
    )


def plan_reach(
    scene: Scene,
    q_current: SystemState,
    pcfg: PlannerConfig,
    planner_name: str,
    seed: int,
    budget: float,
):
    planner = PLANNERS[planner_name]
    cfg = replace(pcfg, seed=seed, time_limit=budget)
    return planner(scene, q_current, ReachGoalObject(), cfg)


def run_guided(
    scene: Scene,
    q0: SystemState,
    guidance: GuidanceProvider,
    gcfg: GuidedConfig,
    pcfg: PlannerConfig,
    planner: str = "rrt",
) -> ExecutionLog:
    """Run the guided loop from q0 until the guidance proposes reaching the
    goal (or the overall budget runs out), then plan the final reach with the
    remaining budget."""
    if planner not in PLANNERS:
        raise ValueError(f"unknown planner {planner!r}")
    if not is_valid(scene, q0):
        raise ValueError("q0 is not a valid state")

    log = ExecutionLog()
    q_current = q0
    used = 0.0
    seed_counter = 0
    wall_deadline = time.monotonic() + gcfg.t_overall + 0.1
    reach_requested = False

    while True:
        if used >= gcfg.t_overall or time.monotonic() >= wall_deadline:
            log.final_failure = "timeout"
            break
        guidance_before = guidance.guidance_time
        action = guidance.next_high_level_action(q_current)
        guidance_spent = guidance.guidance_time - guidance_before
        log.guidance_time += guidance_spent
        used += guidance_spent
        if action is None:
            continue
        if isinstance(action, ReachGoal):
            log.proposed_actions += 1
            reach_requested = True
            break
        log.proposed_actions += 1
        segment, spent, seed_counter = plan_push_segment(
            scene, q_current, action, gcfg, pcfg, planner, seed_counter, gcfg.t_overall - used
        )
        used += spent
        log.planning_time += spent
        log.segments.append(segment)
        if segment.executed():
            q_current = segment.state_after
            log.successful_actions += 1

    if reach_requested:
        budget = gcfg.t_overall - used
        if budget > 0.0:
            result = plan_reach(
                scene, q_current, pcfg, planner, derive_seed(gcfg.seed, seed_counter), budget
            )
            seed_counter += 1
            if isinstance(result, PlanningFailure):
                log.planning_time += budget if result.reason == "timeout" else result.elapsed
                log.final_failure = f"reach_{result.reason}"
            else:
                log.planning_time += result.planning_time
                log.final_reach = result
                q_current = result.states[-1]
                log.success = True
        else:
            log.final_failure = "timeout"

    log.final_state = q_current
    return log
