"""Kinodynamic RRT and KPIECE planners over the pushing simulator.

Both planners answer plan(q_start, goal) under a time budget. Planner work is
metered on a deterministic cost model (a fixed charge per propagation substep,
per nearest-neighbour scan entry, and per grid operation) so that identical
seeds reproduce identical plans and identical reported planning times; the
wall clock is enforced alongside as a safety net.
"""

import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Pose2,
    Rectangle,
    angle_difference,
    clamp,
    enclosing_radius,
    normalize_angle,
    rotate_vector,
)
from .physics import propagate
from .world import Control, Scene, SystemState, grasp_achieved, is_valid

# Deterministic planner clock: charged seconds per unit of work. Calibrated
# as a mild over-estimate of real cost so the metered budget binds first.
COST_PER_ITERATION = 60e-6
COST_PER_SUBSTEP = 30e-6
COST_PER_SUBSTEP_OBJECT = 14e-6
COST_PER_NN_ENTRY = 0.15e-6
COST_PER_CELL_SCAN = 0.6e-6

# When set to a list, every planner call appends (budget, wall_seconds,
# metered_seconds); used by the benchmark/acceptance harness.
CALL_RECORDER: list | None = None


@dataclass(frozen=True)
class ReachGoalObject:
    """Terminal goal: the goal object held in the gripper mouth."""


@dataclass(frozen=True)
class RobotPoses:
    """Multi-pose goal: the robot within tolerance of any listed pose."""

    poses: tuple[Pose2, ...]
    pos_tol: float = 0.01
    ang_tol: float = 0.1

    def __post_init__(self):
        if not self.poses:
            raise ValueError("RobotPoses requires at least one pose")


@dataclass(frozen=True)
class ObjectToRegion:
    """Push goal: the object's centroid inside a disk of the given diameter."""

    object_id: str
    centroid: tuple[float, float]
    diameter: float

    def __post_init__(self):
        if self.diameter <= 0.0:
            raise ValueError("region diameter must be positive")


GoalSpec = ReachGoalObject | RobotPoses | ObjectToRegion


@dataclass(frozen=True)
class PlannerConfig:
    time_limit: float
    seed: int = 0
    v_max: float = 0.10
    omega_max: float = 1.0
    t_min: float = 0.5
    t_max: float = 2.0
    goal_bias: float = 0.05
    kpiece_cell_size: float = 0.04
    kpiece_interior_bias: float = 0.7
    nn_theta_weight: float = 0.05

    def __post_init__(self):
        if self.time_limit <= 0.0:
            raise ValueError("time_limit must be positive")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must be a probability")


@dataclass(frozen=True)
class Plan:
    controls: tuple[Control, ...]
    states: tuple[SystemState, ...]
    planning_time: float


@dataclass(frozen=True)
class PlanningFailure:
    reason: str  # "timeout" | "invalid_start"
    elapsed: float = 0.0  # metered planning seconds consumed before failing


def goal_satisfied(scene: Scene, state: SystemState, goal: GoalSpec) -> bool:
    if isinstance(goal, ReachGoalObject):
        return grasp_achieved(scene, state)
    if isinstance(goal, RobotPoses):
        r = state.robot
        for p in goal.poses:
            if (
                math.hypot(r.x - p.x, r.y - p.y) <= goal.pos_tol
                and angle_difference(r.theta, p.theta) <= goal.ang_tol
            ):
                return True
        return False
    idx = scene.object_index(goal.object_id)
    o = state.objects[idx]
    return math.hypot(o.x - goal.centroid[0], o.y - goal.centroid[1]) <= 0.5 * goal.diameter


def distance(
    a: SystemState,
    b: SystemState,
    goal: GoalSpec,
    scene: Scene | None = None,
    theta_weight: float = 0.05,
) -> float:
    """Nearest-neighbour metric: robot position + weighted heading distance,
    plus the pushed object's position distance for push goals (which need the
    scene to resolve the object id)."""
    object_index = None
    if isinstance(goal, ObjectToRegion):
        if scene is None:
            raise ValueError("push-goal distance needs the scene to resolve the object id")
        object_index = scene.object_index(goal.object_id)
    return _distance_indexed(a, b, object_index, theta_weight)


def _distance_indexed(
    a: SystemState, b: SystemState, object_index: int | None, theta_weight: float
) -> float:
    d = math.hypot(a.robot.x - b.robot.x, a.robot.y - b.robot.y)
    d += theta_weight * angle_difference(a.robot.theta, b.robot.theta)
    if object_index is not None:
        oa, ob = a.objects[object_index], b.objects[object_index]
        d += math.hypot(oa.x - ob.x, oa.y - ob.y)
    return d


class _BudgetClock:
    """Couples the deterministic cost meter with a wall-clock deadline."""

    def __init__(self, time_limit: float):
        self.limit = time_limit
        self.metered = 0.0
        self._t0 = time.monotonic()

    def charge(self, seconds: float) -> None:
        self.metered += seconds

    def expired(self) -> bool:
        return self.metered >= self.limit or (time.monotonic() - self._t0) >= self.limit

    def wall(self) -> float:
        return time.monotonic() - self._t0


def _substeps(duration: float, dt: float) -> int:
    return int(duration / dt) + 1


def _propagation_charge(control: Control, dt: float, n_objects: int) -> float:
    return _substeps(control.duration, dt) * (COST_PER_SUBSTEP + COST_PER_SUBSTEP_OBJECT * n_objects)


class _Tree:
    """Append-only motion tree with vectorised nearest-neighbour queries."""

    def __init__(self, object_index: int | None, theta_weight: float):
        self.states: list[SystemState] = []
        self.parents: list[int] = []
        self.controls: list[Control | None] = []
        self.object_index = object_index
        self.theta_weight = theta_weight
        self._cap = 256
        self._x = np.empty(self._cap)
        self._y = np.empty(self._cap)
        self._t = np.empty(self._cap)
        self._ox = np.empty(self._cap)
        self._oy = np.empty(self._cap)

    def __len__(self) -> int:
        return len(self.states)

    def add(self, state: SystemState, parent: int, control: Control | None) -> int:
        n = len(self.states)
        if n == self._cap:
            self._cap *= 2
            for name in ("_x", "_y", "_t", "_ox", "_oy"):
                arr = getattr(self, name)
                grown = np.empty(self._cap)
                grown[:n] = arr[:n]
                setattr(self, name, grown)
        self.states.append(state)
        self.parents.append(parent)
        self.controls.append(control)
        self._x[n] = state.robot.x
        self._y[n] = state.robot.y
        self._t[n] = state.robot.theta
        if self.object_index is not None:
            o = state.objects[self.object_index]
            self._ox[n] = o.x
            self._oy[n] = o.y
        return n

    def nearest(self, x: float, y: float, theta: float, ox: float | None, oy: float | None) -> int:
        n = len(self.states)
        d = np.hypot(self._x[:n] - x, self._y[:n] - y)
        ang = np.abs(self._t[:n] - theta) % (2.0 * math.pi)
        np.minimum(ang, 2.0 * math.pi - ang, out=ang)
        d += self.theta_weight * ang
        if self.object_index is not None and ox is not None:
            d += np.hypot(self._ox[:n] - ox, self._oy[:n] - oy)
        return int(np.argmin(d))

    def extract_plan(self, leaf: int, planning_time: float) -> Plan:
        controls: list[Control] = []
        states: list[SystemState] = []
        i = leaf
        while i >= 0:
            states.append(self.states[i])
            if self.controls[i] is not None:
                controls.append(self.controls[i])
            i = self.parents[i]
        return Plan(tuple(reversed(controls)), tuple(reversed(states)), planning_time)


def _random_control(rng: random.Random, cfg: PlannerConfig) -> Control:
    return Control(
        rng.uniform(-cfg.v_max, cfg.v_max),
        rng.uniform(-cfg.v_max, cfg.v_max),
        rng.uniform(-cfg.omega_max, cfg.omega_max),
        rng.uniform(cfg.t_min, cfg.t_max),
    )


def _steer_control(state: SystemState, target: Pose2, cfg: PlannerConfig) -> Control:
    """Control heading straight for the target pose, clamped to the bounds."""
    dx, dy = target.x - state.robot.x, target.y - state.robot.y
    dist = math.hypot(dx, dy)
    duration = clamp(dist / (0.6 * cfg.v_max), cfg.t_min, cfg.t_max)
    lx, ly = rotate_vector(-state.robot.theta, dx, dy)
    vx = clamp(lx / duration, -cfg.v_max, cfg.v_max)
    vy = clamp(ly / duration, -cfg.v_max, cfg.v_max)
    dtheta = normalize_angle(target.theta - state.robot.theta)
    omega = clamp(dtheta / duration, -cfg.omega_max, cfg.omega_max)
    return Control(vx, vy, omega, duration)


def _goal_object_index(scene: Scene, goal: GoalSpec) -> int | None:
    if isinstance(goal, ObjectToRegion):
        return scene.object_index(goal.object_id)
    return None


def _refine_target(scene: Scene, state: SystemState, goal: GoalSpec, target: Pose2) -> Pose2:
    """Re-anchor a goal-directed target on the expanded state's own object
    positions (objects drift as the tree pushes them around)."""
    if isinstance(goal, ReachGoalObject):
        o = state.objects[scene.goal_index()]
        return _grasp_pose_for(scene, o.x, o.y, target.theta)
    if isinstance(goal, ObjectToRegion):
        # Herd from behind: steer for the pose that would press the object's
        # centroid onto the region center, driving through the contact. Slim
        # objects slide into the mouth and meet the palm; wide ones ride the
        # fingertips.
        idx = scene.object_index(goal.object_id)
        obj = scene.objects[idx]
        o = state.objects[idx]
        cx, cy = goal.centroid
        d = math.hypot(cx - o.x, cy - o.y)
        if d > 1e-9:
            ux, uy = (cx - o.x) / d, (cy - o.y) / d
            offset = _contact_offset(scene.robot, obj.shape, o.theta - math.atan2(uy, ux))
            standoff = enclosing_radius(obj.shape) + offset
            return Pose2(cx - ux * standoff, cy - uy * standoff, math.atan2(uy, ux))
    return target


def _contact_offset(robot, shape, rel_theta: float) -> float:
    """Forward distance from the robot origin to where pushing contact forms:
    the palm for objects whose presented profile slides into the mouth, the
    fingertips otherwise."""
    finger, local = robot.left_finger
    mouth_gap_half = abs(local.y) - finger.half_y
    fingertip = local.x + finger.half_x
    if isinstance(shape, Rectangle):
        c, s = math.cos(rel_theta), math.sin(rel_theta)
        presented = shape.half_x * abs(s) + shape.half_y * abs(c)
    else:
        presented = shape.radius
    return 0.0 if presented < mouth_gap_half else fingertip


def _grasp_pose_for(scene: Scene, ox: float, oy: float, heading: float) -> Pose2:
    """Robot pose whose mouth center lands on (ox, oy) at the given heading."""
    mouth_local = scene.robot.mouth[1]
    mx, my = rotate_vector(heading, mouth_local.x, mouth_local.y)
    return Pose2(ox - mx, oy - my, heading)


def _sample_target(
    scene: Scene,
    q_start: SystemState,
    goal: GoalSpec,
    rng: random.Random,
    goal_directed: bool,
    obj_idx: int | None,
):
    """Returns (target_pose, object_target or None).

    For push goals the object target is the region centroid on goal-directed
    draws, and the start state's object position otherwise (the sampled state
    carries the start's object poses)."""
    w, h = scene.workspace
    if goal_directed:
        if isinstance(goal, RobotPoses):
            return rng.choice(goal.poses), None
        if isinstance(goal, ReachGoalObject):
            gi = scene.goal_index()
            o = q_start.objects[gi]
            heading = rng.uniform(-math.pi, math.pi)
            return _grasp_pose_for(scene, o.x, o.y, heading), None
        o = q_start.objects[obj_idx]
        cx, cy = goal.centroid
        heading = math.atan2(cy - o.y, cx - o.x) if math.hypot(cx - o.x, cy - o.y) > 1e-9 else 0.0
        return Pose2(cx, cy, heading), (cx, cy)
    # Uniform samples specify only a robot pose; the push-goal object term is
    # left out of the nearest-neighbour query for them.
    pose = Pose2(rng.uniform(0.0, w), rng.uniform(0.0, h), rng.uniform(-math.pi, math.pi))
    return pose, None


def _start_checks(scene: Scene, q_start: SystemState, goal: GoalSpec, clock: _BudgetClock):
    if not is_valid(scene, q_start):
        return PlanningFailure("invalid_start", clock.metered)
    if goal_satisfied(scene, q_start, goal):
        return Plan((), (q_start,), clock.metered)
    return None


def _record_call(cfg: PlannerConfig, clock: _BudgetClock) -> None:
    if CALL_RECORDER is not None:
        CALL_RECORDER.append((cfg.time_limit, clock.wall(), clock.metered))


def rrt_plan(scene: Scene, q_start: SystemState, goal: GoalSpec, cfg: PlannerConfig):
    """Kinodynamic RRT: sample a target, extend the nearest node with one
    control, keep valid motions, stop at the first goal-satisfying state."""
    clock = _BudgetClock(cfg.time_limit)
    early = _start_checks(scene, q_start, goal, clock)
    if early is not None:
        _record_call(cfg, clock)
        return early
    rng = random.Random(cfg.seed)
    obj_idx = _goal_object_index(scene, goal)
    tree = _Tree(obj_idx, cfg.nn_theta_weight)
    tree.add(q_start, -1, None)
    n_objects = len(scene.objects)
    dt = (scene.propagation.substep_dt if scene.propagation is not None else 0.01)

    while not clock.expired():
        clock.charge(COST_PER_ITERATION + COST_PER_NN_ENTRY * len(tree))
        goal_directed = rng.random() < cfg.goal_bias
        target, obj_target = _sample_target(scene, q_start, goal, rng, goal_directed, obj_idx)
        ox, oy = (obj_target if obj_target is not None else (None, None))
        near = tree.nearest(target.x, target.y, target.theta, ox, oy)
        near_state = tree.states[near]
        if goal_directed and not isinstance(goal, ReachGoalObject):
            # Pose and push goals are too tight for purely random extensions;
            # bias draws steer straight for the (re-anchored) target.
            control = _steer_control(near_state, _refine_target(scene, near_state, goal, target), cfg)
        else:
            control = _random_control(rng, cfg)
        clock.charge(_propagation_charge(control, dt, n_objects))
        new_state, ok = propagate(scene, near_state, control)
        if not ok:
            continue
        node = tree.add(new_state, near, control)
        if goal_satisfied(scene, new_state, goal):
            plan = tree.extract_plan(node, clock.metered)
            _record_call(cfg, clock)
            return plan
    _record_call(cfg, clock)
    return PlanningFailure("timeout", clock.metered)


class _Cell:
    __slots__ = ("motions", "score", "visits")

    def __init__(self):
        self.motions: list[int] = []
        self.score = 1.0
        self.visits = 0

    def importance(self) -> float:
        return self.score / ((1.0 + self.visits) * len(self.motions))


def kpiece_plan(scene: Scene, q_start: SystemState, goal: GoalSpec, cfg: PlannerConfig):
    """Single-level KPIECE: project states onto a grid, prefer poorly covered
    cells, expand one uniformly chosen motion per iteration with a random
    control, and penalise cells whose expansions fail."""
    clock = _BudgetClock(cfg.time_limit)
    early = _start_checks(scene, q_start, goal, clock)
    if early is not None:
        _record_call(cfg, clock)
        return early
    rng = random.Random(cfg.seed)
    obj_idx = _goal_object_index(scene, goal)
    tree = _Tree(obj_idx, cfg.nn_theta_weight)
    tree.add(q_start, -1, None)
    n_objects = len(scene.objects)
    dt = (scene.propagation.substep_dt if scene.propagation is not None else 0.01)
    size = cfg.kpiece_cell_size

    def project(state: SystemState) -> tuple[int, ...]:
        coords = [math.floor(state.robot.x / size), math.floor(state.robot.y / size)]
        if obj_idx is not None:
            o = state.objects[obj_idx]
            coords.append(math.floor(o.x / size))
            coords.append(math.floor(o.y / size))
        return tuple(coords)

    grid: dict[tuple[int, ...], _Cell] = {}

    def insert(node: int) -> None:
        key = project(tree.states[node])
        cell = grid.get(key)
        if cell is None:
            cell = _Cell()
            grid[key] = cell
        cell.motions.append(node)

    def is_interior(key: tuple[int, ...]) -> bool:
        for axis in range(len(key)):
            for step in (-1, 1):
                nb = key[:axis] + (key[axis] + step,) + key[axis + 1 :]
                if nb not in grid:
                    return False
        return True

    insert(0)

    neighbor_checks = 8 if obj_idx is not None else 4
    while not clock.expired():
        clock.charge(COST_PER_ITERATION + COST_PER_CELL_SCAN * len(grid) * neighbor_checks)
        interior: list[tuple[tuple[int, ...], _Cell]] = []
        exterior: list[tuple[tuple[int, ...], _Cell]] = []
        for key, cell in grid.items():
            (interior if is_interior(key) else exterior).append((key, cell))
        pick_exterior = rng.random() < (1.0 - cfg.kpiece_interior_bias)
        pool = exterior if (pick_exterior and exterior) or not interior else interior
        best_cell = None
        best_imp = -1.0
        for _key, cell in pool:
            imp = cell.importance()
            if imp > best_imp:
                best_imp = imp
                best_cell = cell
        if rng.random() < cfg.goal_bias:
            # Goal-directed expansion: pick the motion nearest to a sampled
            # goal target (charging the scan); pose and push goals also steer
            # the control, the reach goal keeps purely random controls.
            clock.charge(COST_PER_NN_ENTRY * len(tree))
            target, obj_target = _sample_target(scene, q_start, goal, rng, True, obj_idx)
            tox, toy = (obj_target if obj_target is not None else (None, None))
            node = tree.nearest(target.x, target.y, target.theta, tox, toy)
            node_state = tree.states[node]
            if isinstance(goal, ReachGoalObject):
                control = _random_control(rng, cfg)
            else:
                control = _steer_control(node_state, _refine_target(scene, node_state, goal, target), cfg)
            cell = grid[project(node_state)]
            cell.visits += 1
        else:
            cell = best_cell
            cell.visits += 1
            node = cell.motions[rng.randrange(len(cell.motions))]
            control = _random_control(rng, cfg)
        clock.charge(_propagation_charge(control, dt, n_objects))
        new_state, ok = propagate(scene, tree.states[node], control)
        if not ok:
            cell.score *= 0.5
            continue
        child = tree.add(new_state, node, control)
        insert(child)
        if goal_satisfied(scene, new_state, goal):
            plan = tree.extract_plan(child, clock.metered)
            _record_call(cfg, clock)
            return plan
    _record_call(cfg, clock)
    return PlanningFailure("timeout", clock.metered)


PLANNERS = {"rrt": rrt_plan, "kpiece": kpiece_plan}


def replay(scene: Scene, plan: Plan) -> tuple[SystemState, ...]:
    """Re-propagate a plan's controls from its first state."""
    states = [plan.states[0]]
    for control in plan.controls:
        nxt, ok = propagate(scene, states[-1], control)
        if not ok:
            raise ValueError("plan replay hit an invalid motion")
        states.append(nxt)
    return tuple(states)
