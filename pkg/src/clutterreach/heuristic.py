"""Straight-line guidance: probe the robot footprint toward the goal object,
pick the first blocking obstacle, and propose pushing it to a collision-free
spot outside the swept corridor."""

import math
import random

from .geometry import (
    Pose2,
    SweptVolume,
    enclosing_radius,
    shapes_overlap,
    swept_contains,
    swept_first_contact,
)
from .guided import GuidanceProvider, HighLevelAction, Push, ReachGoal
from .world import Scene, SystemState

MAX_PLACEMENT_SAMPLES = 1000

# Deterministic guidance clock (seconds charged per unit of work), so that
# recorded guidance times are reproducible across runs.
COST_PER_SWEEP_OBJECT = 700e-6
COST_PER_PLACEMENT_SAMPLE = 30e-6


def probe_swept_volume(scene: Scene, state: SystemState) -> SweptVolume | None:
    """Robot footprint translated from its position to the goal centroid, at a
    fixed heading along the segment. None when the robot already sits on the
    goal centroid."""
    gi = scene.goal_index()
    goal_pose = state.objects[gi]
    rx, ry = state.robot.x, state.robot.y
    dx, dy = goal_pose.x - rx, goal_pose.y - ry
    if math.hypot(dx, dy) < 1e-9:
        return None
    heading = math.atan2(dy, dx)
    return SweptVolume(
        parts=tuple(scene.robot.body_parts()),
        start=(rx, ry),
        end=(goal_pose.x, goal_pose.y),
        heading=heading,
    )


def first_blocking_obstacle(scene: Scene, state: SystemState) -> str | None:
    """Id of the non-goal object the probing footprint touches first, or None
    when the straight-line corridor to the goal object is clear."""
    volume = probe_swept_volume(scene, state)
    if volume is None:
        return None
    best_t = None
    best_id = None
    for obj, pose in zip(scene.objects, state.objects):
        if obj.goal:
            continue
        t = swept_first_contact(volume, obj.shape, pose)
        if t is not None and (best_t is None or t < best_t):
            best_t = t
            best_id = obj.id
    return best_id


def _sample_placement_counted(
    scene: Scene,
    state: SystemState,
    volume: SweptVolume,
    object_id: str,
    rng: random.Random,
) -> tuple[tuple[float, float] | None, int]:
    idx = scene.object_index(object_id)
    obj = scene.objects[idx]
    radius = enclosing_radius(obj.shape)
    w, h = scene.workspace
    lo_x, hi_x = radius, w - radius
    lo_y, hi_y = radius, h - radius
    if lo_x >= hi_x or lo_y >= hi_y:
        return None, 0
    theta = state.objects[idx].theta
    for attempt in range(1, MAX_PLACEMENT_SAMPLES + 1):
        x = rng.uniform(lo_x, hi_x)
        y = rng.uniform(lo_y, hi_y)
        if swept_contains(volume, (x, y)):
            continue
        candidate = Pose2(x, y, theta)
        clear = True
        for j, (other, other_pose) in enumerate(zip(scene.objects, state.objects)):
            if j == idx:
                continue
            if shapes_overlap(obj.shape, candidate, other.shape, other_pose):
                clear = False
                break
        if clear:
            return (x, y), attempt
    return None, MAX_PLACEMENT_SAMPLES


def sample_placement(
    scene: Scene,
    state: SystemState,
    volume: SweptVolume,
    object_id: str,
    rng: random.Random,
) -> tuple[float, float] | None:
    """Rejection-sample a centroid for the object (orientation unchanged) that
    clears walls and other objects and lies outside the swept corridor.
    Returns None after the sample cap."""
    placement, _ = _sample_placement_counted(scene, state, volume, object_id, rng)
    return placement


class HeuristicGuidance(GuidanceProvider):
    """Provider wrapping the straight-line probe; one fresh sweep per call."""

    def __init__(self, scene: Scene, seed: int = 0):
        self.guidance_time = 0.0
        self._scene = scene
        self._rng = random.Random(seed)

    def next_high_level_action(self, state: SystemState) -> HighLevelAction | None:
        scene = self._scene
        self.guidance_time += COST_PER_SWEEP_OBJECT * max(1, len(scene.objects))
        blocker = first_blocking_obstacle(scene, state)
        if blocker is None:
            return ReachGoal()
        volume = probe_swept_volume(scene, state)
        placement, samples = _sample_placement_counted(
            scene, state, volume, blocker, self._rng
        )
        self.guidance_time += COST_PER_PLACEMENT_SAMPLE * samples
        if placement is None:
            return None
        return Push(blocker, placement)


def heuristic_guidance(scene: Scene, seed: int = 0) -> HeuristicGuidance:
    return HeuristicGuidance(scene, seed)
