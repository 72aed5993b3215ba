"""Random scene generation plus the hand-built regression scenes."""

import math
import random

from .geometry import Circle, Pose2, Rectangle, Shape, enclosing_radius, shapes_overlap
from .world import RobotModel, Scene, SceneObject, robot_body_world

MAX_REJECTIONS = 100_000

# Obstacles mix boxes and cylinders; the goal object is a cylinder small
# enough to fit the default gripper mouth, so every scene is solvable.
OBSTACLE_RECT_HALF = (0.015, 0.045)
OBSTACLE_CIRCLE_RADIUS = (0.015, 0.035)
GOAL_CIRCLE_RADIUS = (0.015, 0.025)


class PackingError(Exception):
    """The workspace is too crowded to place all objects."""


def _start_pose(workspace: tuple[float, float]) -> Pose2:
    # Centered at the open edge, facing the back wall.
    return Pose2(workspace[0] / 2.0, 0.0, math.pi / 2.0)


def generate_scene(
    n_objects: int,
    seed: int,
    workspace: tuple[float, float] = (0.6, 0.4),
    obstacle_rect_half: tuple[float, float] = OBSTACLE_RECT_HALF,
    obstacle_circle_radius: tuple[float, float] = OBSTACLE_CIRCLE_RADIUS,
    goal_circle_radius: tuple[float, float] = GOAL_CIRCLE_RADIUS,
) -> Scene:
    """Place a goal object in the rear half of the workspace and n_objects - 1
    obstacles uniformly at random, rejection-sampling until nothing overlaps
    anything else, a wall, or the robot's start footprint."""
    if n_objects < 1:
        raise ValueError("n_objects must be at least 1")
    rng = random.Random(seed)
    w, h = workspace
    robot = RobotModel.default()
    start = _start_pose(workspace)
    robot_parts = robot_body_world(robot, start)

    placed: list[tuple[Shape, Pose2]] = []
    objects: list[SceneObject] = []
    rejections = 0

    def try_place(shape: Shape, rear_half: bool) -> Pose2:
        nonlocal rejections
        radius = enclosing_radius(shape)
        lo_y = max(radius, h / 2.0) if rear_half else radius
        while True:
            x = rng.uniform(radius, w - radius)
            y = rng.uniform(lo_y, h - radius)
            theta = rng.uniform(-math.pi, math.pi) if isinstance(shape, Rectangle) else 0.0
            pose = Pose2(x, y, theta)
            ok = all(
                not shapes_overlap(shape, pose, other_shape, other_pose)
                for other_shape, other_pose in placed
            ) and all(
                not shapes_overlap(shape, pose, pshape, ppose)
                for pshape, ppose in robot_parts
            )
            if ok:
                return pose
            rejections += 1
            if rejections > MAX_REJECTIONS:
                raise PackingError(f"could not pack {n_objects} objects after {rejections} tries")

    goal_shape = Circle(rng.uniform(*goal_circle_radius))
    goal_pose = try_place(goal_shape, rear_half=True)
    placed.append((goal_shape, goal_pose))
    objects.append(SceneObject("o1", goal_shape, goal_pose, goal=True))

    for i in range(2, n_objects + 1):
        if rng.random() < 0.5:
            shape: Shape = Rectangle(
                rng.uniform(*obstacle_rect_half), rng.uniform(*obstacle_rect_half)
            )
        else:
            shape = Circle(rng.uniform(*obstacle_circle_radius))
        pose = try_place(shape, rear_half=False)
        placed.append((shape, pose))
        objects.append(SceneObject(f"o{i}", shape, pose))

    return Scene(
        workspace=workspace,
        robot=robot,
        robot_start=start,
        objects=tuple(objects),
        goal_id="o1",
    )


def make_empty_scene(workspace: tuple[float, float] = (0.6, 0.4)) -> Scene:
    """Only the goal object, mid-shelf: the corridor to it is clear."""
    goal = SceneObject("o1", Circle(0.02), Pose2(0.30, 0.28), goal=True)
    return Scene(
        workspace=workspace,
        robot=RobotModel.default(),
        robot_start=_start_pose(workspace),
        objects=(goal,),
        goal_id="o1",
    )


def make_blocked_scene(workspace: tuple[float, float] = (0.6, 0.4)) -> Scene:
    """Goal object deep at the back wall with a wide obstacle tight in front
    of it: shoving the blocker forward crushes it into the goal and the wall,
    so the corridor must first be cleared sideways. Flankers pinch the
    detours and mid-field clutter makes blind approaches noisy."""
    objects = (
        SceneObject("o1", Circle(0.02), Pose2(0.30, 0.35), goal=True),
        SceneObject("o2", Rectangle(0.055, 0.025), Pose2(0.30, 0.285)),
        SceneObject("o3", Rectangle(0.04, 0.03), Pose2(0.13, 0.33)),
        SceneObject("o4", Rectangle(0.04, 0.03), Pose2(0.47, 0.33)),
        SceneObject("o5", Circle(0.028), Pose2(0.19, 0.20)),
        SceneObject("o6", Circle(0.028), Pose2(0.41, 0.20)),
        SceneObject("o7", Rectangle(0.03, 0.02), Pose2(0.13, 0.11, 0.5)),
        SceneObject("o8", Rectangle(0.03, 0.02), Pose2(0.47, 0.11, -0.5)),
    )
    return Scene(
        workspace=workspace,
        robot=RobotModel.default(),
        robot_start=_start_pose(workspace),
        objects=objects,
        goal_id="o1",
    )
