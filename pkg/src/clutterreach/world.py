"""Scene description, composite system state, state validity, and the grasp predicate."""

import json
import math
from dataclasses import dataclass, field

from .geometry import (
    Circle,
    Pose2,
    Rectangle,
    Shape,
    compose,
    penetration,
    shapes_overlap,
    world_to_local,
)

WALL_THICKNESS = 0.02
WALL_PENETRATION_TOL = 1e-3
GRASP_FINGER_TOL = 1e-3


@dataclass(frozen=True)
class RobotModel:
    """U-shaped planar gripper: palm at the back, two fingers opening along +x,
    and a mouth region between the finger inner faces."""

    palm: tuple[Rectangle, Pose2]
    left_finger: tuple[Rectangle, Pose2]
    right_finger: tuple[Rectangle, Pose2]
    mouth: tuple[Rectangle, Pose2]

    def body_parts(self) -> tuple[tuple[Rectangle, Pose2], ...]:
        return (self.palm, self.left_finger, self.right_finger)

    @property
    def mouth_depth(self) -> float:
        return 2.0 * self.mouth[0].half_x

    @staticmethod
    def default() -> "RobotModel":
        # Palm 0.10 x 0.02, fingers 0.06 x 0.01, mouth 0.06 x 0.06; 1 mm
        # clearances keep fingers off the palm and the mouth strictly inside
        # the finger gap.
        return RobotModel(
            palm=(Rectangle(0.01, 0.05), Pose2(-0.01, 0.0)),
            left_finger=(Rectangle(0.03, 0.005), Pose2(0.031, 0.036)),
            right_finger=(Rectangle(0.03, 0.005), Pose2(0.031, -0.036)),
            mouth=(Rectangle(0.03, 0.03), Pose2(0.031, 0.0)),
        )


@dataclass(frozen=True)
class SceneObject:
    id: str
    shape: Shape
    pose: Pose2
    goal: bool = False


@dataclass(frozen=True)
class Scene:
    """Immutable workspace description: a shelf open along y = 0, walls on the
    other three sides, a robot model, and the movable objects."""

    workspace: tuple[float, float]
    robot: RobotModel
    robot_start: Pose2
    objects: tuple[SceneObject, ...]
    goal_id: str
    propagation: "object | None" = field(default=None, compare=False)

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("object ids must be unique")
        goals = [o.id for o in self.objects if o.goal]
        if len(goals) != 1 or goals[0] != self.goal_id:
            raise ValueError("scene must have exactly one goal object")

    @property
    def walls(self) -> tuple[tuple[Rectangle, Pose2], ...]:
        w, h = self.workspace
        t = WALL_THICKNESS
        return (
            (Rectangle(0.5 * t, 0.5 * h), Pose2(-0.5 * t, 0.5 * h)),
            (Rectangle(0.5 * t, 0.5 * h), Pose2(w + 0.5 * t, 0.5 * h)),
            (Rectangle(0.5 * w + t, 0.5 * t), Pose2(0.5 * w, h + 0.5 * t)),
        )

    def goal_index(self) -> int:
        for i, o in enumerate(self.objects):
            if o.id == self.goal_id:
                return i
        raise ValueError("goal object missing")

    def object_index(self, object_id: str) -> int:
        for i, o in enumerate(self.objects):
            if o.id == object_id:
                return i
        raise KeyError(object_id)

    def initial_state(self) -> "SystemState":
        return SystemState(self.robot_start, tuple(o.pose for o in self.objects))


@dataclass(frozen=True)
class SystemState:
    """Full configuration: robot pose plus the pose of every movable object."""

    robot: Pose2
    objects: tuple[Pose2, ...]


@dataclass(frozen=True)
class Control:
    """Robot planar velocity command in its own frame, applied for `duration`."""

    vx: float
    vy: float
    omega: float
    duration: float


def footprint_half_width(robot: RobotModel) -> float:
    """Lateral half-extent of the robot body about its local +x axis."""
    width = 0.0
    for shape, local in robot.body_parts():
        c, s = math.cos(local.theta), math.sin(local.theta)
        lateral = shape.half_x * abs(s) + shape.half_y * abs(c)
        width = max(width, abs(local.y) + lateral)
    return width


def robot_body_world(robot: RobotModel, pose: Pose2) -> list[tuple[Rectangle, Pose2]]:
    return [(shape, compose(pose, local)) for shape, local in robot.body_parts()]


def _check_dimensions(scene: Scene, state: SystemState) -> None:
    if len(state.objects) != len(scene.objects):
        raise ValueError(
            f"state has {len(state.objects)} object poses, scene has {len(scene.objects)} objects"
        )


def is_valid(scene: Scene, state: SystemState) -> bool:
    """True iff the robot clears the walls, no object is pressed into a wall
    beyond tolerance, and no object centroid has left the workspace."""
    _check_dimensions(scene, state)
    walls = scene.walls
    for shape, pose in robot_body_world(scene.robot, state.robot):
        for wshape, wpose in walls:
            if shapes_overlap(shape, pose, wshape, wpose):
                return False
    w, h = scene.workspace
    for obj, pose in zip(scene.objects, state.objects):
        if not (0.0 <= pose.x <= w and 0.0 <= pose.y <= h):
            return False
        for wshape, wpose in walls:
            pen = penetration(wshape, wpose, obj.shape, pose)
            if pen is not None and pen[0] > WALL_PENETRATION_TOL:
                return False
    return True


def grasp_achieved(scene: Scene, state: SystemState) -> bool:
    """True iff the goal object's centroid sits in the mouth region and the
    object does not press into either finger beyond tolerance."""
    _check_dimensions(scene, state)
    gi = scene.goal_index()
    goal_obj = scene.objects[gi]
    goal_pose = state.objects[gi]
    mouth_shape, mouth_local = scene.robot.mouth
    mouth_pose = compose(state.robot, mouth_local)
    lx, ly = world_to_local(mouth_pose, goal_pose.x, goal_pose.y)
    if abs(lx) > mouth_shape.half_x or abs(ly) > mouth_shape.half_y:
        return False
    for finger, local in (scene.robot.left_finger, scene.robot.right_finger):
        fpose = compose(state.robot, local)
        pen = penetration(finger, fpose, goal_obj.shape, goal_pose)
        if pen is not None and pen[0] > GRASP_FINGER_TOL:
            return False
    return True


def _shape_to_json(shape: Shape) -> dict:
    if isinstance(shape, Circle):
        return {"type": "circle", "radius": shape.radius}
    return {"type": "rect", "half": [shape.half_x, shape.half_y]}


def _shape_from_json(data: dict) -> Shape:
    if data["type"] == "circle":
        return Circle(float(data["radius"]))
    if data["type"] == "rect":
        half = data["half"]
        return Rectangle(float(half[0]), float(half[1]))
    raise ValueError(f"unknown shape type {data['type']!r}")


def scene_to_json_dict(scene: Scene) -> dict:
    return {
        "workspace": {"width": scene.workspace[0], "height": scene.workspace[1]},
        "robot": {"pose": [scene.robot_start.x, scene.robot_start.y, scene.robot_start.theta]},
        "objects": [
            {
                "id": o.id,
                "shape": _shape_to_json(o.shape),
                "pose": [o.pose.x, o.pose.y, o.pose.theta],
                "goal": o.goal,
            }
            for o in scene.objects
        ],
    }


def scene_to_json(scene: Scene) -> str:
    return json.dumps(scene_to_json_dict(scene), separators=(",", ":"))


def scene_from_json_dict(data: dict) -> Scene:
    ws = data["workspace"]
    rx, ry, rt = data["robot"]["pose"]
    objects = []
    for entry in data["objects"]:
        px, py, pt = entry["pose"]
        objects.append(
            SceneObject(
                id=str(entry["id"]),
                shape=_shape_from_json(entry["shape"]),
                pose=Pose2(float(px), float(py), float(pt)),
                goal=bool(entry.get("goal", False)),
            )
        )
    goals = [o.id for o in objects if o.goal]
    if len(goals) != 1:
        raise ValueError("scene must have exactly one object with goal=true")
    propagation = None
    if "propagation" in data:
        from .physics import PropagationConfig

        propagation = PropagationConfig(**data["propagation"])
    return Scene(
        workspace=(float(ws["width"]), float(ws["height"])),
        robot=RobotModel.default(),
        robot_start=Pose2(float(rx), float(ry), float(rt)),
        objects=tuple(objects),
        goal_id=goals[0],
        propagation=propagation,
    )


def scene_from_json(text: str) -> Scene:
    return scene_from_json_dict(json.loads(text))


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_json(fh.read())


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scene_to_json(scene))
        fh.write("\n")


def state_to_json_dict(state: SystemState) -> dict:
    return {
        "robot": [state.robot.x, state.robot.y, state.robot.theta],
        "objects": [[p.x, p.y, p.theta] for p in state.objects],
    }


def state_from_json_dict(data: dict) -> SystemState:
    return SystemState(
        Pose2(*[float(v) for v in data["robot"]]),
        tuple(Pose2(*[float(v) for v in row]) for row in data["objects"]),
    )
