"""Deterministic quasi-static planar pushing propagator.

Objects have no momentum: they move only while something presses into them,
by penetration projection along minimum-translation vectors, with a
single-parameter rotational response about their centroid.
"""

import math
from dataclasses import dataclass

from .geometry import (
    Circle,
    Pose2,
    clamp,
    enclosing_radius,
    normalize_angle,
    penetration,
    rotate_vector,
    shapes_overlap,
    world_to_local,
)
from .world import Control, Scene, SystemState, _check_dimensions


@dataclass(frozen=True)
class PropagationConfig:
    substep_dt: float = 0.01
    max_resolution_iterations: int = 32
    penetration_tolerance: float = 1e-3
    rotation_gain: float = 1.0

    def __post_init__(self):
        if self.substep_dt <= 0.0 or self.penetration_tolerance <= 0.0:
            raise ValueError("substep_dt and penetration_tolerance must be positive")


DEFAULT_CONFIG = PropagationConfig()


def _contact_lever(obj_shape, ox, oy, otheta, push_cx, push_cy):
    """Lever arm from the object centroid to the effective contact point.

    The pusher center is clamped into the object's local box (circles are
    symmetric and take no torque); symmetric pushes give a zero lever.
    """
    if isinstance(obj_shape, Circle):
        return (0.0, 0.0)
    lx, ly = world_to_local(Pose2(ox, oy, otheta), push_cx, push_cy)
    qx = clamp(lx, -obj_shape.half_x, obj_shape.half_x)
    qy = clamp(ly, -obj_shape.half_y, obj_shape.half_y)
    return rotate_vector(otheta, qx, qy)


def propagate(
    scene: Scene, state: SystemState, control: Control, cfg: PropagationConfig | None = None
) -> tuple[SystemState, bool]:
    """Integrate a robot velocity command and resolve pushing contacts.

    Returns (final state, valid). When the motion turns invalid mid-control
    (robot hits a wall, an object is crushed against a wall or the robot, or
    an object drops out of the open edge), the state of the last completed
    substep is returned with valid=False.
    """
    _check_dimensions(scene, state)
    if cfg is None:
        cfg = scene.propagation if scene.propagation is not None else DEFAULT_CONFIG
    for v in (control.vx, control.vy, control.omega, control.duration):
        if not math.isfinite(v):
            raise ValueError("control values must be finite")
    if control.duration < 0.0:
        raise ValueError("control duration must be non-negative")

    tol = cfg.penetration_tolerance
    slop = 0.5 * tol
    width, height = scene.workspace
    walls = scene.walls
    parts = [(shape, local, enclosing_radius(shape)) for shape, local in scene.robot.body_parts()]
    n = len(scene.objects)
    shapes = [o.shape for o in scene.objects]
    radii = [enclosing_radius(s) for s in shapes]

    rx, ry, rtheta = state.robot.x, state.robot.y, state.robot.theta
    poses = [[p.x, p.y, p.theta] for p in state.objects]
    moved = [False] * n

    prev_r = (rx, ry, rtheta)
    prev_poses = [(p.x, p.y, p.theta) for p in state.objects]
    prev_moved = list(moved)

    def build_state(r, pose_rows, moved_flags) -> SystemState:
        return SystemState(
            Pose2(r[0], r[1], r[2]),
            tuple(
                Pose2(*pose_rows[i]) if moved_flags[i] else state.objects[i]
                for i in range(n)
            ),
        )

    n_full = int(control.duration / cfg.substep_dt)
    steps = [cfg.substep_dt] * n_full
    rem = control.duration - n_full * cfg.substep_dt
    if rem > 1e-12:
        steps.append(rem)

    robot_reach = max(math.hypot(local.x, local.y) + r for _, local, r in parts)
    max_iters = cfg.max_resolution_iterations

    for dt in steps:
        c, s = math.cos(rtheta), math.sin(rtheta)
        rx += (c * control.vx - s * control.vy) * dt
        ry += (s * control.vx + c * control.vy) * dt
        rtheta = normalize_angle(rtheta + control.omega * dt)

        c, s = math.cos(rtheta), math.sin(rtheta)
        parts_world = []
        for shape, local, pradius in parts:
            px = rx + c * local.x - s * local.y
            py = ry + s * local.x + c * local.y
            parts_world.append((shape, Pose2(px, py, rtheta + local.theta), px, py, pradius))

        # Robot/wall contact invalidates the motion; skip the narrow test when
        # the whole body is clearly inside the open region.
        if not (robot_reach < rx < width - robot_reach and ry < height - robot_reach):
            hit = False
            for wshape, wpose in walls:
                for pshape, ppose, _, _, _ in parts_world:
                    if shapes_overlap(pshape, ppose, wshape, wpose):
                        hit = True
                        break
                if hit:
                    break
            if hit:
                return build_state(prev_r, prev_poses, prev_moved), False

        # Resolve contacts, nearest objects first so pushes chain outward.
        order = sorted(range(n), key=lambda i: (math.hypot(poses[i][0] - rx, poses[i][1] - ry), i))
        rank = {idx: k for k, idx in enumerate(order)}
        touched = set()
        converged = False
        for _ in range(max_iters):
            any_moved = False
            for idx in order:
                row = poses[idx]
                ox, oy, otheta = row
                obj_shape = shapes[idx]
                obj_radius = radii[idx]
                reach = obj_radius + tol

                pushers = []
                if math.hypot(ox - rx, oy - ry) <= robot_reach + reach:
                    for pshape, ppose, px, py, pradius in parts_world:
                        if math.hypot(ox - px, oy - py) <= pradius + reach:
                            pushers.append((pshape, ppose, px, py))
                my_rank = rank[idx]
                for jdx in order:
                    if rank[jdx] >= my_rank:
                        break
                    jx, jy, jtheta = poses[jdx]
                    if math.hypot(ox - jx, oy - jy) <= radii[jdx] + reach:
                        pushers.append((shapes[jdx], Pose2(jx, jy, jtheta), jx, jy))
                if not pushers:
                    continue

                obj_pose = Pose2(ox, oy, otheta)
                for pshape, ppose, px, py in pushers:
                    pen = penetration(pshape, ppose, obj_shape, obj_pose)
                    if pen is None or pen[0] <= tol:
                        continue
                    depth, nx, ny = pen
                    shift = depth - slop
                    mx, my = nx * shift, ny * shift
                    lever = _contact_lever(obj_shape, ox, oy, otheta, px, py)
                    ox += mx
                    oy += my
                    if lever != (0.0, 0.0):
                        torque = lever[0] * my - lever[1] * mx
                        otheta = normalize_angle(
                            otheta + cfg.rotation_gain * torque / (obj_radius * obj_radius)
                        )
                    # Walls absorb the normal component of the correction.
                    if not (obj_radius < ox < width - obj_radius and oy < height - obj_radius):
                        for wshape, wpose in walls:
                            wpen = penetration(wshape, wpose, obj_shape, Pose2(ox, oy, otheta))
                            if wpen is not None and wpen[0] > tol:
                                wdepth, wnx, wny = wpen
                                ox += wnx * (wdepth - slop)
                                oy += wny * (wdepth - slop)
                    obj_pose = Pose2(ox, oy, otheta)
                    any_moved = True
                    touched.add(idx)
                    moved[idx] = True
                row[0], row[1], row[2] = ox, oy, otheta
            if not any_moved:
                converged = True
                break

        if not converged:
            # Residual penetration above tolerance means something is crushed.
            ok = True
            for idx in order:
                obj_pose = Pose2(*poses[idx])
                for pshape, ppose, _, _, _ in parts_world:
                    pen = penetration(pshape, ppose, shapes[idx], obj_pose)
                    if pen is not None and pen[0] > tol * (1.0 + 1e-6):
                        ok = False
                        break
                if not ok:
                    break
                for jdx in order:
                    if rank[jdx] >= rank[idx]:
                        continue
                    pen = penetration(shapes[jdx], Pose2(*poses[jdx]), shapes[idx], obj_pose)
                    if pen is not None and pen[0] > tol * (1.0 + 1e-6):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                return build_state(prev_r, prev_poses, prev_moved), False

        for idx in sorted(touched):
            ox, oy, otheta = poses[idx]
            if not (0.0 <= ox <= width and 0.0 <= oy <= height):
                return build_state(prev_r, prev_poses, prev_moved), False
            obj_radius = radii[idx]
            if not (obj_radius < ox < width - obj_radius and oy < height - obj_radius):
                obj_pose = Pose2(ox, oy, otheta)
                for wshape, wpose in walls:
                    pen = penetration(wshape, wpose, shapes[idx], obj_pose)
                    if pen is not None and pen[0] > tol * (1.0 + 1e-6):
                        return build_state(prev_r, prev_poses, prev_moved), False

        prev_r = (rx, ry, rtheta)
        if touched:
            prev_poses = [tuple(p) for p in poses]
            prev_moved = list(moved)

    return build_state(prev_r, prev_poses, prev_moved), True
