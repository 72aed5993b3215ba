"""SE(2) pose algebra, convex shape primitives, collision predicates, and swept footprints."""

import math
from dataclasses import dataclass

_TWO_PI = 2.0 * math.pi

# Gap below which two shapes are considered touching.
CONTACT_EPS = 1e-9


def clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def normalize_angle(theta: float) -> float:
    """Wrap an angle to the canonical interval (-pi, pi]."""
    t = math.fmod(theta, _TWO_PI)
    if t <= -math.pi:
        t += _TWO_PI
    elif t > math.pi:
        t -= _TWO_PI
    return t


def angle_difference(a: float, b: float) -> float:
    """Magnitude of the shortest rotation taking b onto a, in [0, pi]."""
    return abs(normalize_angle(a - b))


@dataclass(frozen=True)
class Pose2:
    """Planar pose (x, y, theta); theta is kept in (-pi, pi]."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))


def compose(a: Pose2, b: Pose2) -> Pose2:
    """SE(2) composition a * b (apply b in the frame of a)."""
    c, s = math.cos(a.theta), math.sin(a.theta)
    return Pose2(a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, a.theta + b.theta)


def inverse(a: Pose2) -> Pose2:
    """SE(2) inverse: compose(a, inverse(a)) is the identity."""
    c, s = math.cos(a.theta), math.sin(a.theta)
    return Pose2(-(c * a.x + s * a.y), -(-s * a.x + c * a.y), -a.theta)


def transform_point(pose: Pose2, px: float, py: float) -> tuple[float, float]:
    """Map a point from the pose's local frame into the world frame."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return (pose.x + c * px - s * py, pose.y + s * px + c * py)


def world_to_local(pose: Pose2, px: float, py: float) -> tuple[float, float]:
    """Map a world point into the pose's local frame."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    dx, dy = px - pose.x, py - pose.y
    return (c * dx + s * dy, -s * dx + c * dy)


def rotate_vector(theta: float, vx: float, vy: float) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    return (c * vx - s * vy, s * vx + c * vy)


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned box in its local frame, given by half-extents."""

    half_x: float
    half_y: float

    def __post_init__(self):
        if self.half_x <= 0.0 or self.half_y <= 0.0:
            raise ValueError("rectangle half-extents must be positive")


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("circle radius must be positive")


Shape = Rectangle | Circle


@dataclass(frozen=True)
class Circle2:
    """A circle placed in the world: (center, radius)."""

    center: tuple[float, float]
    radius: float


def enclosing_radius(shape: Shape) -> float:
    if isinstance(shape, Circle):
        return shape.radius
    return math.hypot(shape.half_x, shape.half_y)


def min_enclosing_circle(shape: Shape, pose: Pose2) -> Circle2:
    """Smallest circle containing the posed shape; centered on the pose position."""
    return Circle2((pose.x, pose.y), enclosing_radius(shape))


def rect_corners(rect: Rectangle, pose: Pose2) -> list[tuple[float, float]]:
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    hx, hy = rect.half_x, rect.half_y
    return [
        (pose.x + c * sx * hx - s * sy * hy, pose.y + s * sx * hx + c * sy * hy)
        for sx, sy in ((1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0))
    ]


def point_in_shape(shape: Shape, pose: Pose2, px: float, py: float) -> bool:
    if isinstance(shape, Circle):
        return math.hypot(px - pose.x, py - pose.y) <= shape.radius
    lx, ly = world_to_local(pose, px, py)
    return abs(lx) <= shape.half_x and abs(ly) <= shape.half_y


def _rects_overlap(ra: Rectangle, pa: Pose2, rb: Rectangle, pb: Pose2, tol: float) -> bool:
    ca, sa = math.cos(pa.theta), math.sin(pa.theta)
    cb, sb = math.cos(pb.theta), math.sin(pb.theta)
    ua, va = (ca, sa), (-sa, ca)
    ub, vb = (cb, sb), (-sb, cb)
    dx, dy = pb.x - pa.x, pb.y - pa.y
    for nx, ny in (ua, va, ub, vb):
        proj_a = ra.half_x * abs(nx * ua[0] + ny * ua[1]) + ra.half_y * abs(nx * va[0] + ny * va[1])
        proj_b = rb.half_x * abs(nx * ub[0] + ny * ub[1]) + rb.half_y * abs(nx * vb[0] + ny * vb[1])
        if abs(nx * dx + ny * dy) - (proj_a + proj_b) > tol:
            return False
    return True


def shapes_overlap(sa: Shape, pa: Pose2, sb: Shape, pb: Pose2, tol: float = CONTACT_EPS) -> bool:
    """True iff the posed shapes intersect or come within `tol` of touching."""
    if isinstance(sa, Circle) and isinstance(sb, Circle):
        return math.hypot(pb.x - pa.x, pb.y - pa.y) <= sa.radius + sb.radius + tol
    if isinstance(sa, Rectangle) and isinstance(sb, Rectangle):
        return _rects_overlap(sa, pa, sb, pb, tol)
    if isinstance(sa, Rectangle):
        rect, rect_pose, circ, circ_pose = sa, pa, sb, pb
    else:
        rect, rect_pose, circ, circ_pose = sb, pb, sa, pa
    lx, ly = world_to_local(rect_pose, circ_pose.x, circ_pose.y)
    qx = clamp(lx, -rect.half_x, rect.half_x)
    qy = clamp(ly, -rect.half_y, rect.half_y)
    return math.hypot(lx - qx, ly - qy) <= circ.radius + tol


def penetration(sa: Shape, pa: Pose2, sb: Shape, pb: Pose2):
    """Minimum-translation vector pushing shape b out of shape a.

    Returns (depth, nx, ny) with depth > 0 and (nx, ny) the unit direction to
    translate b, or None when the shapes do not overlap with positive depth.
    """
    if isinstance(sa, Circle) and isinstance(sb, Circle):
        dx, dy = pb.x - pa.x, pb.y - pa.y
        d = math.hypot(dx, dy)
        depth = sa.radius + sb.radius - d
        if depth <= 0.0:
            return None
        if d < 1e-12:
            return (depth, 1.0, 0.0)
        return (depth, dx / d, dy / d)
    if isinstance(sa, Rectangle) and isinstance(sb, Rectangle):
        return _rect_rect_penetration(sa, pa, sb, pb)
    if isinstance(sa, Rectangle):
        res = _rect_circle_penetration(sa, pa, sb, pb)
        return res
    res = _rect_circle_penetration(sb, pb, sa, pa)
    if res is None:
        return None
    depth, nx, ny = res
    return (depth, -nx, -ny)


def _rect_circle_penetration(rect: Rectangle, rp: Pose2, circ: Circle, cp: Pose2):
    lx, ly = world_to_local(rp, cp.x, cp.y)
    hx, hy = rect.half_x, rect.half_y
    if abs(lx) <= hx and abs(ly) <= hy:
        # Center inside the box: push out through the nearest face.
        push_x = hx - abs(lx)
        push_y = hy - abs(ly)
        if push_x <= push_y:
            n_local = (1.0 if lx >= 0.0 else -1.0, 0.0)
            depth = push_x + circ.radius
        else:
            n_local = (0.0, 1.0 if ly >= 0.0 else -1.0)
            depth = push_y + circ.radius
        nx, ny = rotate_vector(rp.theta, n_local[0], n_local[1])
        return (depth, nx, ny)
    qx = clamp(lx, -hx, hx)
    qy = clamp(ly, -hy, hy)
    ex, ey = lx - qx, ly - qy
    d = math.hypot(ex, ey)
    depth = circ.radius - d
    if depth <= 0.0:
        return None
    nx, ny = rotate_vector(rp.theta, ex / d, ey / d)
    return (depth, nx, ny)


def _rect_rect_penetration(ra: Rectangle, pa: Pose2, rb: Rectangle, pb: Pose2):
    ca, sa = math.cos(pa.theta), math.sin(pa.theta)
    cb, sb = math.cos(pb.theta), math.sin(pb.theta)
    ua, va = (ca, sa), (-sa, ca)
    ub, vb = (cb, sb), (-sb, cb)
    dx, dy = pb.x - pa.x, pb.y - pa.y
    best_depth = math.inf
    best_axis = None
    for nx, ny in (ua, va, ub, vb):
        proj_a = ra.half_x * abs(nx * ua[0] + ny * ua[1]) + ra.half_y * abs(nx * va[0] + ny * va[1])
        proj_b = rb.half_x * abs(nx * ub[0] + ny * ub[1]) + rb.half_y * abs(nx * vb[0] + ny * vb[1])
        overlap = proj_a + proj_b - abs(nx * dx + ny * dy)
        if overlap <= 0.0:
            return None
        if overlap < best_depth:
            best_depth = overlap
            best_axis = (nx, ny)
    nx, ny = best_axis
    if nx * dx + ny * dy < 0.0:
        nx, ny = -nx, -ny
    return (best_depth, nx, ny)


def _point_segment_distance(px, py, ax, ay, bx, by) -> float:
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = clamp(((px - ax) * dx + (py - ay) * dy) / l2, 0.0, 1.0)
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    def orient(ox, oy, px, py, qx, qy):
        return (px - ox) * (qy - oy) - (py - oy) * (qx - ox)

    d1 = orient(ax, ay, bx, by, cx, cy)
    d2 = orient(ax, ay, bx, by, dx, dy)
    d3 = orient(cx, cy, dx, dy, ax, ay)
    d4 = orient(cx, cy, dx, dy, bx, by)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def _segment_segment_distance(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    if _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    return min(
        _point_segment_distance(ax, ay, cx, cy, dx, dy),
        _point_segment_distance(bx, by, cx, cy, dx, dy),
        _point_segment_distance(cx, cy, ax, ay, bx, by),
        _point_segment_distance(dx, dy, ax, ay, bx, by),
    )


def shape_distance(sa: Shape, pa: Pose2, sb: Shape, pb: Pose2) -> float:
    """Euclidean separation between two posed shapes; 0 when they overlap."""
    if isinstance(sa, Circle) and isinstance(sb, Circle):
        return max(0.0, math.hypot(pb.x - pa.x, pb.y - pa.y) - sa.radius - sb.radius)
    if isinstance(sa, Rectangle) and isinstance(sb, Rectangle):
        if _rects_overlap(sa, pa, sb, pb, 0.0):
            return 0.0
        pa_corners = rect_corners(sa, pa)
        pb_corners = rect_corners(sb, pb)
        best = math.inf
        for i in range(4):
            axi, ayi = pa_corners[i]
            bxi, byi = pa_corners[(i + 1) % 4]
            for j in range(4):
                cxj, cyj = pb_corners[j]
                dxj, dyj = pb_corners[(j + 1) % 4]
                d = _segment_segment_distance(axi, ayi, bxi, byi, cxj, cyj, dxj, dyj)
                if d < best:
                    best = d
        return best
    if isinstance(sa, Rectangle):
        rect, rect_pose, circ, circ_pose = sa, pa, sb, pb
    else:
        rect, rect_pose, circ, circ_pose = sb, pb, sa, pa
    lx, ly = world_to_local(rect_pose, circ_pose.x, circ_pose.y)
    qx = clamp(lx, -rect.half_x, rect.half_x)
    qy = clamp(ly, -rect.half_y, rect.half_y)
    return max(0.0, math.hypot(lx - qx, ly - qy) - circ.radius)


def point_to_shape_distance(px: float, py: float, shape: Shape, pose: Pose2) -> float:
    """Distance from a point to a posed shape; 0 when the point is inside."""
    if isinstance(shape, Circle):
        return max(0.0, math.hypot(px - pose.x, py - pose.y) - shape.radius)
    lx, ly = world_to_local(pose, px, py)
    qx = clamp(lx, -shape.half_x, shape.half_x)
    qy = clamp(ly, -shape.half_y, shape.half_y)
    return math.hypot(lx - qx, ly - qy)


@dataclass(frozen=True)
class SweptVolume:
    """Footprint (a list of body parts in the carrier's local frame) translated
    along a straight segment at a fixed heading."""

    parts: tuple[tuple[Shape, Pose2], ...]
    start: tuple[float, float]
    end: tuple[float, float]
    heading: float


def _part_world_pose(v: SweptVolume, local: Pose2, t: float) -> Pose2:
    x = v.start[0] + t * (v.end[0] - v.start[0])
    y = v.start[1] + t * (v.end[1] - v.start[1])
    return compose(Pose2(x, y, v.heading), local)


def swept_contains(v: SweptVolume, point: tuple[float, float]) -> bool:
    """True iff the point lies inside the footprint at some t in [0, 1]."""
    px, py = point
    sx, sy = v.start
    mx, my = v.end[0] - sx, v.end[1] - sy
    for shape, local in v.parts:
        p0 = _part_world_pose(v, local, 0.0)
        if isinstance(shape, Circle):
            p1 = _part_world_pose(v, local, 1.0)
            if _point_segment_distance(px, py, p0.x, p0.y, p1.x, p1.y) <= shape.radius:
                return True
            continue
        # Rectangle at fixed heading: membership over t reduces to an interval
        # intersection in the part's local frame.
        c, s = math.cos(p0.theta), math.sin(p0.theta)
        lx = c * (px - p0.x) + s * (py - p0.y)
        ly = -s * (px - p0.x) + c * (py - p0.y)
        dx = c * mx + s * my
        dy = -s * mx + c * my
        lo, hi = 0.0, 1.0
        feasible = True
        for coord, delta, half in ((lx, dx, shape.half_x), (ly, dy, shape.half_y)):
            if abs(delta) < 1e-15:
                if abs(coord) > half:
                    feasible = False
                    break
                continue
            t0 = (coord - half) / delta
            t1 = (coord + half) / delta
            if t0 > t1:
                t0, t1 = t1, t0
            lo = max(lo, t0)
            hi = min(hi, t1)
            if lo > hi:
                feasible = False
                break
        if feasible and lo <= hi:
            return True
    return False


def swept_first_contact(v: SweptVolume, shape: Shape, pose: Pose2) -> float | None:
    """Smallest t in [0, 1] at which the moving footprint touches the posed shape.

    The separation between a straight-translating convex part and a fixed convex
    shape is convex in t, so the contact interval boundary is found by a
    ternary-search minimum followed by bisection.
    """
    best = None
    for part_shape, local in v.parts:
        t = _part_first_contact(v, part_shape, local, shape, pose)
        if t is not None and (best is None or t < best):
            best = t
    return best


def _part_first_contact(v, part_shape, local, shape, pose):
    def dist(t: float) -> float:
        return shape_distance(part_shape, _part_world_pose(v, local, t), shape, pose)

    if dist(0.0) <= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(80):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if dist(m1) <= dist(m2):
            hi = m2
        else:
            lo = m1
    t_min = 0.5 * (lo + hi)
    if dist(t_min) > 0.0:
        return None
    lo, hi = 0.0, t_min
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if dist(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi
