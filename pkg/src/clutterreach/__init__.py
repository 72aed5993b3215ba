"""Planar pushing simulator, kinodynamic planners, and the guided
reaching-through-clutter stack built on top of them."""

from .geometry import Circle, Circle2, Pose2, Rectangle, SweptVolume
from .guided import (
    ExecutionLog,
    GuidanceProvider,
    GuidedConfig,
    Push,
    ReachGoal,
    run_guided,
    scripted_guidance,
)
from .planners import (
    GoalSpec,
    ObjectToRegion,
    Plan,
    PlannerConfig,
    PlanningFailure,
    ReachGoalObject,
    RobotPoses,
    kpiece_plan,
    rrt_plan,
)
from .physics import PropagationConfig, propagate
from .world import Control, RobotModel, Scene, SceneObject, SystemState

__all__ = [
    "Circle",
    "Circle2",
    "Control",
    "ExecutionLog",
    "GoalSpec",
    "GuidanceProvider",
    "GuidedConfig",
    "ObjectToRegion",
    "Plan",
    "PlannerConfig",
    "PlanningFailure",
    "Pose2",
    "PropagationConfig",
    "Push",
    "ReachGoal",
    "ReachGoalObject",
    "Rectangle",
    "RobotModel",
    "RobotPoses",
    "Scene",
    "SceneObject",
    "SweptVolume",
    "SystemState",
    "kpiece_plan",
    "propagate",
    "rrt_plan",
    "run_guided",
    "scripted_guidance",
]
