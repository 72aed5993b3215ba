"""Benchmark harness: per-scene trials for the raw planners and the guided
variants, streamed CSV records, and summary statistics with 95% CIs."""

import csv
import math
import random
from dataclasses import dataclass, replace

from .geometry import Pose2, Rectangle, enclosing_radius
from .guided import (
    ApproachInfeasible,
    ExecutionLog,
    GuidedConfig,
    HighLevelAction,
    Push,
    ReachGoal,
    compute_approach_states,
    derive_seed,
    plan_push_segment,
    plan_reach,
    run_guided,
    scripted_guidance,
)
from .heuristic import (
    HeuristicGuidance,
    first_blocking_obstacle,
    probe_swept_volume,
    sample_placement,
)
from .planners import Plan, PlannerConfig, PlanningFailure
from .world import Scene, SystemState, footprint_half_width, grasp_achieved, is_valid

APPROACHES = ("rrt", "kpiece", "grtc-heuristic", "grtc-scripted")

CSV_COLUMNS = (
    "scene_id",
    "approach",
    "seed",
    "success",
    "planning_time",
    "guidance_time",
    "proposed_actions",
    "successful_actions",
)


@dataclass(frozen=True)
class TrialRecord:
    scene_id: str
    approach: str
    seed: int
    success: bool
    planning_time: float
    guidance_time: float
    proposed_actions: int
    successful_actions: int

    def to_row(self) -> list[str]:
        return [
            self.scene_id,
            self.approach,
            str(self.seed),
            "true" if self.success else "false",
            repr(self.planning_time),
            repr(self.guidance_time),
            str(self.proposed_actions),
            str(self.successful_actions),
        ]

    @staticmethod
    def from_row(row: dict) -> "TrialRecord":
        return TrialRecord(
            scene_id=row["scene_id"],
            approach=row["approach"],
            seed=int(row["seed"]),
            success=row["success"] == "true",
            planning_time=float(row["planning_time"]),
            guidance_time=float(row["guidance_time"]),
            proposed_actions=int(row["proposed_actions"]),
            successful_actions=int(row["successful_actions"]),
        )


class OracleGuidance:
    """Stands in for the human operator in benchmarks: reacts to the current
    state like the console operator would, picking the first blocking obstacle
    and a well-scored nearby placement that clears the corridor. Its think
    time is not charged (operator time is accounted separately)."""

    def __init__(self, scene: Scene, seed: int, candidates: int = 64, max_pushes: int = 8):
        self.guidance_time = 0.0
        self._scene = scene
        self._rng = random.Random(derive_seed(seed, 101))
        self._candidates = candidates
        self._pushes_left = max_pushes

    def next_high_level_action(self, state: SystemState) -> HighLevelAction | None:
        # Operators judge blockage along the standard approach lane from the
        # shelf front, not from wherever the robot parked after its last push.
        scene = self._scene
        if self._pushes_left <= 0:
            return ReachGoal()
        lane_state = SystemState(scene.robot_start, state.objects)
        blocker = first_blocking_obstacle(scene, lane_state)
        if blocker is None:
            return ReachGoal()
        volume = probe_swept_volume(scene, lane_state)
        best = None
        best_score = -math.inf
        for _ in range(self._candidates):
            placement = sample_placement(scene, state, volume, blocker, self._rng)
            if placement is None:
                break
            score = self._score_placement(state, volume, blocker, placement)
            if score > best_score:
                best_score = score
                best = placement
        if best is None or best_score < -4.0:
            # Nothing workable this round; a retry re-samples next call.
            self._pushes_left -= 1
            return None
        self._pushes_left -= 1
        return Push(blocker, best)

    def _score_placement(self, state, volume, blocker, placement) -> float:
        """Operator-style preferences: a short push whose slim profile clears
        the lane, pushed along a soft-clear path, with a valid and roomy
        forward approach pose behind the object."""
        scene = self._scene
        idx = scene.object_index(blocker)
        obj = scene.objects[idx]
        opose = state.objects[idx]
        if isinstance(obj.shape, Rectangle):
            obj_slim = min(obj.shape.half_x, obj.shape.half_y)
        else:
            obj_slim = obj.shape.radius
        obj_radius = enclosing_radius(obj.shape)
        lane_half = footprint_half_width(scene.robot)
        x, y = placement
        score = -math.hypot(x - opose.x, y - opose.y)

        ax, ay = volume.start
        bx, by = volume.end
        seg_len2 = (bx - ax) ** 2 + (by - ay) ** 2
        if seg_len2 > 1e-18:
            t = max(0.0, min(1.0, ((x - ax) * (bx - ax) + (y - ay) * (by - ay)) / seg_len2))
            corridor_d = math.hypot(x - (ax + t * (bx - ax)), y - (ay + t * (by - ay)))
            if corridor_d - lane_half - obj_slim < 0.01:
                score -= 10.0

        # Soft penalty for clutter along the push path.
        px, py = opose.x, opose.y
        path_len2 = (x - px) ** 2 + (y - py) ** 2
        for j, p in enumerate(state.objects):
            if j == idx or path_len2 < 1e-18:
                continue
            t = max(0.0, min(1.0, ((p.x - px) * (x - px) + (p.y - py) * (y - py)) / path_len2))
            d = math.hypot(p.x - (px + t * (x - px)), p.y - (py + t * (y - py)))
            blocked_by = enclosing_radius(scene.objects[j].shape) + obj_slim - d
            if blocked_by > 0.0:
                score -= 3.0 * blocked_by

        # Mirror what the push pipeline will face: no approach pose is a dead
        # action; a missing forward pose leaves the harder side approach.
        try:
            poses = compute_approach_states(scene, state, blocker, placement)
        except (ApproachInfeasible, ValueError):
            return score - 5.0
        d = math.hypot(px - x, py - y)
        standoff = obj_radius + scene.robot.mouth_depth + 0.01
        ux, uy = (px - x) / d, (py - y) / d
        fwd = Pose2(px + ux * standoff, py + uy * standoff, math.atan2(-uy, -ux))
        has_forward = any(
            math.hypot(p.x - fwd.x, p.y - fwd.y) < 1e-9 for p in poses
        )
        if not has_forward:
            score -= 0.5
        best_clear = max(
            min(
                (
                    math.hypot(ap.x - p.x, ap.y - p.y)
                    for j, p in enumerate(state.objects)
                    if j != idx
                ),
                default=1.0,
            )
            for ap in poses
        )
        score += 0.6 * min(best_clear, 0.12)
        return score


def _raw_planner_trial(
    scene: Scene, approach: str, seed: int, gcfg: GuidedConfig, pcfg: PlannerConfig
) -> ExecutionLog:
    # Guidance that immediately proposes reaching reduces the framework to a
    # single kinodynamic planning call from q0.
    return run_guided(
        scene,
        scene.initial_state(),
        scripted_guidance([ReachGoal()]),
        replace(gcfg, seed=seed),
        pcfg,
        planner=approach,
    )


def _scripted_scene_trials(
    scene_id: str,
    scene: Scene,
    trials: int,
    base_seed: int,
    gcfg: GuidedConfig,
    pcfg: PlannerConfig,
    planner: str,
    collector: "list | None",
) -> list[TrialRecord]:
    """Mirror of the operator protocol: guidance applied once per scene, then
    the final reach is attempted `trials` times from the post-guidance state,
    each with the full overall budget. Per-trial planning_time covers that
    trial's reach call; the guidance phase has its own overall allotment."""
    q0 = scene.initial_state()
    phase_gcfg = replace(gcfg, seed=base_seed)
    q_current = q0
    push_spent = 0.0
    proposed = 0
    successful = 0
    seed_counter = 0
    guidance = OracleGuidance(scene, base_seed)
    no_action_strikes = 0
    while push_spent < gcfg.t_overall:
        action = guidance.next_high_level_action(q_current)
        if action is None:
            no_action_strikes += 1
            if no_action_strikes >= 5:
                break
            continue
        if isinstance(action, ReachGoal):
            proposed += 1
            break
        proposed += 1
        segment, spent, seed_counter = plan_push_segment(
            scene,
            q_current,
            action,
            phase_gcfg,
            pcfg,
            planner,
            seed_counter,
            gcfg.t_overall - push_spent,
        )
        push_spent += spent
        if collector is not None:
            collector.append(("segment", scene_id, segment))
        if segment.executed():
            q_current = segment.state_after
            successful += 1

    records = []
    reach_budget = gcfg.t_overall
    for t in range(trials):
        seed = base_seed + t
        result = plan_reach(scene, q_current, pcfg, planner, derive_seed(seed, 9000), reach_budget)
        if isinstance(result, PlanningFailure):
            reach_time = reach_budget if result.reason == "timeout" else result.elapsed
            success = False
        else:
            reach_time = result.planning_time
            success = grasp_achieved(scene, result.states[-1])
            if collector is not None:
                collector.append(("plan", scene_id, result))
        records.append(
            TrialRecord(
                scene_id=scene_id,
                approach="grtc-scripted",
                seed=seed,
                success=success,
                planning_time=reach_time,
                guidance_time=guidance.guidance_time,
                proposed_actions=proposed,
                successful_actions=successful,
            )
        )
    return records


def run_benchmark(
    scenes: list[tuple[str, Scene]],
    approaches: list[str],
    trials_per_scene: int,
    base_seed: int,
    gcfg: GuidedConfig,
    pcfg: PlannerConfig,
    planner: str = "rrt",
    collector: list | None = None,
    on_record=None,
) -> list[TrialRecord]:
    """Run each (scene, approach) pair trials_per_scene times with seeds
    base_seed + trial index. `collector`, when given, accumulates the produced
    ExecutionLogs/plans for post-hoc checks; `on_record` streams records out
    as they are produced."""
    if trials_per_scene < 1:
        raise ValueError("trials_per_scene must be at least 1")
    for approach in approaches:
        if approach not in APPROACHES:
            raise ValueError(f"unknown approach {approach!r}")
    records: list[TrialRecord] = []

    def emit(record: TrialRecord):
        records.append(record)
        if on_record is not None:
            on_record(record)

    for scene_id, scene in scenes:
        for approach in approaches:
            if approach == "grtc-scripted":
                for record in _scripted_scene_trials(
                    scene_id, scene, trials_per_scene, base_seed, gcfg, pcfg, planner, collector
                ):
                    emit(record)
                continue
            for t in range(trials_per_scene):
                seed = base_seed + t
                if approach in ("rrt", "kpiece"):
                    log = _raw_planner_trial(scene, approach, seed, gcfg, pcfg)
                else:  # grtc-heuristic
                    provider = HeuristicGuidance(scene, seed=seed)
                    log = run_guided(
                        scene,
                        scene.initial_state(),
                        provider,
                        replace(gcfg, seed=seed),
                        pcfg,
                        planner=planner,
                    )
                if collector is not None:
                    collector.append(("log", scene_id, log))
                emit(
                    TrialRecord(
                        scene_id=scene_id,
                        approach=approach,
                        seed=seed,
                        success=log.success,
                        planning_time=log.planning_time,
                        guidance_time=log.guidance_time,
                        proposed_actions=log.proposed_actions,
                        successful_actions=log.successful_actions,
                    )
                )
    return records


def write_csv(records: list[TrialRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.to_row())


def read_csv(path) -> list[TrialRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return [TrialRecord.from_row(row) for row in csv.DictReader(fh)]


_METRICS = ("planning_time", "guidance_time", "proposed_actions", "successful_actions")


def _stats_block(records: list[TrialRecord]) -> dict:
    n = len(records)
    block = {
        "n": n,
        "success_rate": sum(r.success for r in records) / n,
        "metrics": {},
    }
    for metric in _METRICS:
        values = [float(getattr(r, metric)) for r in records]
        mean = sum(values) / n
        if n > 1:
            var = sum((v - mean) ** 2 for v in values) / (n - 1)
            std = math.sqrt(var)
        else:
            std = 0.0
        block["metrics"][metric] = {
            "mean": mean,
            "std": std,
            "ci95": 1.96 * std / math.sqrt(n),
        }
    return block


def summarize(records: list[TrialRecord]) -> dict:
    """Per-approach success rate plus mean/std/95% CI of every timing and
    count metric, overall and per scene."""
    if not records:
        raise ValueError("summarize requires at least one record")
    ordered = sorted(records, key=lambda r: (r.scene_id, r.approach, r.seed))
    approaches = sorted({r.approach for r in ordered})
    scene_ids = sorted({r.scene_id for r in ordered})
    out = {"overall": {}, "per_scene": {}}
    for approach in approaches:
        subset = [r for r in ordered if r.approach == approach]
        out["overall"][approach] = _stats_block(subset)
    for scene_id in scene_ids:
        out["per_scene"][scene_id] = {}
        for approach in approaches:
            subset = [r for r in ordered if r.scene_id == scene_id and r.approach == approach]
            if subset:
                out["per_scene"][scene_id][approach] = _stats_block(subset)
    return out


def verify_push_postconditions(
    collector: list, scenes: dict[str, Scene], region_diameter: float
) -> list[str]:
    """Check every successfully executed push left its object inside the
    commanded region; returns human-readable violations (empty when clean)."""
    problems = []
    for kind, scene_id, payload in collector:
        if kind == "log":
            segments = [s for s in payload.segments if s.executed()]
        elif kind == "segment" and payload.executed():
            segments = [payload]
        else:
            continue
        scene = scenes[scene_id]
        for seg in segments:
            action = seg.action
            if not isinstance(action, Push):
                continue
            final = seg.push_plan.states[-1]
            pose = final.objects[scene.object_index(action.object_id)]
            dist = math.hypot(pose.x - action.centroid[0], pose.y - action.centroid[1])
            if dist > 0.5 * region_diameter + 1e-9:
                problems.append(
                    f"{scene_id}: push of {action.object_id} ended "
                    f"{dist:.4f} m from the commanded centroid"
                )
    return problems
