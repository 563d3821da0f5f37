"""Hierarchical episode loop.

Each step the agent observes detector confidences at its cell, smooths them
into a semantic vector and buffers it.  Every `replan_period` steps (and once
before moving) the buffered evidence is OR-folded into relation observations,
the belief graph is updated, and a fresh concept plan picks the next
sub-goal for the locomotion policy.  Baseline modes reuse the same loop with
the planning stage stubbed out.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import locomotion as loco
from .concepts import SemanticVector, SmoothingFilter, bit_or, extract_observations
from .graph import RelationGraph, plan
from .house import (
    Cell,
    DetectorModel,
    EpisodeConfig,
    House,
    STAY,
    GroundTruthRelations,
    step,
    validate_episode,
)

MODE_BRM = "brm"
MODE_PURE = "pure"
MODE_RANDOM = "random"
MODE_UNIFORM_PRIOR = "brm_uniform_prior"
MODE_OPTIMAL_PLANNER = "optimal_planner"
MODES = (MODE_BRM, MODE_PURE, MODE_RANDOM, MODE_UNIFORM_PRIOR, MODE_OPTIMAL_PLANNER)

TERMINATION_ENV = "environment"
TERMINATION_SELF = "self"

# Consecutive in-target positions required for environment-checked success,
# and consecutive target detections required before a self-stop.
SUCCESS_DWELL = 3
SELF_STOP_STREAK = 3

# An optimal-planner path that dips below this joint belief necessarily
# crossed a relation absent from the ground truth; fall back to pursuing the
# final target directly.
_GT_SCORE_FLOOR = 1e-6

# A newly proposed sub-goal must beat a path through the committed one by
# this factor before the agent switches.
_COMMIT_RATIO = 0.5

# Posterior stand-ins for true/absent relations when planning on a boolean
# ground-truth graph.
GT_TRUE_BELIEF = 1.0 - 1e-9
GT_FALSE_BELIEF = 1e-9


@dataclass(frozen=True)
class AgentConfig:
    mode: str = MODE_BRM
    replan_period: int = 10
    horizon: int = 300
    termination: str = TERMINATION_ENV

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown agent mode {self.mode!r}")
        if not 1 <= self.replan_period <= self.horizon:
            raise ValueError("need 1 <= replan_period <= horizon")
        if self.termination not in (TERMINATION_ENV, TERMINATION_SELF):
            raise ValueError(f"unknown termination mode {self.termination!r}")

    @property
    def uses_graph(self) -> bool:
        return self.mode in (MODE_BRM, MODE_UNIFORM_PRIOR, MODE_OPTIMAL_PLANNER)


@dataclass
class EpisodeResult:
    success: bool
    steps_taken: int
    plan_distance_bucket: int
    trajectory: list[Cell]
    subgoal_log: list[tuple[int, int]] = field(default_factory=list)


def _through_score(graph: RelationGraph, source, first: int, target: int) -> float:
    """Best joint belief of reaching the target via `first` as the next hop.

    Falls to zero quickly for sub-goals the evidence keeps contradicting, so
    commitment to them breaks within a few windows.
    """
    entries = [graph.posterior(s, first) for s in source.set_indices() if s != first]
    entry = max(entries) if entries else 1.0
    if entry < 0.01:
        return 0.0
    if first == target:
        return entry
    bits = [0] * graph.node_count
    bits[first] = 1
    tail = plan(graph, SemanticVector(tuple(bits)), target)
    return entry * tail.score


def _navigable_subgoal(house: House, p, cell: Cell, target: int, sight: int) -> int:
    """Plan hop the locomotion can make real progress on right now.

    Skips the unknown node (not a navigable region) and concepts whose region
    the agent is already inside, then telescopes to the furthest remaining
    waypoint already within sight; pursuing an earlier hop the agent can
    already see past just wastes steps.
    """
    unknown = house.vocabulary.unknown_index
    flat = house.flat(cell)
    pending = []
    for concept in p.path[1:] if len(p.path) >= 2 else p.path:
        if concept == unknown:
            continue
        if concept != target and house.distance_field(concept)[flat] == 0:
            continue
        pending.append(concept)
    if not pending:
        return target
    chosen = pending[0]
    for concept in pending[1:]:
        if house.distance_field(concept)[flat] <= sight:
            chosen = concept
    return chosen


def ground_truth_graph(
    vocabulary, gt: GroundTruthRelations, obs_noise: tuple[float, float]
) -> RelationGraph:
    """Fixed belief graph standing in for a perfectly known environment."""
    n = vocabulary.node_count
    priors = [
        GT_TRUE_BELIEF if gt.adjacency[i][j] else GT_FALSE_BELIEF
        for i in range(n)
        for j in range(i + 1, n)
    ]
    return RelationGraph(vocabulary, priors, obs_noise)


def run_episode(
    house: House,
    episode: EpisodeConfig,
    agent: AgentConfig,
    graph: RelationGraph | None,
    locomotion_spec: loco.LocomotionSpec,
    detector: DetectorModel,
    plan_distance_bucket: int = -1,
    trace_sink: list | None = None,
) -> EpisodeResult:
    """Run one seeded episode and report its outcome.

    The caller's graph is never mutated: graph-driven modes work on a copy
    with observation counts reset, so episodes share no posterior state.
    """
    validate_episode(house, episode)
    rng = random.Random(episode.rng_seed)
    horizon = agent.horizon
    period = agent.replan_period
    k = house.vocabulary.size
    target = episode.target

    episode_graph: RelationGraph | None = None
    if agent.uses_graph:
        if graph is None:
            raise ValueError(f"mode {agent.mode!r} needs a relation graph")
        episode_graph = graph.copy()
        episode_graph.reset_episode()

    smoother = SmoothingFilter(k)
    buffer = []
    visits = [0] * (house.width * house.height)
    cell = episode.start_cell
    trajectory = [cell]
    visits[house.flat(cell)] += 1
    subgoal = target
    subgoal_log: list[tuple[int, int]] = []
    self_streak = 0
    dwell = 0
    success = False
    steps_taken = 0
    last_named = None

    def replan(t: int, current) -> None:
        nonlocal subgoal
        if episode_graph is not None:
            evidence = bit_or(buffer)
            observations = extract_observations(evidence)
            if agent.mode != MODE_OPTIMAL_PLANNER:
                episode_graph.update(observations)
            buffer.clear()
            # Plan from the latest confident fix: a momentary detector
            # dropout (unknown-only vector) should not reroute the plan
            # through the unknown node when the agent's whereabouts are
            # still known from a recent detection.
            source = current
            if current.bits[-1] and last_named is not None:
                source = last_named
            p = plan(episode_graph, source, target)
            if agent.mode == MODE_OPTIMAL_PLANNER and p.score < _GT_SCORE_FLOOR:
                subgoal = target
            else:
                proposed = _navigable_subgoal(
                    house, p, cell, target, locomotion_spec.sight_radius
                )
                # Commit to the current sub-goal under near-ties: switching
                # between equally believable alternatives every window makes
                # the agent oscillate without making progress.
                if (
                    proposed != subgoal
                    and subgoal != target
                    and house.distance_field(subgoal)[house.flat(cell)] > 0
                    and _through_score(episode_graph, source, subgoal, target)
                    >= _COMMIT_RATIO * p.score
                ):
                    proposed = subgoal
                subgoal = proposed
        else:
            subgoal = target
        subgoal_log.append((t, subgoal))
        if trace_sink is not None:
            entry: dict = {"t": t, "subgoal": subgoal}
            if episode_graph is not None:
                entry["plan"] = list(p.path)
                entry["score"] = p.score
                entry["posterior"] = episode_graph.posterior_matrix()
                entry["counts"] = {
                    "pos": list(episode_graph._pos),
                    "neg": list(episode_graph._neg),
                }
            trace_sink.append({"replan": entry})

    # Initial observation of the start cell (a stay step), then the
    # prior-driven plan the agent acts on before any evidence arrives.
    cell, confidence = step(house, cell, STAY, detector, rng)
    current = smoother.push(confidence)
    if not current.unknown:
        last_named = current
    buffer.append(current)
    if trace_sink is not None:
        trace_sink.append({"t": 0, "cell": list(cell), "semantic": list(current.bits)})
    replan(0, current)

    for t in range(1, horizon + 1):
        if agent.mode == MODE_RANDOM:
            action = rng.randrange(5)
        else:
            action = loco.act(locomotion_spec, house, cell, subgoal, rng, visits)
        cell, confidence = step(house, cell, action, detector, rng)
        visits[house.flat(cell)] += 1
        current = smoother.push(confidence)
        if not current.unknown:
            last_named = current
        buffer.append(current)
        trajectory.append(cell)
        steps_taken = t
        if trace_sink is not None:
            trace_sink.append({"t": t, "cell": list(cell), "semantic": list(current.bits)})

        in_target = house.concept_at(cell) == target
        if agent.termination == TERMINATION_ENV:
            dwell = dwell + 1 if in_target else 0
            if dwell >= SUCCESS_DWELL:
                success = True
                break
        else:
            self_streak = self_streak + 1 if current.bits[target] else 0
            if self_streak >= SELF_STOP_STREAK:
                success = in_target
                break

        if agent.uses_graph and t % period == 0 and t < horizon:
            replan(t, current)

    return EpisodeResult(
        success=success,
        steps_taken=steps_taken,
        plan_distance_bucket=plan_distance_bucket,
        trajectory=trajectory,
        subgoal_log=subgoal_log,
    )
