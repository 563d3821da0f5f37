"""Goal-conditioned low-level policies.

Three flavours: a uniform-random baseline, a scripted imperfect goal-seeker
(greedy on the BFS distance field when the sub-goal region is within sight,
frontier-biased exploration otherwise, with a per-step slip probability),
and an exact oracle (scripted with unlimited sight and no slip).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .house import Cell, House, UNREACHED

RANDOM = "random"
SCRIPTED = "scripted"
ORACLE = "oracle"
KINDS = (RANDOM, SCRIPTED, ORACLE)

DEFAULT_SIGHT_RADIUS = 16
DEFAULT_SLIP = 0.2


@dataclass(frozen=True)
class LocomotionSpec:
    kind: str = SCRIPTED
    sight_radius: int = DEFAULT_SIGHT_RADIUS
    slip: float = DEFAULT_SLIP

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown locomotion kind {self.kind!r}")
        if self.sight_radius < 1:
            raise ValueError("sight_radius must be >= 1")
        if not 0.0 <= self.slip < 1.0:
            raise ValueError("slip must be in [0, 1)")


ORACLE_SPEC = LocomotionSpec(kind=ORACLE)


def act(
    spec: LocomotionSpec,
    house: House,
    agent_cell: Cell,
    subgoal: int,
    rng: random.Random,
    visit_counts: list[int],
) -> int:
    """Pick the next action towards the sub-goal concept.

    `visit_counts` holds this episode's per-cell visit tally (owned by the
    episode runner) and drives the frontier bias when the sub-goal region is
    out of sight.  Deterministic given the rng state and the counts.
    """
    if spec.kind == RANDOM:
        return rng.randrange(5)

    flat = house.flat(agent_cell)
    field = house.distance_field(subgoal)
    if spec.kind == ORACLE:
        sight, slip = UNREACHED - 1, 0.0
    else:
        sight, slip = spec.sight_radius, spec.slip

    table = house.step_table
    base = flat * 5
    if field[flat] <= sight:
        if slip > 0.0 and rng.random() < slip:
            return rng.randrange(5)
        # First step of a BFS path: any strictly closer neighbor, in fixed
        # action order; inside the region (distance 0) the agent stays.
        best_action = 4
        best_dist = field[flat]
        for a in range(4):
            d = field[table[base + a]]
            if d < best_dist:
                best_dist = d
                best_action = a
        return best_action

    # Sub-goal out of sight (or absent): frontier-biased exploration towards
    # the least-visited reachable cell, random among ties.
    best = -1
    ties: list[int] = []
    for a in range(5):
        count = visit_counts[table[base + a]]
        if best < 0 or count < best:
            best = count
            ties = [a]
        elif count == best:
            ties.append(a)
    return ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]
