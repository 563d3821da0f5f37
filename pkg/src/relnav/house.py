"""Procedural grid-embedded house environments.

Houses are generated by binary space partition into rectangular rooms, each
assigned a concept (room type) by an affinity-weighted sampler so that
co-location statistics are learnable.  Movement uses a 4-neighborhood plus
stay; room boundaries block unless a door crosses them.  A parametric noisy
detector replaces visual perception, and reachability ground truth is
estimated by seeded random walks.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .concepts import ConceptVocabulary, ConfidenceVector, SemanticVector

UP, DOWN, LEFT, RIGHT, STAY = range(5)
ACTIONS = (UP, DOWN, LEFT, RIGHT, STAY)
ACTION_NAMES = ("up", "down", "left", "right", "stay")
_DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0), (0, 0))

WALL = -1
UNREACHED = 1 << 30

# Dwell steps added on top of the grid distance: an episode succeeds only
# after three consecutive in-target positions, so a perfect run needs two
# extra steps after entering the room.
DWELL_STEPS = 2

EXPLORATION_BUDGET = 300
EXPLORATION_TRIALS = 50

# Heading turn probability of the exploration walk; lower values give more
# ballistic, further-reaching walks.
WALK_TURN_PROB = 0.15

Cell = tuple[int, int]


@dataclass(frozen=True)
class Room:
    id: int
    concept: int
    cells: tuple[Cell, ...]


@dataclass(frozen=True)
class HouseParams:
    width: int = 100
    height: int = 28
    min_room: int = 8
    extra_door_prob: float = 0.20
    door_width: int = 4

    def __post_init__(self) -> None:
        if self.width < 3 * self.min_room or self.height < 3 * self.min_room:
            raise ValueError("degenerate layout: grid must be at least 3x min_room per side")
        if self.min_room < 1:
            raise ValueError("min_room must be positive")
        if not 0.0 <= self.extra_door_prob <= 1.0:
            raise ValueError("extra_door_prob must be in [0, 1]")
        if self.door_width < 1:
            raise ValueError("door_width must be >= 1")


class House:
    """Immutable room layout with doors and lazily built movement tables."""

    def __init__(
        self,
        width: int,
        height: int,
        rooms: Sequence[Room],
        doors: Iterable[tuple[Cell, Cell]],
        vocabulary: ConceptVocabulary,
        seed: int | None = None,
    ) -> None:
        self.width = width
        self.height = height
        self.rooms = tuple(rooms)
        self.doors = tuple(sorted(tuple(sorted(d)) for d in doors))
        self.vocabulary = vocabulary
        self.seed = seed

        self._cells = [WALL] * (width * height)
        for room in self.rooms:
            for x, y in room.cells:
                if not (0 <= x < width and 0 <= y < height):
                    raise ValueError(f"room {room.id} cell {(x, y)} outside grid")
                idx = y * width + x
                if self._cells[idx] != WALL:
                    raise ValueError(f"cell {(x, y)} belongs to more than one room")
                self._cells[idx] = room.id
        self._room_concept = [r.concept for r in self.rooms]
        for c in self._room_concept:
            if not 0 <= c < vocabulary.size:
                raise ValueError(f"room concept {c} outside vocabulary")
        self._cell_concept = [
            self._room_concept[r] if r >= 0 else WALL for r in self._cells
        ]
        self._door_pairs: set[tuple[int, int]] = set()
        for a, b in self.doors:
            fa, fb = self.flat(a), self.flat(b)
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ValueError(f"door {a}-{b} endpoints are not adjacent")
            if self._cells[fa] == WALL or self._cells[fb] == WALL:
                raise ValueError(f"door {a}-{b} touches a wall cell")
            if self._cells[fa] == self._cells[fb]:
                raise ValueError(f"door {a}-{b} does not cross a room boundary")
            self._door_pairs.add((fa, fb))
            self._door_pairs.add((fb, fa))
        self._check_connected()
        self._step_to: list[int] | None = None
        self._dist_fields: dict[int, list[int]] = {}

    # -- basic geometry ----------------------------------------------------

    def flat(self, cell: Cell) -> int:
        return cell[1] * self.width + cell[0]

    def xy(self, flat: int) -> Cell:
        return (flat % self.width, flat // self.width)

    def room_at(self, cell: Cell) -> int:
        return self._cells[self.flat(cell)]

    def concept_at(self, cell: Cell) -> int:
        """Concept of the room containing `cell` (WALL for wall cells)."""
        return self._cell_concept[self.flat(cell)]

    @property
    def concepts_present(self) -> frozenset[int]:
        return frozenset(self._room_concept)

    def rooms_of_concept(self, concept: int) -> tuple[Room, ...]:
        return tuple(r for r in self.rooms if r.concept == concept)

    def cells_of_concept(self, concept: int) -> list[int]:
        return [i for i, c in enumerate(self._cell_concept) if c == concept]

    def _check_connected(self) -> None:
        if not self.rooms:
            raise ValueError("house has no rooms")
        adj: dict[int, set[int]] = {r.id: set() for r in self.rooms}
        for fa, fb in self._door_pairs:
            adj[self._cells[fa]].add(self._cells[fb])
        seen = {self.rooms[0].id}
        queue = deque(seen)
        while queue:
            r = queue.popleft()
            for s in adj[r]:
                if s not in seen:
                    seen.add(s)
                    queue.append(s)
        if len(seen) != len(self.rooms):
            raise ValueError("room graph is not connected")

    # -- movement ----------------------------------------------------------

    @property
    def step_table(self) -> list[int]:
        """Flat movement table: step_table[cell*5+action] -> destination cell."""
        if self._step_to is None:
            w, h = self.width, self.height
            table = [0] * (w * h * 5)
            cells = self._cells
            doors = self._door_pairs
            for y in range(h):
                for x in range(w):
                    c = y * w + x
                    rid = cells[c]
                    for a, (dx, dy) in enumerate(_DELTAS):
                        nx_, ny_ = x + dx, y + dy
                        dest = c
                        if rid != WALL and 0 <= nx_ < w and 0 <= ny_ < h:
                            n = ny_ * w + nx_
                            nrid = cells[n]
                            if nrid != WALL and (nrid == rid or (c, n) in doors):
                                dest = n
                        table[c * 5 + a] = dest
            self._step_to = table
        return self._step_to

    def move(self, cell: Cell, action: int) -> Cell:
        """One lattice step; blocked moves leave the agent in place."""
        return self.xy(self.step_table[self.flat(cell) * 5 + action])

    def distance_field(self, concept: int) -> list[int]:
        """Grid distance from every cell to the nearest cell of `concept`.

        Cached multi-source BFS along legal moves; UNREACHED marks cells with
        no path (or an absent concept).
        """
        field = self._dist_fields.get(concept)
        if field is None:
            table = self.step_table
            field = [UNREACHED] * (self.width * self.height)
            queue = deque()
            for c in self.cells_of_concept(concept):
                field[c] = 0
                queue.append(c)
            while queue:
                c = queue.popleft()
                d = field[c] + 1
                base = c * 5
                for a in range(4):
                    n = table[base + a]
                    if field[n] > d:
                        field[n] = d
                        queue.append(n)
            self._dist_fields[concept] = field
        return field

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        obj = {
            "width": self.width,
            "height": self.height,
            "rooms": [
                {"id": r.id, "concept": r.concept, "cells": [list(c) for c in r.cells]}
                for r in self.rooms
            ],
            "doors": [[list(a), list(b)] for a, b in self.doors],
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str, vocabulary: ConceptVocabulary, seed: int | None = None) -> "House":
        obj = json.loads(text)
        rooms = tuple(
            Room(r["id"], r["concept"], tuple((x, y) for x, y in r["cells"]))
            for r in obj["rooms"]
        )
        doors = tuple(((a[0], a[1]), (b[0], b[1])) for a, b in obj["doors"])
        return cls(obj["width"], obj["height"], rooms, doors, vocabulary, seed=seed)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, House):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.rooms == other.rooms
            and self.doors == other.doors
            and self.vocabulary == other.vocabulary
        )


# -- generation --------------------------------------------------------------

# Room types follow a canonical spatial sequence (street side through the
# private quarters); adjacency affinity falls off with distance in that
# sequence.  The outer segments are nearly deterministic (garages sit by the
# outdoors and the kitchen, bathrooms deep inside by the bedrooms) while the
# middle of the house (dining, living, office) shuffles freely, so part of
# every layout is predictable from type statistics and part must be
# discovered.  Indices follow DEFAULT_CONCEPTS.
_CANONICAL_ORDER = (7, 6, 0, 2, 1, 5, 3, 4)
_CHAIN_EDGE_AFFINITY = (50.0, 50.0, 50.0, 50.0, 50.0, 50.0, 50.0)
_GAP_AFFINITY = {2: 1.0, 3: 0.3}
_FAR_AFFINITY = 0.1


def _affinity(k: int, a: int, b: int) -> float:
    if a >= k or b >= k or a == b:
        return 1.0
    pa, pb = _CANONICAL_ORDER.index(a), _CANONICAL_ORDER.index(b)
    gap = abs(pa - pb)
    if gap == 1:
        return _CHAIN_EDGE_AFFINITY[min(pa, pb)]
    return _GAP_AFFINITY.get(gap, _FAR_AFFINITY)


@dataclass(frozen=True)
class _Rect:
    x: int
    y: int
    w: int
    h: int


def _bsp_split(rect: _Rect, min_room: int, rng: random.Random) -> list[_Rect]:
    """Recursively split until no side can host two min_room-wide halves."""
    can_v = rect.w >= 2 * min_room
    can_h = rect.h >= 2 * min_room
    if not can_v and not can_h:
        return [rect]
    if can_v and can_h:
        vertical = rng.random() < (rect.w / (rect.w + rect.h))
    else:
        vertical = can_v
    if vertical:
        cut = rng.randint(min_room, rect.w - min_room)
        parts = [_Rect(rect.x, rect.y, cut, rect.h), _Rect(rect.x + cut, rect.y, rect.w - cut, rect.h)]
    else:
        cut = rng.randint(min_room, rect.h - min_room)
        parts = [_Rect(rect.x, rect.y, rect.w, cut), _Rect(rect.x, rect.y + cut, rect.w, rect.h - cut)]
    out: list[_Rect] = []
    for part in parts:
        out.extend(_bsp_split(part, min_room, rng))
    return out


def _shared_boundary(a: _Rect, b: _Rect) -> list[tuple[Cell, Cell]]:
    """Cell pairs straddling the shared edge of two touching rectangles."""
    pairs: list[tuple[Cell, Cell]] = []
    if a.x + a.w == b.x:  # a left of b
        lo, hi = max(a.y, b.y), min(a.y + a.h, b.y + b.h)
        pairs = [((a.x + a.w - 1, y), (b.x, y)) for y in range(lo, hi)]
    elif b.x + b.w == a.x:
        return _shared_boundary(b, a)
    elif a.y + a.h == b.y:  # a above b
        lo, hi = max(a.x, b.x), min(a.x + a.w, b.x + b.w)
        pairs = [((x, a.y + a.h - 1), (x, b.y)) for x in range(lo, hi)]
    elif b.y + b.h == a.y:
        return _shared_boundary(b, a)
    return pairs


def _slab_zones(rects: list[_Rect], n_zones: int, rng: random.Random) -> list[int]:
    """Partition rooms into contiguous zones by sweeping across the grid.

    Rooms are ordered by centre along the house's long axis and cut into
    `n_zones` runs of roughly equal size, so each zone forms a slab the way
    functional areas succeed one another in real floor plans.
    """
    wide = sum(r.w for r in rects) >= sum(r.h for r in rects)
    order = sorted(
        range(len(rects)),
        key=lambda i: (
            (rects[i].x + rects[i].w / 2, rects[i].y)
            if wide
            else (rects[i].y + rects[i].h / 2, rects[i].x)
        ),
    )
    base, extra = divmod(len(rects), n_zones)
    sizes = [base + (1 if z < extra else 0) for z in range(n_zones)]
    rng.shuffle(sizes)
    zone_of = [0] * len(rects)
    at = 0
    for zone, size in enumerate(sizes):
        for i in order[at : at + size]:
            zone_of[i] = zone
        at += size
    return zone_of


def _assign_concepts(n_zones: int, k: int, rng: random.Random) -> dict[int, int]:
    """Sample a concept sequence for the zone slabs via chained affinity.

    A first-order sampler: each next slab's concept is drawn among the
    remaining ones with probability proportional to its affinity with the
    previous slab's concept, so the canonical room-type order emerges with
    local variation.  Chains start from one end of the canonical sequence
    (houses are entered from the street side or mirrored).
    """
    ends = (_CANONICAL_ORDER[0], _CANONICAL_ORDER[-1])
    start = ends[rng.randrange(2)]
    sequence = [start]
    remaining = [c for c in range(k) if c != start]
    while len(sequence) < n_zones:
        weights = [_affinity(k, sequence[-1], c) for c in remaining]
        pick = rng.random() * sum(weights)
        acc = 0.0
        chosen = remaining[-1]
        for c, w in zip(remaining, weights):
            acc += w
            if pick < acc:
                chosen = c
                break
        sequence.append(chosen)
        remaining.remove(chosen)
    return {zone: concept for zone, concept in enumerate(sequence)}


def generate_house(
    seed: int,
    params: HouseParams = HouseParams(),
    vocabulary: ConceptVocabulary | None = None,
) -> House:
    """Deterministically generate a connected house for `seed`.

    The grid is BSP-partitioned into rectangular rooms, room types are drawn
    from the affinity sampler, and doors are punched along a random spanning
    tree of the room adjacency graph plus extras with `extra_door_prob`.
    """
    vocabulary = vocabulary or ConceptVocabulary.default()
    rng = random.Random(seed)
    rects = _bsp_split(_Rect(0, 0, params.width, params.height), params.min_room, rng)
    if len(rects) < vocabulary.size:
        raise ValueError("degenerate layout: fewer rooms than concepts")

    adjacency: dict[int, set[int]] = {i: set() for i in range(len(rects))}
    boundary: dict[tuple[int, int], list[tuple[Cell, Cell]]] = {}
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            pairs = _shared_boundary(rects[i], rects[j])
            if pairs:
                adjacency[i].add(j)
                adjacency[j].add(i)
                boundary[(i, j)] = pairs

    # Most houses carry all concepts; some drop one or two, so agents meet
    # environments where a commanded concept simply does not exist.
    k = vocabulary.size
    draw = rng.random()
    missing = 0 if draw < 0.5 else (1 if draw < 0.8 else 2)
    n_zones = max(3, min(len(rects), k - missing))
    zone_of = _slab_zones(rects, n_zones, rng)
    zone_concepts = _assign_concepts(n_zones, k, rng)
    concepts = {i: zone_concepts[zone_of[i]] for i in range(len(rects))}

    # Random spanning tree (Kruskal over shuffled adjacencies) keeps the room
    # graph connected; extra doors add cycles.
    edges = sorted(boundary)
    rng.shuffle(edges)
    parent = list(range(len(rects)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def punch_door(pairs: list[tuple[Cell, Cell]]) -> list[tuple[Cell, Cell]]:
        # A door is a run of up to door_width consecutive openings, so rooms
        # do not bottleneck on single-cell passages.
        span = min(params.door_width, len(pairs))
        at = rng.randrange(len(pairs) - span + 1)
        return pairs[at : at + span]

    doors: list[tuple[Cell, Cell]] = []
    extra_candidates: list[tuple[int, int]] = []
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            doors.extend(punch_door(boundary[(i, j)]))
        else:
            extra_candidates.append((i, j))
    for i, j in sorted(extra_candidates):
        if rng.random() < params.extra_door_prob:
            doors.extend(punch_door(boundary[(i, j)]))

    rooms = tuple(
        Room(
            i,
            concepts[i],
            tuple((x, y) for y in range(r.y, r.y + r.h) for x in range(r.x, r.x + r.w)),
        )
        for i, r in enumerate(rects)
    )
    return House(params.width, params.height, rooms, doors, vocabulary, seed=seed)


# -- detector ----------------------------------------------------------------


@dataclass(frozen=True)
class DetectorModel:
    """Parametric per-step detector noise.

    hit_rate is the chance the current room's concept scores at least 0.9;
    false_alarm_rate the chance any other concept does.
    """

    hit_rate: float = 0.98
    false_alarm_rate: float = 0.01

    def __post_init__(self) -> None:
        if not 0.0 <= self.false_alarm_rate <= 1.0 or not 0.0 <= self.hit_rate <= 1.0:
            raise ValueError("detector rates must be in [0, 1]")
        if self.hit_rate <= self.false_alarm_rate:
            raise ValueError("hit_rate must exceed false_alarm_rate")

    def confidences(self, true_concept: int, k: int, rng: random.Random) -> ConfidenceVector:
        scores = []
        for c in range(k):
            p = self.hit_rate if c == true_concept else self.false_alarm_rate
            if rng.random() < p:
                scores.append(0.9 + 0.1 * rng.random())
            else:
                scores.append(0.9 * rng.random())
        return ConfidenceVector(tuple(scores))


NOISELESS_DETECTOR = DetectorModel(hit_rate=1.0, false_alarm_rate=0.0)


def step(
    house: House,
    agent_cell: Cell,
    action: int,
    detector: DetectorModel,
    rng: random.Random,
) -> tuple[Cell, ConfidenceVector]:
    """Move one step (blocked moves stay put) and emit detector confidences."""
    new_cell = house.move(agent_cell, action)
    conf = detector.confidences(house.concept_at(new_cell), house.vocabulary.size, rng)
    return new_cell, conf


# -- oracle signals ------------------------------------------------------------


@dataclass(frozen=True)
class GroundTruthRelations:
    """Symmetric boolean close-by matrix over the K+1 concepts of one house."""

    adjacency: tuple[tuple[bool, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.adjacency)
        for i in range(n):
            if len(self.adjacency[i]) != n:
                raise ValueError("adjacency matrix must be square")
            if self.adjacency[i][i]:
                raise ValueError("no self-relations")
            for j in range(n):
                if self.adjacency[i][j] != self.adjacency[j][i]:
                    raise ValueError("adjacency matrix must be symmetric")


def relation_samples(
    house: House,
    budget: int = EXPLORATION_BUDGET,
    trials: int = EXPLORATION_TRIALS,
    rng_seed: int = 0,
) -> dict[tuple[int, int], list[int]]:
    """Per-pair binary reachability samples from seeded exploration walks.

    For each present concept, `trials` walks of `budget` steps are run from
    uniformly drawn cells of that concept; a walk samples 1 for every concept
    it touches.  Each unordered pair receives the samples from both
    directions; walks for absent concepts are all-negative.
    """
    if budget < 1 or trials < 1:
        raise ValueError("budget and trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    n = house.vocabulary.node_count
    table = house.step_table
    cmask = [1 << c if c != WALL else 0 for c in house._cell_concept]

    # Persistent (correlated) random walk: keep the heading, occasionally
    # turn, and re-draw when blocked.  Uncorrelated steps diffuse too slowly
    # to escape a room within a realistic budget.
    turn_prob = WALK_TURN_PROB
    reach: list[list[int]] = []
    for concept in range(n):
        cells = house.cells_of_concept(concept)
        masks = [0] * trials
        if cells:
            starts = rng.integers(0, len(cells), trials)
            directions = rng.integers(0, 4, (trials, budget))
            turns = rng.random((trials, budget)) < turn_prob
            for t in range(trials):
                cell = cells[starts[t]]
                mask = cmask[cell]
                draws = directions[t].tolist()
                redraw = turns[t].tolist()
                heading = draws[0]
                for i in range(budget):
                    if redraw[i]:
                        heading = draws[i]
                    dest = table[cell * 5 + heading]
                    if dest == cell:
                        heading = draws[i]
                        dest = table[cell * 5 + heading]
                    cell = dest
                    mask |= cmask[cell]
                masks[t] = mask
        reach.append(masks)

    samples: dict[tuple[int, int], list[int]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            vals = [1 if m >> j & 1 else 0 for m in reach[i]]
            vals += [1 if m >> i & 1 else 0 for m in reach[j]]
            samples[(i, j)] = vals
    return samples


def ground_truth_relations(
    house: House,
    budget: int = EXPLORATION_BUDGET,
    trials: int = EXPLORATION_TRIALS,
    rng_seed: int = 0,
) -> GroundTruthRelations:
    """Close-by matrix: true iff any exploration walk connected the pair."""
    samples = relation_samples(house, budget, trials, rng_seed)
    n = house.vocabulary.node_count
    mat = [[False] * n for _ in range(n)]
    for (i, j), vals in samples.items():
        hit = any(vals)
        mat[i][j] = mat[j][i] = hit
    return GroundTruthRelations(tuple(tuple(row) for row in mat))


def room_graph_relations(house: House, max_hops: int = 2) -> GroundTruthRelations:
    """Door-graph oracle: concepts related iff some rooms lie within max_hops.

    Serves as the budget-independent cross-check of the sampled close-by
    matrix.
    """
    n = house.vocabulary.node_count
    nrooms = len(house.rooms)
    adj: dict[int, set[int]] = {r.id: set() for r in house.rooms}
    for fa, fb in house._door_pairs:
        adj[house._cells[fa]].add(house._cells[fb])
    # BFS hop counts between all room pairs.
    hops = [[UNREACHED] * nrooms for _ in range(nrooms)]
    for start in range(nrooms):
        hops[start][start] = 0
        queue = deque([start])
        while queue:
            r = queue.popleft()
            for s in adj[r]:
                if hops[start][s] > hops[start][r] + 1:
                    hops[start][s] = hops[start][r] + 1
                    queue.append(s)
    mat = [[False] * n for _ in range(n)]
    for a in house.rooms:
        for b in house.rooms:
            if a.concept != b.concept and hops[a.id][b.id] <= max_hops:
                mat[a.concept][b.concept] = True
                mat[b.concept][a.concept] = True
    return GroundTruthRelations(tuple(tuple(row) for row in mat))


def success_check(house: House, trajectory_tail: Sequence[Cell], target: int) -> bool:
    """True iff the last three positions all lie in rooms of the target concept."""
    tail = list(trajectory_tail)[-3:]
    if len(tail) < 3:
        return False
    return all(house.concept_at(c) == target for c in tail)


def shortest_path_len(house: House, cell: Cell, target: int) -> int:
    """Oracle episode length: grid distance to the target region plus dwell."""
    d = house.distance_field(target)[house.flat(cell)]
    if d >= UNREACHED:
        raise ValueError("disconnected target")
    return d + DWELL_STEPS


def plan_distance(
    gt: GroundTruthRelations, start_concepts: SemanticVector, target: int
) -> int | None:
    """Hops from any set start concept to target in the close-by graph.

    Returns 0 when the target bit is already set and None when unreachable.
    """
    bits = start_concepts.bits
    n = len(gt.adjacency)
    if len(bits) != n:
        raise ValueError("semantic vector width does not match relation matrix")
    if bits[target]:
        return 0
    dist = [UNREACHED] * n
    queue = deque()
    for i, b in enumerate(bits):
        if b:
            dist[i] = 0
            queue.append(i)
    while queue:
        i = queue.popleft()
        for j in range(n):
            if gt.adjacency[i][j] and dist[j] > dist[i] + 1:
                dist[j] = dist[i] + 1
                if j == target:
                    return dist[j]
                queue.append(j)
    return None


# -- episodes ------------------------------------------------------------------


@dataclass(frozen=True)
class EpisodeConfig:
    """Seeded, fully reproducible episode specification."""

    house_seed: int
    start_cell: Cell
    target: int
    horizon: int = 300
    replan_period: int = 10
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.replan_period <= self.horizon:
            raise ValueError("need 1 <= replan_period <= horizon")


def validate_episode(house: House, episode: EpisodeConfig) -> None:
    """Enforce the evaluation-set rules against a concrete house."""
    if episode.target not in house.concepts_present:
        raise ValueError("target concept has no room in this house")
    if house.room_at(episode.start_cell) == WALL:
        raise ValueError("start cell is not inside a room")
    if house.concept_at(episode.start_cell) == episode.target:
        raise ValueError("start cell lies inside a target-concept room")
    if house.distance_field(episode.target)[house.flat(episode.start_cell)] >= UNREACHED:
        raise ValueError("target not connected to start cell")
