"""Probabilistic relation graph over concepts.

A complete graph over the K+1 concept nodes where every edge holds a
Bernoulli belief that the two concepts are close-by in the current
environment.  Edges carry a prior existence probability plus a two-sided
noise model for binary co-occurrence observations; posteriors follow by
Bayes rule from per-episode positive/negative counts.  Planning finds the
max-product concept path from the currently detected concepts to a target.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .concepts import ConceptVocabulary, RelationObservation, SemanticVector

# False-positive / false-negative rates of the observation channel shared by
# all edges; tunable via grid search.
DEFAULT_OBS_NOISE = (0.001, 0.15)

DEFAULT_PRIOR_CLAMP = 0.01

# Posterior values are kept strictly inside (0, 1) so that log-weights stay
# finite and beliefs remain updatable after long runs of one-sided evidence.
_POSTERIOR_FLOOR = 1e-12


class GraphFormatError(ValueError):
    """Raised when a serialized graph cannot be parsed."""


@dataclass(frozen=True)
class EdgeParams:
    """Per-edge prior and observation-noise parameters.

    psi_obs_0 is the false-positive rate P(y=1 | z=0); psi_obs_1 the
    false-negative rate P(y=0 | z=1).  Their sum must stay below 1 or the
    channel carries no usable signal.
    """

    psi_prior: float
    psi_obs_0: float
    psi_obs_1: float

    def __post_init__(self) -> None:
        for name in ("psi_prior", "psi_obs_0", "psi_obs_1"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name}={v!r} outside open interval (0, 1)")
        if self.psi_obs_0 + self.psi_obs_1 >= 1.0:
            raise ValueError("psi_obs_0 + psi_obs_1 must be < 1 (informative channel)")


@dataclass(frozen=True)
class EdgeBelief:
    """Edge parameters plus this episode's observation counts."""

    params: EdgeParams
    pos_count: int = 0
    neg_count: int = 0

    def __post_init__(self) -> None:
        if self.pos_count < 0 or self.neg_count < 0:
            raise ValueError("observation counts must be non-negative")


@dataclass(frozen=True)
class Plan:
    """Concept path ending at the target and its joint-belief score."""

    path: tuple[int, ...]
    score: float


def _sigmoid(x: float) -> float:
    if x >= 0.0:
        z = math.exp(-x)
        return 1.0 / (1.0 + z)
    z = math.exp(x)
    return z / (1.0 + z)


def _clamped_posterior(log_odds: float) -> float:
    p = _sigmoid(log_odds)
    if p < _POSTERIOR_FLOOR:
        return _POSTERIOR_FLOOR
    if p > 1.0 - _POSTERIOR_FLOOR:
        return 1.0 - _POSTERIOR_FLOOR
    return p


def posterior(belief: EdgeBelief) -> float:
    """P(z=1 | counts) for one edge, computed in log-odds space.

    Log-space keeps products of many likelihood terms from underflowing; the
    result is clamped to stay strictly inside (0, 1).
    """
    p = belief.params
    log_odds = (
        math.log(p.psi_prior / (1.0 - p.psi_prior))
        + belief.pos_count * math.log((1.0 - p.psi_obs_1) / p.psi_obs_0)
        + belief.neg_count * math.log(p.psi_obs_1 / (1.0 - p.psi_obs_0))
    )
    return _clamped_posterior(log_odds)


def pair_count(n_nodes: int) -> int:
    return n_nodes * (n_nodes - 1) // 2

def pair_index(i: int, j: int, n_nodes: int) -> int:
    """Row-major upper-triangular index of the unordered pair (i, j)."""
    if i == j:
        raise ValueError("self-relation")
    if i > j:
        i, j = j, i
    if i < 0 or j >= n_nodes:
        raise ValueError(f"pair ({i}, {j}) outside graph with {n_nodes} nodes")
    return i * (2 * n_nodes - i - 1) // 2 + (j - i - 1)


def iter_pairs(n_nodes: int) -> Iterable[tuple[int, int]]:
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            yield i, j


class RelationGraph:
    """Complete belief graph over the vocabulary's K+1 concept nodes.

    The graph is a mutable handle owned by one agent/episode at a time:
    `update` folds in observations, `reset_episode` clears them.  Use `copy`
    to hand independent instances to concurrent episodes.
    """

    def __init__(
        self,
        vocabulary: ConceptVocabulary,
        priors: float | Sequence[float] | np.ndarray = 0.5,
        obs_noise: tuple[float, float] = DEFAULT_OBS_NOISE,
    ) -> None:
        self.vocabulary = vocabulary
        n = vocabulary.node_count
        self.node_count = n
        m = pair_count(n)
        flat = self._flatten_priors(priors, n, m)
        fp, fn = obs_noise
        self._params = tuple(EdgeParams(p, fp, fn) for p in flat)
        self._pos = [0] * m
        self._neg = [0] * m
        # Per-edge log-odds pieces, so posterior lookups are a few flops.
        self._log_prior_odds = [math.log(p / (1.0 - p)) for p in flat]
        self._log_pos_lr = math.log((1.0 - fn) / fp)
        self._log_neg_lr = math.log(fn / (1.0 - fp))
        self._post_cache: list[float | None] = [None] * m

    @staticmethod
    def _flatten_priors(
        priors: float | Sequence[float] | np.ndarray, n: int, m: int
    ) -> list[float]:
        if isinstance(priors, (int, float)):
            return [float(priors)] * m
        arr = np.asarray(priors, dtype=float)
        if arr.ndim == 1:
            if arr.shape[0] != m:
                raise ValueError(f"expected {m} upper-triangular priors, got {arr.shape[0]}")
            return [float(v) for v in arr]
        if arr.ndim == 2:
            if arr.shape != (n, n):
                raise ValueError(f"expected {n}x{n} prior matrix, got {arr.shape}")
            return [float(arr[i, j]) for i, j in iter_pairs(n)]
        raise ValueError("priors must be a scalar, a flat upper-triangular array or a matrix")

    @classmethod
    def uniform(
        cls,
        vocabulary: ConceptVocabulary,
        psi_prior: float = 0.5,
        obs_noise: tuple[float, float] = DEFAULT_OBS_NOISE,
    ) -> "RelationGraph":
        return cls(vocabulary, psi_prior, obs_noise)

    @property
    def obs_noise(self) -> tuple[float, float]:
        p = self._params[0]
        return (p.psi_obs_0, p.psi_obs_1)

    def edge(self, i: int, j: int) -> EdgeBelief:
        e = pair_index(i, j, self.node_count)
        return EdgeBelief(self._params[e], self._pos[e], self._neg[e])

    def posterior(self, i: int, j: int) -> float:
        e = pair_index(i, j, self.node_count)
        return self._posterior_at(e)

    def _posterior_at(self, e: int) -> float:
        p = self._post_cache[e]
        if p is None:
            log_odds = (
                self._log_prior_odds[e]
                + self._pos[e] * self._log_pos_lr
                + self._neg[e] * self._log_neg_lr
            )
            p = _clamped_posterior(log_odds)
            self._post_cache[e] = p
        return p

    def update(self, observations: Iterable[RelationObservation]) -> None:
        """Fold relation observations into the per-edge counts."""
        n = self.node_count
        for obs in observations:
            e = pair_index(obs.i, obs.j, n)
            if obs.value:
                self._pos[e] += 1
            else:
                self._neg[e] += 1
            self._post_cache[e] = None

    def reset_episode(self) -> None:
        """Zero all observation counts; posteriors fall back to the priors."""
        m = len(self._pos)
        self._pos = [0] * m
        self._neg = [0] * m
        self._post_cache = [None] * m

    def copy(self) -> "RelationGraph":
        dup = object.__new__(RelationGraph)
        dup.vocabulary = self.vocabulary
        dup.node_count = self.node_count
        dup._params = self._params
        dup._pos = list(self._pos)
        dup._neg = list(self._neg)
        dup._log_prior_odds = self._log_prior_odds
        dup._log_pos_lr = self._log_pos_lr
        dup._log_neg_lr = self._log_neg_lr
        dup._post_cache = list(self._post_cache)
        return dup

    def posterior_matrix(self) -> list[list[float]]:
        """Symmetric posterior matrix; the meaningless diagonal is 0."""
        n = self.node_count
        mat = [[0.0] * n for _ in range(n)]
        for i, j in iter_pairs(n):
            p = self.posterior(i, j)
            mat[i][j] = p
            mat[j][i] = p
        return mat

    def prior_matrix(self) -> np.ndarray:
        n = self.node_count
        mat = np.zeros((n, n))
        for e, (i, j) in enumerate(iter_pairs(n)):
            mat[i, j] = mat[j, i] = self._params[e].psi_prior
        return mat

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationGraph):
            return NotImplemented
        return (
            self.vocabulary == other.vocabulary
            and self._params == other._params
            and self._pos == other._pos
            and self._neg == other._neg
        )

    def __repr__(self) -> str:
        return (
            f"RelationGraph(nodes={self.node_count}, "
            f"obs_noise={self.obs_noise}, "
            f"observations={sum(self._pos) + sum(self._neg)})"
        )


def plan(graph: RelationGraph, current: SemanticVector, target: int) -> Plan:
    """Max-product concept path from the currently detected concepts to target.

    Solved as a shortest path under -ln(posterior) edge weights from a
    virtual source attached to every set bit of `current`.  Ties break by
    path weight, then fewer hops, then lexicographically smallest node
    sequence, which makes planning fully deterministic.
    """
    n = graph.node_count
    if not 0 <= target < n - 1:
        raise ValueError("target must be a named concept (the unknown node is never a target)")
    bits = current.bits
    if len(bits) != n:
        raise ValueError("semantic vector width does not match graph")
    if bits[target]:
        return Plan((target,), 1.0)
    sources = [i for i in range(n) if bits[i]]
    if not sources:
        raise ValueError("current semantic vector has no set bits")

    heap: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 1, (s,)) for s in sorted(sources)]
    heapq.heapify(heap)
    done = [False] * n
    chosen: tuple[int, ...] | None = None
    while heap:
        dist, length, path = heapq.heappop(heap)
        node = path[-1]
        if done[node]:
            continue
        done[node] = True
        if node == target:
            chosen = path
            break
        for nxt in range(n):
            if done[nxt] or nxt == node:
                continue
            w = -math.log(graph.posterior(node, nxt))
            heapq.heappush(heap, (dist + w, length + 1, path + (nxt,)))
    assert chosen is not None  # complete graph with positive posteriors
    score = 1.0
    for a, b in zip(chosen, chosen[1:]):
        score *= graph.posterior(a, b)
    return Plan(chosen, score)


def next_subgoal(p: Plan) -> int:
    """First hop of the plan; the target itself for degenerate paths."""
    return p.path[1] if len(p.path) >= 2 else p.path[0]


def learn_prior(
    samples: Mapping[tuple[int, int], Sequence[int]],
    n_nodes: int,
    clamp: float = DEFAULT_PRIOR_CLAMP,
) -> np.ndarray:
    """Per-pair Bernoulli MLE of relation existence, clipped away from {0, 1}.

    `samples` maps each unordered pair to its binary reachability samples.
    Clamping keeps later posterior updates informative even for pairs that
    were never (or always) related in the sampled environments.
    """
    if not 0.0 < clamp < 0.5:
        raise ValueError("clamp must be in (0, 0.5)")
    mat = np.zeros((n_nodes, n_nodes))
    for i, j in iter_pairs(n_nodes):
        vals = samples.get((i, j))
        if vals is None:
            vals = samples.get((j, i))
        if not vals:
            raise ValueError(f"no reachability samples for pair ({i}, {j})")
        freq = sum(vals) / len(vals)
        mat[i, j] = mat[j, i] = min(max(freq, clamp), 1.0 - clamp)
    return mat


def serialize(graph: RelationGraph, include_counts: bool = False) -> bytes:
    """Canonical UTF-8 JSON encoding; equal graphs serialize identically.

    Counts are transient per-episode state and only included in debug dumps.
    """
    fp, fn = graph.obs_noise
    if any(p.psi_obs_0 != fp or p.psi_obs_1 != fn for p in graph._params):
        raise ValueError("graph file format requires shared observation noise")
    obj: dict = {
        "vocabulary": list(graph.vocabulary.names),
        "psi_obs": [fp, fn],
        "prior": [p.psi_prior for p in graph._params],
    }
    if include_counts:
        obj["counts"] = {"pos": list(graph._pos), "neg": list(graph._neg)}
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def deserialize(data: bytes) -> RelationGraph:
    """Parse a serialized graph; malformed input raises GraphFormatError."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise GraphFormatError(f"graph payload is not UTF-8 at byte {exc.start}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"malformed graph JSON at byte {exc.pos}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise GraphFormatError("graph JSON must be an object")
    try:
        vocabulary = ConceptVocabulary(tuple(obj["vocabulary"]))
        fp, fn = obj["psi_obs"]
        prior = obj["prior"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"graph JSON missing or invalid field: {exc}") from exc
    n = vocabulary.node_count
    if not isinstance(prior, list) or len(prior) != pair_count(n):
        raise GraphFormatError(
            f"prior must hold {pair_count(n)} upper-triangular values for {n} nodes"
        )
    graph = RelationGraph(vocabulary, np.asarray(prior, dtype=float), (float(fp), float(fn)))
    counts = obj.get("counts")
    if counts is not None:
        try:
            pos, neg = list(counts["pos"]), list(counts["neg"])
        except (KeyError, TypeError) as exc:
            raise GraphFormatError(f"invalid counts block: {exc}") from exc
        if len(pos) != pair_count(n) or len(neg) != pair_count(n):
            raise GraphFormatError("counts arrays do not match edge count")
        graph._pos = [int(v) for v in pos]
        graph._neg = [int(v) for v in neg]
        graph._post_cache = [None] * pair_count(n)
    return graph
