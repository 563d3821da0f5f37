"""Metrics, evaluation suites and experiment drivers.

Success rate and path-length-weighted success (SPL) are reported overall and
bucketed by plan distance (hops in the ground-truth relation graph, capped
at 5).  Suites are rejection-sampled so every achievable bucket is populated,
and every episode is pinned by its own seed, which makes benchmark runs
reproducible for any worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .agent import (
    AgentConfig,
    MODE_BRM,
    MODE_OPTIMAL_PLANNER,
    MODE_UNIFORM_PRIOR,
    MODES,
    TERMINATION_ENV,
    ground_truth_graph,
    run_episode,
)
from .concepts import SemanticVector
from .corpus import Corpus, CorpusSpec
from .graph import RelationGraph, deserialize, learn_prior, serialize
from .house import (
    DetectorModel,
    EpisodeConfig,
    UNREACHED,
    WALL,
    plan_distance,
    relation_samples,
    shortest_path_len,
)
from .locomotion import LocomotionSpec

logger = logging.getLogger(__name__)

MAX_BUCKET = 5

DEFAULT_OBS_GRID = ((0.001, 0.01, 0.05, 0.1), (0.05, 0.15, 0.3, 0.45))

CSV_HEADER = "episode_seed,mode,plan_steps,success,steps,L,spl_term"


@dataclass(frozen=True)
class EpisodeRow:
    """One benchmark episode outcome, ready for CSV streaming."""

    episode_seed: int
    mode: str
    plan_steps: int
    success: bool
    steps: int
    oracle_len: int
    spl_term: float


@dataclass(frozen=True)
class BucketMetrics:
    plan_steps: int | None  # None marks the overall row
    episode_count: int
    success_rate: float
    spl: float
    mean_success_steps: float | None


@dataclass(frozen=True)
class MetricsReport:
    meta: dict
    overall: BucketMetrics
    buckets: tuple[BucketMetrics, ...]


def spl(results: Sequence[tuple[bool | int, float, float]]) -> float:
    """Mean of S * L / max(L, P) over episodes."""
    results = list(results)
    if not results:
        raise ValueError("no episodes")
    total = 0.0
    for s, length, taken in results:
        if length <= 0:
            raise ValueError("oracle length must be positive")
        if taken < 0:
            raise ValueError("steps taken must be non-negative")
        if s:
            total += length / max(length, taken)
    return total / len(results)


def bucket_of(plan_steps: int) -> int:
    """Plan distances above MAX_BUCKET share the top bucket."""
    return min(plan_steps, MAX_BUCKET)


def _start_vector(n_nodes: int, concept: int) -> SemanticVector:
    bits = [0] * n_nodes
    bits[concept] = 1
    return SemanticVector(tuple(bits))


def _sample_episode(
    corpus: Corpus,
    rng,
    horizon: int,
    replan_period: int,
    want_bucket: int | None = None,
    attempts: int = 2000,
) -> tuple[EpisodeConfig, int] | None:
    n = corpus.vocabulary.node_count
    for _ in range(attempts):
        seed = corpus.seeds[rng.randrange(len(corpus.seeds))]
        house = corpus.house(seed)
        start = (rng.randrange(house.width), rng.randrange(house.height))
        if house.room_at(start) == WALL:
            continue
        present = sorted(house.concepts_present)
        target = present[rng.randrange(len(present))]
        if house.concept_at(start) == target:
            continue
        if house.distance_field(target)[house.flat(start)] >= UNREACHED:
            continue
        steps = plan_distance(corpus.gt(seed), _start_vector(n, house.concept_at(start)), target)
        if steps is None or steps < 1:
            continue
        bucket = bucket_of(steps)
        if want_bucket is not None and bucket != want_bucket:
            continue
        config = EpisodeConfig(
            house_seed=seed,
            start_cell=start,
            target=target,
            horizon=horizon,
            replan_period=replan_period,
            rng_seed=rng.getrandbits(32),
        )
        return config, bucket
    return None


def build_eval_suite(
    corpus: Corpus,
    episodes_total: int = 1000,
    min_per_bucket: int = 50,
    rng_seed: int = 0,
    horizon: int = 300,
    replan_period: int = 10,
) -> list[EpisodeConfig]:
    """Rejection-sample a fixed evaluation suite over the corpus.

    A base batch of `episodes_total` configs is topped up until every
    achievable plan-distance bucket holds at least `min_per_bucket` episodes;
    unachievable buckets are logged and left short.
    """
    import random as _random

    if min_per_bucket < 1:
        raise ValueError("min_per_bucket must be >= 1")
    rng = _random.Random(rng_seed)
    suite: list[EpisodeConfig] = []
    counts = {b: 0 for b in range(1, MAX_BUCKET + 1)}
    for _ in range(episodes_total):
        sampled = _sample_episode(corpus, rng, horizon, replan_period)
        if sampled is None:
            raise ValueError("corpus cannot produce valid episodes")
        config, bucket = sampled
        suite.append(config)
        counts[bucket] += 1
    for bucket in range(1, MAX_BUCKET + 1):
        while counts[bucket] < min_per_bucket:
            sampled = _sample_episode(corpus, rng, horizon, replan_period, want_bucket=bucket)
            if sampled is None:
                logger.warning(
                    "plan-distance bucket %d unachievable in corpus; %d/%d episodes",
                    bucket,
                    counts[bucket],
                    min_per_bucket,
                )
                break
            suite.append(sampled[0])
            counts[bucket] += 1
    return suite


def episode_annotations(corpus: Corpus, suite: Sequence[EpisodeConfig]) -> list[tuple[int, int]]:
    """(plan_steps bucket, oracle length) per suite episode."""
    n = corpus.vocabulary.node_count
    out = []
    for config in suite:
        house = corpus.house(config.house_seed)
        steps = plan_distance(
            corpus.gt(config.house_seed),
            _start_vector(n, house.concept_at(config.start_cell)),
            config.target,
        )
        if steps is None:
            raise ValueError("suite episode with unreachable target in relation graph")
        out.append((bucket_of(steps), shortest_path_len(house, config.start_cell, config.target)))
    return out


# -- benchmark execution -------------------------------------------------------

_WORKER: dict = {}


def _resolve_graph(
    corpus: Corpus, agent: AgentConfig, base: RelationGraph | None, cache: dict, seed: int
) -> RelationGraph | None:
    if not agent.uses_graph:
        return None
    if base is None:
        raise ValueError(f"mode {agent.mode!r} needs a relation graph")
    if agent.mode == MODE_OPTIMAL_PLANNER:
        g = cache.get(seed)
        if g is None:
            g = ground_truth_graph(corpus.vocabulary, corpus.gt(seed), base.obs_noise)
            cache[seed] = g
        return g
    if agent.mode == MODE_UNIFORM_PRIOR:
        g = cache.get("uniform")
        if g is None:
            g = RelationGraph.uniform(corpus.vocabulary, 0.5, base.obs_noise)
            cache["uniform"] = g
        return g
    return base


def _episode_outcome(
    corpus: Corpus,
    config: EpisodeConfig,
    agent: AgentConfig,
    base_graph: RelationGraph | None,
    locomotion_spec: LocomotionSpec,
    detector: DetectorModel,
    cache: dict,
) -> tuple[bool, int]:
    house = corpus.house(config.house_seed)
    graph = _resolve_graph(corpus, agent, base_graph, cache, config.house_seed)
    result = run_episode(house, config, agent, graph, locomotion_spec, detector)
    return result.success, result.steps_taken


def _worker_init(spec: CorpusSpec, graph_bytes: bytes | None, agent, loco_spec, detector) -> None:
    _WORKER["corpus"] = Corpus(spec)
    _WORKER["graph"] = deserialize(graph_bytes) if graph_bytes is not None else None
    _WORKER["agent"] = agent
    _WORKER["loco"] = loco_spec
    _WORKER["detector"] = detector
    _WORKER["cache"] = {}


def _worker_run(config: EpisodeConfig) -> tuple[bool, int]:
    return _episode_outcome(
        _WORKER["corpus"],
        config,
        _WORKER["agent"],
        _WORKER["graph"],
        _WORKER["loco"],
        _WORKER["detector"],
        _WORKER["cache"],
    )


def _run_suite(
    corpus: Corpus,
    suite: Sequence[EpisodeConfig],
    agent: AgentConfig,
    graph: RelationGraph | None,
    locomotion_spec: LocomotionSpec,
    detector: DetectorModel,
    jobs: int,
) -> list[tuple[bool, int]]:
    if jobs <= 1:
        cache: dict = {}
        return [
            _episode_outcome(corpus, c, agent, graph, locomotion_spec, detector, cache)
            for c in suite
        ]
    graph_bytes = serialize(graph) if graph is not None else None
    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_worker_init,
        initargs=(corpus.spec, graph_bytes, agent, locomotion_spec, detector),
    ) as pool:
        chunk = max(1, len(suite) // (jobs * 4))
        return list(pool.map(_worker_run, suite, chunksize=chunk))


def summarize(rows: Sequence[EpisodeRow], meta: dict) -> MetricsReport:
    """Aggregate rows into overall and per-bucket metrics."""

    def bucket_metrics(subset: Sequence[EpisodeRow], label: int | None) -> BucketMetrics:
        count = len(subset)
        successes = [r for r in subset if r.success]
        rate = len(successes) / count if count else 0.0
        spl_value = sum(r.spl_term for r in subset) / count if count else 0.0
        mean_steps = sum(r.steps for r in successes) / len(successes) if successes else None
        return BucketMetrics(label, count, rate, spl_value, mean_steps)

    buckets = tuple(
        bucket_metrics([r for r in rows if r.plan_steps == b], b)
        for b in sorted({r.plan_steps for r in rows})
    )
    return MetricsReport(meta=meta, overall=bucket_metrics(list(rows), None), buckets=buckets)


def run_benchmark(
    corpus: Corpus,
    suite: Sequence[EpisodeConfig],
    graph: RelationGraph | None,
    modes: Sequence[str] = (MODE_BRM,),
    locomotion_spec: LocomotionSpec = LocomotionSpec(),
    detector: DetectorModel = DetectorModel(),
    horizon: int | None = None,
    replan_period: int | None = None,
    termination: str = TERMINATION_ENV,
    jobs: int = 1,
) -> tuple[dict[str, MetricsReport], list[EpisodeRow]]:
    """Run every (mode, episode) pair on the shared suite and aggregate.

    All modes see identical episode configurations and per-episode seeds, so
    comparisons are paired.
    """
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown agent mode {mode!r}")
    if not suite:
        raise ValueError("no episodes")
    annotations = episode_annotations(corpus, suite)
    reports: dict[str, MetricsReport] = {}
    all_rows: list[EpisodeRow] = []
    for mode in modes:
        agent = AgentConfig(
            mode=mode,
            replan_period=replan_period or suite[0].replan_period,
            horizon=horizon or suite[0].horizon,
            termination=termination,
        )
        outcomes = _run_suite(corpus, suite, agent, graph, locomotion_spec, detector, jobs)
        rows = []
        for config, (steps_bucket, oracle_len), (success, steps) in zip(
            suite, annotations, outcomes
        ):
            term = oracle_len / max(oracle_len, steps) if success else 0.0
            rows.append(
                EpisodeRow(
                    episode_seed=config.rng_seed,
                    mode=mode,
                    plan_steps=steps_bucket,
                    success=success,
                    steps=steps,
                    oracle_len=oracle_len,
                    spl_term=term,
                )
            )
        meta = {
            "mode": mode,
            "horizon": agent.horizon,
            "replan_period": agent.replan_period,
            "termination": termination,
            "episodes": len(suite),
            "corpus": corpus.spec.label,
            "locomotion": {
                "kind": locomotion_spec.kind,
                "sight_radius": locomotion_spec.sight_radius,
                "slip": locomotion_spec.slip,
            },
            "detector": {
                "hit_rate": detector.hit_rate,
                "false_alarm_rate": detector.false_alarm_rate,
            },
        }
        reports[mode] = summarize(rows, meta)
        all_rows.extend(rows)
    return reports, all_rows


# -- parameter learning drivers -------------------------------------------------


def learn_prior_driver(
    corpus: Corpus,
    budget: int | None = None,
    trials: int | None = None,
    clamp: float = 0.01,
) -> np.ndarray:
    """Pool per-pair reachability samples over the corpus and fit the prior."""
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    budget = budget if budget is not None else corpus.spec.gt_budget
    trials = trials if trials is not None else corpus.spec.gt_trials
    pooled: dict[tuple[int, int], list[int]] = {}
    for seed in corpus.seeds:
        samples = relation_samples(corpus.house(seed), budget, trials, corpus.gt_seed(seed))
        for pair, values in samples.items():
            pooled.setdefault(pair, []).extend(values)
    return learn_prior(pooled, corpus.vocabulary.node_count, clamp)


def grid_search_obs(
    corpus: Corpus,
    prior: np.ndarray,
    locomotion_spec: LocomotionSpec = LocomotionSpec(),
    detector: DetectorModel = DetectorModel(),
    psi0_grid: Sequence[float] = DEFAULT_OBS_GRID[0],
    psi1_grid: Sequence[float] = DEFAULT_OBS_GRID[1],
    horizon: int = 300,
    replan_period: int = 10,
    episodes: int = 200,
    min_per_bucket: int = 10,
    rng_seed: int = 0,
    jobs: int = 1,
) -> tuple[tuple[float, float], list[dict]]:
    """Pick the observation-noise pair maximizing success on a validation suite.

    Ties break towards higher SPL, then smaller false-negative rate.
    """
    if not psi0_grid or not psi1_grid:
        raise ValueError("empty grid")
    suite = build_eval_suite(corpus, episodes, min_per_bucket, rng_seed, horizon, replan_period)
    best: tuple[float, float, float] | None = None
    chosen = (psi0_grid[0], psi1_grid[0])
    table: list[dict] = []
    for p0 in psi0_grid:
        for p1 in psi1_grid:
            graph = RelationGraph(corpus.vocabulary, prior, (p0, p1))
            reports, _ = run_benchmark(
                corpus,
                suite,
                graph,
                modes=(MODE_BRM,),
                locomotion_spec=locomotion_spec,
                detector=detector,
                jobs=jobs,
            )
            overall = reports[MODE_BRM].overall
            table.append(
                {
                    "psi_obs_0": p0,
                    "psi_obs_1": p1,
                    "success_rate": overall.success_rate,
                    "spl": overall.spl,
                }
            )
            key = (overall.success_rate, overall.spl, -p1)
            if best is None or key > best:
                best = key
                chosen = (p0, p1)
    return chosen, table


# -- output writers --------------------------------------------------------------


def report_to_dict(report: MetricsReport) -> dict:
    def row(b: BucketMetrics) -> dict:
        return {
            "n": b.episode_count,
            "success_rate": b.success_rate,
            "spl": b.spl,
            "mean_steps": b.mean_success_steps,
        }

    return {
        "meta": report.meta,
        "buckets": [dict(row(b), plan_steps=b.plan_steps) for b in report.buckets],
        "overall": row(report.overall),
    }


def rows_to_csv(rows: Iterable[EpisodeRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.episode_seed},{r.mode},{r.plan_steps},{int(r.success)},"
            f"{r.steps},{r.oracle_len},{r.spl_term!r}"
        )
    return "\n".join(lines) + "\n"
