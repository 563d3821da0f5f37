"""Shared fixtures.

The session-scoped pipeline fixture builds the default corpora, learns the
relation prior from the train split and assembles the evaluation suite once;
benchmark runs are memoized so acceptance criteria can share them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import pytest

from relnav.corpus import Corpus, build_split_corpora
from relnav.evaluation import MetricsReport, EpisodeRow, build_eval_suite, run_benchmark
from relnav.graph import RelationGraph
from relnav.house import DetectorModel, HouseParams
from relnav.locomotion import LocomotionSpec

logging.basicConfig(level=logging.WARNING)

GLOBAL_SEED = 7
SUITE_SEED = 2024


@dataclass
class Pipeline:
    """Default end-to-end setup shared across tests."""

    corpora: dict[str, Corpus]
    graph: RelationGraph
    suite: list
    locomotion: LocomotionSpec = field(default_factory=LocomotionSpec)
    detector: DetectorModel = field(default_factory=DetectorModel)
    _runs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def test_corpus(self) -> Corpus:
        return self.corpora["test"]

    def run(
        self,
        mode: str,
        horizon: int,
        replan_period: int = 10,
        termination: str = "environment",
        locomotion: LocomotionSpec | None = None,
    ) -> tuple[MetricsReport, list[EpisodeRow]]:
        """Memoized benchmark run of one mode on the shared suite."""
        import time

        locomotion = locomotion or self.locomotion
        key = (mode, horizon, replan_period, termination, locomotion)
        if key not in self._runs:
            started = time.perf_counter()
            reports, rows = run_benchmark(
                self.test_corpus,
                self.suite,
                self.graph,
                modes=(mode,),
                locomotion_spec=locomotion,
                detector=self.detector,
                horizon=horizon,
                replan_period=replan_period,
                termination=termination,
            )
            self.timings[key] = time.perf_counter() - started
            self._runs[key] = (reports[mode], rows)
        return self._runs[key]


@pytest.fixture(scope="session")
def pipeline() -> Pipeline:
    from relnav.evaluation import learn_prior_driver

    corpora = build_split_corpora(GLOBAL_SEED)
    prior = learn_prior_driver(corpora["train"])
    graph = RelationGraph(corpora["test"].vocabulary, prior)
    suite = build_eval_suite(
        corpora["test"],
        episodes_total=1000,
        min_per_bucket=50,
        rng_seed=SUITE_SEED,
        horizon=300,
        replan_period=10,
    )
    return Pipeline(corpora=corpora, graph=graph, suite=suite)


@pytest.fixture(scope="session")
def small_corpus() -> Corpus:
    """A compact corpus for module-level tests that need real houses."""
    from relnav.corpus import CorpusSpec

    return Corpus(
        CorpusSpec(
            seeds=tuple(range(500, 512)),
            params=HouseParams(),
            base_seed=GLOBAL_SEED,
            label="small",
        )
    )
