import json

import numpy as np
import pytest

from relnav.concepts import ConceptVocabulary
from relnav.corpus import Corpus, CorpusSpec
from relnav.evaluation import (
    CSV_HEADER,
    EpisodeRow,
    MAX_BUCKET,
    bucket_of,
    build_eval_suite,
    episode_annotations,
    grid_search_obs,
    learn_prior_driver,
    report_to_dict,
    rows_to_csv,
    run_benchmark,
    spl,
    summarize,
)
from relnav.graph import RelationGraph
from relnav.house import (
    House,
    NOISELESS_DETECTOR,
    Room,
    plan_distance,
    validate_episode,
)
from relnav.locomotion import ORACLE_SPEC

VOCAB = ConceptVocabulary.default()


class TestSpl:
    def test_success_with_double_length_scores_half(self):
        assert spl([(True, 10, 20)]) == pytest.approx(0.5)

    def test_failure_contributes_zero(self):
        assert spl([(False, 10, 300)]) == 0.0

    def test_mixed_episodes_average(self):
        assert spl([(True, 10, 10), (False, 10, 300)]) == pytest.approx(0.5)

    def test_empty_input_raises(self):
        with pytest.raises(ValueError, match="no episodes"):
            spl([])

    def test_input_validation(self):
        with pytest.raises(ValueError):
            spl([(True, 0, 5)])
        with pytest.raises(ValueError):
            spl([(True, 5, -1)])

    def test_never_exceeds_success_rate(self):
        rows = [(True, 10, 25), (True, 8, 8), (False, 12, 300), (True, 30, 90)]
        rate = sum(s for s, _, _ in rows) / len(rows)
        assert spl(rows) <= rate


class TestBuildSuite:
    def test_deterministic_in_seed(self, small_corpus):
        a = build_eval_suite(small_corpus, 40, 5, rng_seed=3)
        b = build_eval_suite(small_corpus, 40, 5, rng_seed=3)
        assert a == b

    def test_episode_rules_hold(self, small_corpus):
        suite = build_eval_suite(small_corpus, 40, 5, rng_seed=4)
        n = small_corpus.vocabulary.node_count
        for config in suite:
            house = small_corpus.house(config.house_seed)
            validate_episode(house, config)
            assert house.concept_at(config.start_cell) != config.target

    def test_all_plan_distances_at_least_one(self, small_corpus):
        suite = build_eval_suite(small_corpus, 40, 5, rng_seed=5)
        for (steps, _), config in zip(episode_annotations(small_corpus, suite), suite):
            assert steps >= 1

    def test_unachievable_bucket_logs_warning(self, small_corpus, caplog):
        import logging

        with caplog.at_level(logging.WARNING, logger="relnav.evaluation"):
            build_eval_suite(small_corpus, 30, 3, rng_seed=6)
        assert any("unachievable" in r.message for r in caplog.records)

    def test_default_corpus_fills_buckets_one_to_three(self, pipeline):
        annotations = episode_annotations(pipeline.test_corpus, pipeline.suite)
        counts = {b: 0 for b in range(1, MAX_BUCKET + 1)}
        for steps, _ in annotations:
            counts[bucket_of(steps)] += 1
        assert counts[1] >= 50 and counts[2] >= 50 and counts[3] >= 50, counts

    def test_bucket_counts_partition_the_suite(self, pipeline):
        annotations = episode_annotations(pipeline.test_corpus, pipeline.suite)
        counts = {}
        for steps, _ in annotations:
            counts[bucket_of(steps)] = counts.get(bucket_of(steps), 0) + 1
        assert sum(counts.values()) == len(pipeline.suite)


@pytest.fixture(scope="module")
def mini(small_corpus):
    suite = build_eval_suite(small_corpus, 60, 5, rng_seed=8, horizon=200)
    prior = learn_prior_driver(small_corpus)
    graph = RelationGraph(small_corpus.vocabulary, prior)
    return small_corpus, suite, graph


class TestRunBenchmark:

    def test_metric_bound_holds_in_every_cell(self, mini):
        corpus, suite, graph = mini
        reports, _ = run_benchmark(corpus, suite, graph, modes=("brm", "random"))
        for report in reports.values():
            assert report.overall.spl <= report.overall.success_rate + 1e-12
            for bucket in report.buckets:
                assert bucket.spl <= bucket.success_rate + 1e-12

    def test_optimal_with_oracle_beats_random_everywhere(self, mini):
        corpus, suite, graph = mini
        reports, _ = run_benchmark(
            corpus, suite, graph,
            modes=("random", "optimal_planner"),
            locomotion_spec=ORACLE_SPEC,
        )
        random_by_bucket = {b.plan_steps: b.success_rate for b in reports["random"].buckets}
        for bucket in reports["optimal_planner"].buckets:
            assert bucket.success_rate >= random_by_bucket[bucket.plan_steps]

    def test_modes_share_identical_episode_seeds(self, mini):
        corpus, suite, graph = mini
        _, rows = run_benchmark(corpus, suite, graph, modes=("random", "pure"))
        seeds = {}
        for row in rows:
            seeds.setdefault(row.mode, []).append(row.episode_seed)
        assert seeds["random"] == seeds["pure"]

    def test_sequential_run_is_reproducible(self, mini):
        corpus, suite, graph = mini
        a = run_benchmark(corpus, suite, graph, modes=("brm",))
        b = run_benchmark(corpus, suite, graph, modes=("brm",))
        assert a[1] == b[1]

    def test_parallel_jobs_match_sequential(self, mini):
        corpus, suite, graph = mini
        _, seq = run_benchmark(corpus, suite, graph, modes=("brm", "random"))
        _, par = run_benchmark(corpus, suite, graph, modes=("brm", "random"), jobs=2)
        assert seq == par

    def test_unknown_mode_rejected(self, mini):
        corpus, suite, graph = mini
        with pytest.raises(ValueError, match="unknown agent mode"):
            run_benchmark(corpus, suite, graph, modes=("telepathic",))

    def test_empty_suite_rejected(self, mini):
        corpus, _, graph = mini
        with pytest.raises(ValueError, match="no episodes"):
            run_benchmark(corpus, [], graph)


class TestLearnPriorDriver:
    def _paired_rooms_corpus(self, concepts):
        """Corpus of identical tiny houses holding only the given concepts."""

        class FixedCorpus(Corpus):
            def house(self, seed):
                h = self._houses.get(seed)
                if h is None:
                    rooms = tuple(
                        Room(i, c, tuple((x, i * 6 + y) for x in range(6) for y in range(6)))
                        for i, c in enumerate(concepts)
                    )
                    doors = tuple(
                        ((x, i * 6 + 5), (x, i * 6 + 6))
                        for i in range(len(concepts) - 1)
                        for x in range(6)
                    )
                    h = House(6, 6 * len(concepts), rooms, doors, VOCAB, seed=seed)
                    self._houses[seed] = h
                return h

        return FixedCorpus(
            CorpusSpec(seeds=tuple(range(8)), base_seed=1, label="fixed")
        )

    def test_always_adjacent_pair_learns_high_prior(self):
        corpus = self._paired_rooms_corpus([0, 2])  # kitchen next to dining room
        prior = learn_prior_driver(corpus)
        assert prior[0, 2] >= 0.9

    def test_never_cooccurring_pair_clamps_to_floor(self):
        corpus = self._paired_rooms_corpus([0, 2])
        prior = learn_prior_driver(corpus)
        assert prior[3, 4] == pytest.approx(0.01)  # neither concept ever present

    def test_output_is_symmetric(self, small_corpus):
        prior = learn_prior_driver(small_corpus)
        assert np.allclose(prior, prior.T)
        assert prior.shape == (9, 9)


class TestGridSearch:
    def test_single_point_grid_returns_it(self, small_corpus):
        prior = learn_prior_driver(small_corpus)
        chosen, table = grid_search_obs(
            small_corpus,
            prior,
            psi0_grid=(0.01,),
            psi1_grid=(0.3,),
            episodes=10,
            min_per_bucket=1,
            horizon=120,
        )
        assert chosen == (0.01, 0.3)
        assert len(table) == 1

    def test_returned_point_is_from_the_grid(self, small_corpus):
        prior = learn_prior_driver(small_corpus)
        grid0, grid1 = (0.001, 0.05), (0.15, 0.45)
        chosen, table = grid_search_obs(
            small_corpus,
            prior,
            psi0_grid=grid0,
            psi1_grid=grid1,
            episodes=15,
            min_per_bucket=1,
            horizon=120,
        )
        assert chosen[0] in grid0 and chosen[1] in grid1
        assert len(table) == 4

    def test_clean_signals_prefer_low_false_negative_rate(self, small_corpus):
        # Noiseless detector plus oracle locomotion: the selected channel's
        # false-negative rate stays at the calibration's low end.
        prior = learn_prior_driver(small_corpus)
        chosen, _ = grid_search_obs(
            small_corpus,
            prior,
            locomotion_spec=ORACLE_SPEC,
            detector=NOISELESS_DETECTOR,
            psi1_grid=(0.05, 0.15, 0.3, 0.45),
            episodes=150,
            min_per_bucket=1,
            horizon=250,
            rng_seed=9,
        )
        assert chosen[1] <= 0.15

    def test_empty_grid_rejected(self, small_corpus):
        with pytest.raises(ValueError, match="empty grid"):
            grid_search_obs(small_corpus, learn_prior_driver(small_corpus), psi0_grid=())


class TestReportOutput:
    def make_rows(self):
        return [
            EpisodeRow(1, "brm", 1, True, 12, 10, 10 / 12),
            EpisodeRow(2, "brm", 2, False, 300, 40, 0.0),
            EpisodeRow(3, "brm", 1, True, 30, 30, 1.0),
        ]

    def test_summarize_buckets_and_overall(self):
        report = summarize(self.make_rows(), meta={"mode": "brm"})
        assert report.overall.episode_count == 3
        assert report.overall.success_rate == pytest.approx(2 / 3)
        assert report.overall.spl == pytest.approx((10 / 12 + 1.0) / 3)
        by_bucket = {b.plan_steps: b for b in report.buckets}
        assert by_bucket[1].episode_count == 2
        assert by_bucket[2].success_rate == 0.0
        assert by_bucket[2].mean_success_steps is None

    def test_report_dict_schema(self):
        report = summarize(self.make_rows(), meta={"mode": "brm"})
        obj = report_to_dict(report)
        assert set(obj) == {"meta", "buckets", "overall"}
        assert set(obj["overall"]) == {"n", "success_rate", "spl", "mean_steps"}
        for bucket in obj["buckets"]:
            assert set(bucket) == {"plan_steps", "n", "success_rate", "spl", "mean_steps"}
        json.dumps(obj)  # serializable

    def test_csv_format(self):
        text = rows_to_csv(self.make_rows())
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert lines[1] == "1,brm,1,1,12,10,0.8333333333333334"
        assert lines[2] == "2,brm,2,0,300,40,0.0"
