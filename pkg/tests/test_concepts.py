import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relnav.concepts import (
    ConceptVocabulary,
    ConfidenceVector,
    RelationObservation,
    SemanticVector,
    SmoothingFilter,
    bit_or,
    extract_observations,
    smooth_filter,
)

K = 8


def conf(scores):
    return ConfidenceVector(tuple(scores))


def one_hot_stream(index, scores):
    """Stream of confidence vectors with concept `index` following `scores`."""
    out = []
    for s in scores:
        row = [0.0] * K
        row[index] = s
        out.append(conf(row))
    return out


class TestVocabulary:
    def test_default_has_eight_room_types(self):
        v = ConceptVocabulary.default()
        assert v.size == 8
        assert v.node_count == 9
        assert v.unknown_index == 8
        assert v.label(8) == "unknown"

    def test_names_must_be_unique_and_non_empty(self):
        with pytest.raises(ValueError):
            ConceptVocabulary(("kitchen", "kitchen"))
        with pytest.raises(ValueError):
            ConceptVocabulary(("kitchen", ""))
        with pytest.raises(ValueError):
            ConceptVocabulary(())

    def test_json_round_trip_is_plain_string_array(self):
        v = ConceptVocabulary.default()
        data = json.loads(v.to_json())
        assert data == list(v.names)
        assert ConceptVocabulary.from_json(v.to_json()) == v

    def test_from_json_rejects_non_string_entries(self):
        with pytest.raises(ValueError):
            ConceptVocabulary.from_json("[1, 2]")


class TestConfidenceVector:
    def test_rejects_out_of_range_scores(self):
        with pytest.raises(ValueError):
            conf([0.5] * 7 + [1.2])
        with pytest.raises(ValueError):
            conf([-0.1] + [0.0] * 7)


class TestSemanticVector:
    def test_unknown_bit_derived_from_concept_bits(self):
        v = SemanticVector.from_concept_bits([0] * K)
        assert v.unknown == 1
        v = SemanticVector.from_concept_bits([0, 1] + [0] * 6)
        assert v.unknown == 0
        assert v.set_indices() == (1,)

    def test_rejects_non_binary_bits(self):
        with pytest.raises(ValueError):
            SemanticVector((0, 2, 0))


class TestSmoothFilter:
    def test_three_consecutive_high_scores_set_the_bit(self):
        out = smooth_filter(one_hot_stream(2, [0.95, 0.95, 0.95]))
        assert out[2].bits[2] == 1
        assert out[2].unknown == 0

    def test_broken_persistence_keeps_bit_off(self):
        out = smooth_filter(one_hot_stream(2, [0.95, 0.85, 0.95]))
        assert all(v.bits[2] == 0 for v in out)

    def test_all_zero_scores_yield_unknown_only(self):
        out = smooth_filter(one_hot_stream(0, [0.0, 0.0, 0.0]))
        assert out[2].bits == (0,) * K + (1,)

    def test_warmup_steps_report_concept_bits_off(self):
        out = smooth_filter(one_hot_stream(1, [0.99, 0.99, 0.99, 0.99]))
        assert out[0].bits[1] == 0
        assert out[1].bits[1] == 0
        assert out[2].bits[1] == 1
        assert out[3].bits[1] == 1

    def test_bit_turns_off_as_soon_as_run_breaks(self):
        out = smooth_filter(one_hot_stream(1, [0.95, 0.95, 0.95, 0.2, 0.95]))
        assert out[2].bits[1] == 1
        assert out[3].bits[1] == 0
        assert out[4].bits[1] == 0

    def test_empty_stream_yields_empty_output(self):
        assert smooth_filter([]) == []

    def test_online_filter_matches_batch(self):
        stream = one_hot_stream(3, [0.91, 0.95, 0.99, 0.5, 0.92, 0.93, 0.94])
        filt = SmoothingFilter(K)
        online = [filt.push(c) for c in stream]
        assert online == smooth_filter(stream)

    @given(
        scores=st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=20),
        lo=st.floats(min_value=0.1, max_value=0.5),
        hi=st.floats(min_value=0.5, max_value=0.99),
    )
    @settings(max_examples=60)
    def test_raising_threshold_never_turns_bits_on(self, scores, lo, hi):
        stream = one_hot_stream(0, scores)
        low = smooth_filter(stream, threshold=min(lo, hi))
        high = smooth_filter(stream, threshold=max(lo, hi))
        for a, b in zip(low, high):
            assert b.bits[0] <= a.bits[0]

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            SmoothingFilter(K, threshold=0.0)
        with pytest.raises(ValueError):
            SmoothingFilter(K, persistence=0)


def sem(*set_bits, unknown=0, n=K + 1):
    bits = [0] * n
    for i in set_bits:
        bits[i] = 1
    bits[-1] = unknown
    return SemanticVector(tuple(bits))


class TestBitOr:
    def test_or_of_two_single_bit_vectors(self):
        assert bit_or([sem(0), sem(1)]) == sem(0, 1)

    def test_single_vector_is_identity(self):
        v = sem(3, unknown=0)
        assert bit_or([v]) == v

    def test_unknown_bit_is_recorded_not_recomputed(self):
        merged = bit_or([sem(unknown=1), sem(0)])
        assert merged.bits[0] == 1
        assert merged.unknown == 1

    def test_empty_window_raises(self):
        with pytest.raises(ValueError, match="empty evidence window"):
            bit_or([])

    @given(st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4), min_size=1, max_size=6))
    @settings(max_examples=50)
    def test_idempotent_commutative_associative(self, rows):
        vecs = [SemanticVector(tuple(r)) for r in rows]
        merged = bit_or(vecs)
        assert bit_or(vecs + vecs) == merged
        assert bit_or(list(reversed(vecs))) == merged
        assert bit_or([merged]) == merged


class TestExtractObservations:
    def test_two_set_bits_full_enumeration(self):
        # Hand enumeration over all 36 pairs of 9 nodes for B = {0, 1}:
        # one positive for (0,1), negatives against every other node, and
        # nothing for pairs among unseen nodes.
        obs = extract_observations(sem(0, 1))
        expected = {(0, 1): 1}
        for other in range(2, 9):
            expected[(0, other)] = 0
            expected[(1, other)] = 0
        assert {(o.i, o.j): o.value for o in obs} == expected
        assert len(obs) == 15

    def test_single_set_bit_yields_negatives_only(self):
        obs = extract_observations(sem(4))
        assert all(o.value == 0 for o in obs)
        assert all(4 in (o.i, o.j) for o in obs)
        assert len(obs) == 8

    def test_all_zero_vector_yields_nothing(self):
        assert extract_observations(SemanticVector((0,) * 9)) == []

    @given(st.lists(st.integers(0, 1), min_size=9, max_size=9))
    @settings(max_examples=60)
    def test_observation_counts_match_popcount_formula(self, bits):
        v = SemanticVector(tuple(bits))
        obs = extract_observations(v)
        p = sum(bits)
        n = len(bits)
        assert len(obs) <= n * (n - 1) // 2
        assert sum(1 for o in obs if o.value == 1) == p * (p - 1) // 2
        assert sum(1 for o in obs if o.value == 0) == p * (n - p)


class TestRelationObservation:
    def test_pair_is_canonicalized(self):
        o = RelationObservation(5, 2, 1)
        assert (o.i, o.j) == (2, 5)

    def test_self_relation_rejected(self):
        with pytest.raises(ValueError, match="self-relation"):
            RelationObservation(3, 3, 1)

    def test_value_must_be_binary(self):
        with pytest.raises(ValueError):
            RelationObservation(0, 1, 2)
