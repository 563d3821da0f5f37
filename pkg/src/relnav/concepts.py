"""Concept vocabulary, semantic detection vectors and relation evidence.

The navigation world is described by a small set of semantic concepts (room
types).  A noisy detector emits per-concept confidence scores each step; a
temporal smoothing filter turns those into binary semantic vectors, which are
OR-accumulated over short windows and finally converted into binary relation
observations between concept pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_CONCEPTS = (
    "kitchen",
    "living room",
    "dining room",
    "bedroom",
    "bathroom",
    "office",
    "garage",
    "outdoor",
)

UNKNOWN_LABEL = "unknown"

SMOOTH_THRESHOLD = 0.9
SMOOTH_PERSISTENCE = 3


@dataclass(frozen=True)
class ConceptVocabulary:
    """Ordered set of K concept labels plus an implicit trailing "unknown" node.

    Concept ids are dense integers 0..K-1; id K is the unknown node that
    represents unclassifiable surroundings.
    """

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("vocabulary must contain at least one concept")
        if any(not n for n in self.names):
            raise ValueError("concept names must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise ValueError("concept names must be unique")

    @classmethod
    def default(cls) -> "ConceptVocabulary":
        return cls(DEFAULT_CONCEPTS)

    @property
    def size(self) -> int:
        """Number of named concepts (K)."""
        return len(self.names)

    @property
    def node_count(self) -> int:
        """Total graph nodes including the unknown node (K+1)."""
        return len(self.names) + 1

    @property
    def unknown_index(self) -> int:
        return len(self.names)

    def label(self, concept: int) -> str:
        if concept == self.unknown_index:
            return UNKNOWN_LABEL
        return self.names[concept]

    def index(self, name: str) -> int:
        if name == UNKNOWN_LABEL:
            return self.unknown_index
        return self.names.index(name)

    def to_json(self) -> str:
        return json.dumps(list(self.names))

    @classmethod
    def from_json(cls, text: str) -> "ConceptVocabulary":
        data = json.loads(text)
        if not isinstance(data, list) or not all(isinstance(n, str) for n in data):
            raise ValueError("vocabulary JSON must be an array of strings")
        return cls(tuple(data))


@dataclass(frozen=True)
class ConfidenceVector:
    """Per-concept detector confidences for one time step, each in [0, 1]."""

    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        for s in self.scores:
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"confidence {s!r} outside [0, 1]")


@dataclass(frozen=True)
class SemanticVector:
    """K+1 binary flags: one per concept plus the trailing unknown bit.

    Vectors produced by the smoothing filter satisfy: unknown bit = 1 iff all
    concept bits are 0.  OR-accumulated evidence vectors (see :func:`bit_or`)
    keep the historical unknown bit instead and may violate that rule.
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.bits) < 2:
            raise ValueError("semantic vector needs at least one concept plus unknown")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("semantic bits must be 0 or 1")

    @classmethod
    def from_concept_bits(cls, concept_bits: Sequence[int]) -> "SemanticVector":
        """Build a vector from K concept bits, deriving the unknown bit."""
        bits = tuple(concept_bits)
        unknown = 0 if any(bits) else 1
        return cls(bits + (unknown,))

    @property
    def unknown(self) -> int:
        return self.bits[-1]

    def set_indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def popcount(self) -> int:
        return sum(self.bits)


@dataclass(frozen=True)
class RelationObservation:
    """One binary co-occurrence sample for the unordered concept pair (i, j)."""

    i: int
    j: int
    value: int

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise ValueError("self-relation")
        if self.i > self.j:
            i, j = self.j, self.i
            object.__setattr__(self, "i", i)
            object.__setattr__(self, "j", j)
        if self.i < 0:
            raise ValueError("concept ids must be non-negative")
        if self.value not in (0, 1):
            raise ValueError("observation value must be 0 or 1")


class SmoothingFilter:
    """Online temporal smoothing of detector confidences.

    A concept bit turns on only after the confidence stayed at or above
    `threshold` for `persistence` consecutive steps, and turns back off as
    soon as that run is broken (sliding window, no latch).  Steps before
    `persistence` frames have accumulated always report concept bits 0.
    """

    def __init__(
        self,
        k: int,
        threshold: float = SMOOTH_THRESHOLD,
        persistence: int = SMOOTH_PERSISTENCE,
    ) -> None:
        if not 0.0 < threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")
        if persistence < 1:
            raise ValueError("persistence must be >= 1")
        self.k = k
        self.threshold = threshold
        self.persistence = persistence
        self._runs = [0] * k

    def reset(self) -> None:
        self._runs = [0] * self.k

    def push(self, confidence: ConfidenceVector) -> SemanticVector:
        if len(confidence.scores) != self.k:
            raise ValueError("confidence width does not match vocabulary size")
        runs = self._runs
        threshold = self.threshold
        persistence = self.persistence
        bits = [0] * self.k
        any_set = False
        for i, score in enumerate(confidence.scores):
            if score >= threshold:
                runs[i] += 1
                if runs[i] >= persistence:
                    bits[i] = 1
                    any_set = True
            else:
                runs[i] = 0
        return SemanticVector(tuple(bits) + ((0,) if any_set else (1,)))


def smooth_filter(
    stream: Iterable[ConfidenceVector],
    threshold: float = SMOOTH_THRESHOLD,
    persistence: int = SMOOTH_PERSISTENCE,
) -> list[SemanticVector]:
    """Smooth a whole confidence stream into semantic vectors.

    Empty streams yield an empty list.
    """
    out: list[SemanticVector] = []
    filt: SmoothingFilter | None = None
    for confidence in stream:
        if filt is None:
            filt = SmoothingFilter(len(confidence.scores), threshold, persistence)
        out.append(filt.push(confidence))
    return out


def bit_or(window: Sequence[SemanticVector]) -> SemanticVector:
    """OR all semantic vectors of an evidence window, unknown bit included.

    The result records every region visited during the window; its unknown
    bit is the OR of the inputs' unknown bits rather than being re-derived.
    """
    if not window:
        raise ValueError("empty evidence window")
    width = len(window[0].bits)
    acc = [0] * width
    for vec in window:
        if len(vec.bits) != width:
            raise ValueError("mixed semantic vector widths in window")
        for i, b in enumerate(vec.bits):
            if b:
                acc[i] = 1
    return SemanticVector(tuple(acc))


def extract_observations(evidence: SemanticVector) -> list[RelationObservation]:
    """Turn an OR-accumulated evidence vector into pairwise relation samples.

    Two concepts seen in the same window yield a positive sample; a seen and
    an unseen concept yield a negative one.  Pairs where neither concept was
    seen carry no evidence and are skipped.
    """
    bits = evidence.bits
    n = len(bits)
    out: list[RelationObservation] = []
    for i in range(n):
        for j in range(i + 1, n):
            if bits[i] and bits[j]:
                out.append(RelationObservation(i, j, 1))
            elif bits[i] != bits[j]:
                out.append(RelationObservation(i, j, 0))
    return out
