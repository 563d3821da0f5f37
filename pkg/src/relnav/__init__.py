"""Probabilistic concept-relation memory for navigation in procedural houses."""

from .concepts import (
    ConceptVocabulary,
    ConfidenceVector,
    RelationObservation,
    SemanticVector,
    SmoothingFilter,
    bit_or,
    extract_observations,
    smooth_filter,
)
from .graph import (
    EdgeBelief,
    EdgeParams,
    Plan,
    RelationGraph,
    deserialize,
    learn_prior,
    next_subgoal,
    plan,
    posterior,
    serialize,
)
from .house import (
    DetectorModel,
    EpisodeConfig,
    GroundTruthRelations,
    House,
    HouseParams,
    generate_house,
    ground_truth_relations,
    plan_distance,
    shortest_path_len,
    step,
    success_check,
)
from .locomotion import LocomotionSpec, act
from .agent import AgentConfig, EpisodeResult, run_episode
from .corpus import Corpus, CorpusSpec, build_split_corpora, load_corpora, write_corpus
from .evaluation import (
    MetricsReport,
    build_eval_suite,
    grid_search_obs,
    learn_prior_driver,
    run_benchmark,
    spl,
)

__version__ = "0.1.0"

__all__ = [
    "AgentConfig",
    "ConceptVocabulary",
    "ConfidenceVector",
    "Corpus",
    "CorpusSpec",
    "DetectorModel",
    "EdgeBelief",
    "EdgeParams",
    "EpisodeConfig",
    "EpisodeResult",
    "GroundTruthRelations",
    "House",
    "HouseParams",
    "LocomotionSpec",
    "MetricsReport",
    "Plan",
    "RelationGraph",
    "RelationObservation",
    "SemanticVector",
    "SmoothingFilter",
    "act",
    "bit_or",
    "build_eval_suite",
    "build_split_corpora",
    "deserialize",
    "extract_observations",
    "generate_house",
    "grid_search_obs",
    "ground_truth_relations",
    "learn_prior",
    "learn_prior_driver",
    "load_corpora",
    "next_subgoal",
    "plan",
    "plan_distance",
    "posterior",
    "run_benchmark",
    "run_episode",
    "serialize",
    "shortest_path_len",
    "smooth_filter",
    "spl",
    "step",
    "success_check",
    "write_corpus",
]
