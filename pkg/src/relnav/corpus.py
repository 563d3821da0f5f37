"""House corpora: seed-derived environment sets with train/valid/test splits.

A corpus is fully determined by its spec (house parameters plus an explicit
seed list), so houses and their ground-truth relation matrices can be
rebuilt identically in any process.  Manifests and per-house JSON files are
the on-disk interchange format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .concepts import ConceptVocabulary
from .house import (
    EXPLORATION_BUDGET,
    EXPLORATION_TRIALS,
    GroundTruthRelations,
    House,
    HouseParams,
    generate_house,
    ground_truth_relations,
)

DEFAULT_SPLIT_SIZES = {"train": 200, "valid": 20, "test": 50}


@dataclass(frozen=True)
class CorpusSpec:
    seeds: tuple[int, ...]
    params: HouseParams = field(default_factory=HouseParams)
    vocabulary: ConceptVocabulary = field(default_factory=ConceptVocabulary.default)
    gt_budget: int = EXPLORATION_BUDGET
    gt_trials: int = EXPLORATION_TRIALS
    base_seed: int = 0
    label: str = ""

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("corpus needs at least one house seed")


class Corpus:
    """Lazily generated houses plus cached per-house ground-truth relations."""

    def __init__(self, spec: CorpusSpec) -> None:
        self.spec = spec
        self._houses: dict[int, House] = {}
        self._gt: dict[int, GroundTruthRelations] = {}

    @property
    def seeds(self) -> tuple[int, ...]:
        return self.spec.seeds

    @property
    def vocabulary(self) -> ConceptVocabulary:
        return self.spec.vocabulary

    def __len__(self) -> int:
        return len(self.spec.seeds)

    def house(self, seed: int) -> House:
        h = self._houses.get(seed)
        if h is None:
            h = generate_house(seed, self.spec.params, self.spec.vocabulary)
            self._houses[seed] = h
        return h

    def houses(self) -> list[House]:
        return [self.house(s) for s in self.seeds]

    def gt_seed(self, house_seed: int) -> int:
        """Stable exploration seed for one house's relation sampling."""
        return (house_seed * 2654435761 + self.spec.base_seed * 40503 + 97) % (1 << 31)

    def gt(self, seed: int) -> GroundTruthRelations:
        g = self._gt.get(seed)
        if g is None:
            g = ground_truth_relations(
                self.house(seed), self.spec.gt_budget, self.spec.gt_trials, self.gt_seed(seed)
            )
            self._gt[seed] = g
        return g


def default_split_seeds(
    global_seed: int,
    n_train: int = DEFAULT_SPLIT_SIZES["train"],
    n_valid: int = DEFAULT_SPLIT_SIZES["valid"],
    n_test: int = DEFAULT_SPLIT_SIZES["test"],
) -> dict[str, tuple[int, ...]]:
    """Disjoint, reproducible seed ranges for the three splits."""
    base = global_seed * 1_000_000
    train = tuple(range(base, base + n_train))
    valid = tuple(range(base + n_train, base + n_train + n_valid))
    test = tuple(range(base + n_train + n_valid, base + n_train + n_valid + n_test))
    return {"train": train, "valid": valid, "test": test}


def build_split_corpora(
    global_seed: int,
    params: HouseParams | None = None,
    vocabulary: ConceptVocabulary | None = None,
    sizes: dict[str, int] | None = None,
    gt_budget: int = EXPLORATION_BUDGET,
    gt_trials: int = EXPLORATION_TRIALS,
) -> dict[str, Corpus]:
    sizes = dict(DEFAULT_SPLIT_SIZES, **(sizes or {}))
    seeds = default_split_seeds(global_seed, sizes["train"], sizes["valid"], sizes["test"])
    params = params or HouseParams()
    vocabulary = vocabulary or ConceptVocabulary.default()
    return {
        split: Corpus(
            CorpusSpec(
                seeds=s,
                params=params,
                vocabulary=vocabulary,
                gt_budget=gt_budget,
                gt_trials=gt_trials,
                base_seed=global_seed,
                label=split,
            )
        )
        for split, s in seeds.items()
    }


def manifest_dict(corpora: dict[str, Corpus]) -> dict:
    any_spec = next(iter(corpora.values())).spec
    return {
        "base_seed": any_spec.base_seed,
        "vocabulary": list(any_spec.vocabulary.names),
        "params": {
            "width": any_spec.params.width,
            "height": any_spec.params.height,
            "min_room": any_spec.params.min_room,
            "extra_door_prob": any_spec.params.extra_door_prob,
        },
        "gt": {"budget": any_spec.gt_budget, "trials": any_spec.gt_trials},
        "splits": {split: list(c.seeds) for split, c in corpora.items()},
    }


def write_corpus(out_dir: Path, corpora: dict[str, Corpus], houses: bool = True) -> Path:
    """Write the manifest plus (optionally) one JSON file per house."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest_dict(corpora), sort_keys=True, indent=2))
    if houses:
        house_dir = out_dir / "houses"
        house_dir.mkdir(exist_ok=True)
        for corpus in corpora.values():
            for seed in corpus.seeds:
                (house_dir / f"house_{seed}.json").write_text(corpus.house(seed).to_json())
    return manifest_path


def load_corpora(manifest_path: Path) -> dict[str, Corpus]:
    """Rebuild corpora from a manifest; houses regenerate from their seeds."""
    obj = json.loads(Path(manifest_path).read_text())
    vocabulary = ConceptVocabulary(tuple(obj["vocabulary"]))
    p = obj["params"]
    params = HouseParams(p["width"], p["height"], p["min_room"], p["extra_door_prob"])
    return {
        split: Corpus(
            CorpusSpec(
                seeds=tuple(seeds),
                params=params,
                vocabulary=vocabulary,
                gt_budget=obj["gt"]["budget"],
                gt_trials=obj["gt"]["trials"],
                base_seed=obj["base_seed"],
                label=split,
            )
        )
        for split, seeds in obj["splits"].items()
    }
