"""Command-line entry point.

Subcommands cover the full pipeline: `gen-corpus` writes the house splits,
`learn-prior` fits relation priors from the training split, `tune` grid
searches the observation noise on the validation split, `eval` benchmarks
agent modes on the test split, and `trace` dumps a single instrumented
episode.  Every command is deterministic given the config file and seed.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import agent as agent_mod
from . import evaluation
from .agent import AgentConfig, MODES, run_episode
from .corpus import Corpus, build_split_corpora, load_corpora, write_corpus
from .evaluation import (
    DEFAULT_OBS_GRID,
    build_eval_suite,
    grid_search_obs,
    learn_prior_driver,
    report_to_dict,
    rows_to_csv,
    run_benchmark,
)
from .graph import DEFAULT_OBS_NOISE, RelationGraph, deserialize, serialize
from .house import DetectorModel, HouseParams
from .locomotion import LocomotionSpec

logger = logging.getLogger("relnav")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class DataError(RuntimeError):
    """Invalid or missing input data; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    seed: int
    out_dir: Path
    corpus_sizes: dict = field(default_factory=dict)
    house_params: HouseParams = field(default_factory=HouseParams)
    gt_budget: int = 300
    gt_trials: int = 50
    detector: DetectorModel = field(default_factory=DetectorModel)
    locomotion: LocomotionSpec = field(default_factory=LocomotionSpec)
    replan_period: int = 10
    horizon: int = 300
    termination: str = "environment"
    suite_episodes: int = 1000
    suite_min_per_bucket: int = 50
    tune_episodes: int = 200
    tune_min_per_bucket: int = 10
    psi0_grid: tuple = DEFAULT_OBS_GRID[0]
    psi1_grid: tuple = DEFAULT_OBS_GRID[1]
    manifest_path: Path | None = None
    graph_path: Path | None = None

    @property
    def manifest(self) -> Path:
        return self.manifest_path or self.out_dir / "manifest.json"

    @property
    def graph_file(self) -> Path:
        return self.graph_path or self.out_dir / "graph.json"


def load_run_config(path: Path) -> RunConfig:
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise DataError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed config JSON at byte {exc.pos}: {exc.msg}") from exc
    if "seed" not in obj:
        raise DataError("config must set an explicit seed (no wall-clock seeding)")
    out_dir = os.environ.get("RELNAV_OUT_DIR") or obj.get("out_dir")
    if not out_dir:
        raise DataError("config must set out_dir (or export RELNAV_OUT_DIR)")
    corpus = obj.get("corpus", {})
    params = HouseParams(
        width=corpus.get("width", 100),
        height=corpus.get("height", 28),
        min_room=corpus.get("min_room", 8),
        extra_door_prob=corpus.get("extra_door_prob", 0.20),
        door_width=corpus.get("door_width", 4),
    )
    det = obj.get("detector", {})
    loco = obj.get("locomotion", {})
    agent = obj.get("agent", {})
    suite = obj.get("suite", {})
    tune = obj.get("tune", {})
    paths = obj.get("paths", {})
    config = RunConfig(
        seed=int(obj["seed"]),
        out_dir=Path(out_dir),
        corpus_sizes={
            split: corpus[split] for split in ("train", "valid", "test") if split in corpus
        },
        house_params=params,
        gt_budget=corpus.get("budget", 300),
        gt_trials=corpus.get("trials", 50),
        detector=DetectorModel(
            hit_rate=det.get("hit_rate", 0.95),
            false_alarm_rate=det.get("false_alarm_rate", 0.02),
        ),
        locomotion=LocomotionSpec(
            kind=loco.get("kind", "scripted"),
            sight_radius=loco.get("sight_radius", 16),
            slip=loco.get("slip", 0.2),
        ),
        replan_period=agent.get("replan_period", 10),
        horizon=agent.get("horizon", 300),
        termination=agent.get("termination", "environment"),
        suite_episodes=suite.get("episodes", 1000),
        suite_min_per_bucket=suite.get("min_per_bucket", 50),
        tune_episodes=tune.get("episodes", 200),
        tune_min_per_bucket=tune.get("min_per_bucket", 10),
        psi0_grid=tuple(tune.get("psi0_grid", DEFAULT_OBS_GRID[0])),
        psi1_grid=tuple(tune.get("psi1_grid", DEFAULT_OBS_GRID[1])),
        manifest_path=Path(paths["manifest"]) if "manifest" in paths else None,
        graph_path=Path(paths["graph"]) if "graph" in paths else None,
    )
    for key, value in paths.items():
        if key not in ("manifest", "graph"):
            raise DataError(f"unknown path entry {key!r} in config")
        if not Path(value).exists():
            raise DataError(f"referenced path does not exist: {value}")
    return config


def _load_corpora(config: RunConfig) -> dict[str, Corpus]:
    if not config.manifest.exists():
        raise DataError(f"corpus manifest not found: {config.manifest} (run gen-corpus first)")
    return load_corpora(config.manifest)


def _load_graph(config: RunConfig) -> RelationGraph:
    if not config.graph_file.exists():
        raise DataError(f"graph file not found: {config.graph_file} (run learn-prior first)")
    return deserialize(config.graph_file.read_bytes())


# -- commands -----------------------------------------------------------------


def cmd_gen_corpus(config: RunConfig, force: bool) -> int:
    out = config.out_dir
    manifest = config.manifest
    if not force and (manifest.exists() or (out / "houses").exists()):
        raise DataError(f"output {out} already holds a corpus; pass --force to overwrite")
    corpora = build_split_corpora(
        config.seed,
        params=config.house_params,
        sizes=config.corpus_sizes or None,
        gt_budget=config.gt_budget,
        gt_trials=config.gt_trials,
    )
    path = write_corpus(out, corpora)
    for split, corpus in corpora.items():
        logger.info("split %s: %d houses", split, len(corpus))
    logger.info("manifest written to %s", path)
    return EXIT_OK


def cmd_learn_prior(config: RunConfig) -> int:
    corpora = _load_corpora(config)
    if "train" not in corpora:
        raise DataError("manifest has no train split")
    train = corpora["train"]
    prior = learn_prior_driver(train)
    graph = RelationGraph(train.vocabulary, prior, DEFAULT_OBS_NOISE)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    config.graph_file.write_bytes(serialize(graph))
    vocab = train.vocabulary
    for concept in range(vocab.size):
        others = [(prior[concept][other], other) for other in range(vocab.size) if other != concept]
        others.sort(reverse=True)
        top = ", ".join(f"{vocab.label(o)}={p:.2f}" for p, o in others[:3])
        bottom = ", ".join(f"{vocab.label(o)}={p:.2f}" for p, o in others[-3:])
        logger.info("%s: most nearby [%s]; least nearby [%s]", vocab.label(concept), top, bottom)
    logger.info("graph written to %s", config.graph_file)
    return EXIT_OK


def cmd_tune(config: RunConfig, jobs: int) -> int:
    corpora = _load_corpora(config)
    if "valid" not in corpora:
        raise DataError("manifest has no valid split")
    graph = _load_graph(config)
    chosen, table = grid_search_obs(
        corpora["valid"],
        graph.prior_matrix(),
        locomotion_spec=config.locomotion,
        detector=config.detector,
        psi0_grid=config.psi0_grid,
        psi1_grid=config.psi1_grid,
        horizon=config.horizon,
        replan_period=config.replan_period,
        episodes=config.tune_episodes,
        min_per_bucket=config.tune_min_per_bucket,
        rng_seed=config.seed,
        jobs=jobs,
    )
    for row in table:
        logger.info(
            "psi_obs=(%g, %g): success=%.3f spl=%.3f",
            row["psi_obs_0"],
            row["psi_obs_1"],
            row["success_rate"],
            row["spl"],
        )
    tuned = RelationGraph(graph.vocabulary, graph.prior_matrix(), chosen)
    config.graph_file.write_bytes(serialize(tuned))
    logger.info("selected psi_obs=(%g, %g); graph updated at %s", *chosen, config.graph_file)
    return EXIT_OK


def cmd_eval(config: RunConfig, modes: list[str], jobs: int) -> int:
    corpora = _load_corpora(config)
    if "test" not in corpora:
        raise DataError("manifest has no test split")
    graph = _load_graph(config)
    test = corpora["test"]
    suite = build_eval_suite(
        test,
        episodes_total=config.suite_episodes,
        min_per_bucket=config.suite_min_per_bucket,
        rng_seed=config.seed,
        horizon=config.horizon,
        replan_period=config.replan_period,
    )
    reports, rows = run_benchmark(
        test,
        suite,
        graph,
        modes=modes,
        locomotion_spec=config.locomotion,
        detector=config.detector,
        termination=config.termination,
        jobs=jobs,
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    for mode, report in reports.items():
        path = config.out_dir / f"report_{mode}.json"
        path.write_text(json.dumps(report_to_dict(report), sort_keys=True, indent=2))
        logger.info(
            "%s: success=%.3f spl=%.3f over %d episodes -> %s",
            mode,
            report.overall.success_rate,
            report.overall.spl,
            report.overall.episode_count,
            path,
        )
    csv_path = config.out_dir / "episodes.csv"
    csv_path.write_text(rows_to_csv(rows))
    logger.info("per-episode rows -> %s", csv_path)
    return EXIT_OK


def cmd_trace(config: RunConfig, episode_index: int, mode: str) -> int:
    corpora = _load_corpora(config)
    graph = _load_graph(config)
    test = corpora["test"]
    suite = build_eval_suite(
        test,
        episodes_total=config.suite_episodes,
        min_per_bucket=config.suite_min_per_bucket,
        rng_seed=config.seed,
        horizon=config.horizon,
        replan_period=config.replan_period,
    )
    if not 0 <= episode_index < len(suite):
        raise DataError(f"episode index {episode_index} outside suite of {len(suite)}")
    episode = suite[episode_index]
    house = test.house(episode.house_seed)
    agent = AgentConfig(
        mode=mode,
        replan_period=config.replan_period,
        horizon=config.horizon,
        termination=config.termination,
    )
    run_graph = graph
    if mode == agent_mod.MODE_OPTIMAL_PLANNER:
        run_graph = agent_mod.ground_truth_graph(
            test.vocabulary, test.gt(episode.house_seed), graph.obs_noise
        )
    elif mode == agent_mod.MODE_UNIFORM_PRIOR:
        run_graph = RelationGraph.uniform(test.vocabulary, 0.5, graph.obs_noise)
    sink: list[dict] = []
    result = run_episode(
        house, episode, agent, run_graph, config.locomotion, config.detector, trace_sink=sink
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    path = config.out_dir / f"trace_{episode_index}.jsonl"
    header = {
        "meta": {
            "episode_index": episode_index,
            "house_seed": episode.house_seed,
            "start_cell": list(episode.start_cell),
            "target": episode.target,
            "mode": mode,
            "horizon": agent.horizon,
            "replan_period": agent.replan_period,
            "psi_obs": list(run_graph.obs_noise),
            "prior": [p.psi_prior for p in run_graph._params],
            "success": result.success,
            "steps": result.steps_taken,
        }
    }
    with path.open("w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in sink:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    logger.info(
        "episode %d (%s): success=%s steps=%d -> %s",
        episode_index,
        mode,
        result.success,
        result.steps_taken,
        path,
    )
    return EXIT_OK


# -- argument plumbing -----------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="relnav", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, type=Path, help="run-config JSON")
        return p

    p = add("gen-corpus", "generate house splits and manifest")
    p.add_argument("--force", action="store_true", help="overwrite an existing corpus")

    add("learn-prior", "fit relation priors from the train split")

    p = add("tune", "grid search observation noise on the valid split")
    p.add_argument("--jobs", type=int, default=1)

    p = add("eval", "benchmark agent modes on the test split")
    p.add_argument("--modes", default="brm", help="comma-separated subset of: " + ",".join(MODES))
    p.add_argument("--horizon", type=int, default=None, help="override config horizon")
    p.add_argument("--replan", type=int, default=None, help="override replan period")
    p.add_argument("--jobs", type=int, default=1)

    p = add("trace", "dump one instrumented episode as JSON lines")
    p.add_argument("--episode-index", type=int, required=True)
    p.add_argument("--mode", default="brm", choices=MODES)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = load_run_config(args.config)
        if args.command == "eval":
            if args.horizon is not None:
                config.horizon = args.horizon
            if args.replan is not None:
                config.replan_period = args.replan
            modes = [m.strip() for m in args.modes.split(",") if m.strip()]
            for m in modes:
                if m not in MODES:
                    parser.error(f"unknown mode {m!r}")
            return cmd_eval(config, modes, args.jobs)
        if args.command == "gen-corpus":
            return cmd_gen_corpus(config, args.force)
        if args.command == "learn-prior":
            return cmd_learn_prior(config)
        if args.command == "tune":
            return cmd_tune(config, args.jobs)
        if args.command == "trace":
            return cmd_trace(config, args.episode_index, args.mode)
        raise AssertionError(f"unhandled command {args.command}")
    except DataError as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
