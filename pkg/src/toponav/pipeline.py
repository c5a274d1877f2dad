"""End-to-end episode execution and benchmark orchestration.

One episode runs extraction -> goal retrieval -> hypothesis generation ->
length filtering -> ranking (Approach I alignment or Approach II rating)
-> nDTW scoring against the ground truth, and emits a JSON trace from
which the ranking can be reproduced offline. Benchmarks fan episodes out
over a worker pool and fold results in sorted episode order, so outputs
are byte-identical across reruns and worker counts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .alignment import (
    filter_hypotheses,
    rank_approach1,
    rank_approach2,
)
from .dataset import Episode
from .errors import InvalidInputError
from .metrics import (
    EpisodeResult,
    MetricConfig,
    OverallRow,
    SceneReport,
    episode_success,
    hypo_gen_hit,
    ndtw,
    overall_row,
    precision_at_k,
    scene_report,
)
from .providers.base import PanoramaEmbedder, ProviderSet, rank_goal_candidates
from .providers.oracle import OracleEmbedder
from .report import render_csv, render_text
from .topomap import NodePath, PathHypothesis, TopoGraph, generate_hypotheses
from .world import SyntheticWorld

logger = logging.getLogger(__name__)

APPROACH_ALIGNMENT = "I"
APPROACH_RATING = "II"

RESULTS_FILENAME = "results.jsonl"
REPORT_TEXT_FILENAME = "report.txt"
REPORT_CSV_FILENAME = "report.csv"


@dataclass(frozen=True)
class RunConfig:
    """Pipeline-level knobs shared by single runs and benchmarks."""

    k: int = 3
    approach: str = APPROACH_ALIGNMENT
    seed: int = 0
    metric: MetricConfig = field(default_factory=MetricConfig)
    scenes: Optional[tuple[str, ...]] = None
    episodes: Optional[tuple[str, ...]] = None
    workers: int = 4
    trace_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidInputError(f"k must be >= 1, got {self.k}")
        if self.approach not in (APPROACH_ALIGNMENT, APPROACH_RATING):
            raise InvalidInputError(
                f"approach must be {APPROACH_ALIGNMENT!r} or {APPROACH_RATING!r}, "
                f"got {self.approach!r}"
            )
        if self.workers < 1:
            raise InvalidInputError(f"workers must be >= 1, got {self.workers}")


def episode_seed(seed: int, episode_id: str) -> int:
    """Per-episode RNG seed independent of scheduling and episode order."""
    digest = hashlib.blake2b(
        f"{seed}\x1f{episode_id}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


def run_episode(
    episode: Episode,
    graph: TopoGraph,
    cfg: RunConfig,
    providers: ProviderSet,
) -> EpisodeResult:
    """Execute the full pipeline for one episode.

    An episode with no surviving hypotheses is not an error: it scores
    nDTW for the stationary path ``[start]`` and is flagged failed, which
    keeps per-scene episode counts fixed.
    """
    diagnostics: list[str] = []
    landmarks = providers.extractor.extract_landmarks(episode.instruction)

    hypotheses: list[PathHypothesis] = []
    goal_scores = []
    if landmarks.phrases:
        goal_scores = rank_goal_candidates(
            providers.embedder, graph, landmarks.phrases[-1], cfg.k
        )
        if all(s.score == 0.0 for s in goal_scores):
            diagnostics.append(
                f"last landmark {landmarks.phrases[-1]!r} matched no panoramas "
                "(all retrieval scores 0)"
            )
        hypotheses = generate_hypotheses(
            graph, episode.start_node, [s.node_id for s in goal_scores], diagnostics
        )
    else:
        diagnostics.append("no landmarks extracted from instruction")

    gt_path = NodePath.from_ids(graph, episode.gt_path)
    contains_gt = bool(hypotheses) and hypo_gen_hit(hypotheses, gt_path, cfg.metric)

    surviving = filter_hypotheses(hypotheses, landmarks) if landmarks.phrases else []
    ranked = None
    if surviving:
        rng_seed = episode_seed(cfg.seed, episode.episode_id)
        if cfg.approach == APPROACH_ALIGNMENT:
            ranked = rank_approach1(surviving, landmarks, providers.grounder, rng_seed)
        else:
            ranked = rank_approach2(
                surviving, episode.instruction, landmarks, providers.rater, rng_seed
            )
        chosen_path = ranked.chosen.path
        repeats_ndtw = tuple(
            ndtw(pick.path.positions, gt_path.positions, cfg.metric)
            for pick in ranked.repeats
        )
        tie_count = ranked.tie_count
    else:
        diagnostics.append("no surviving hypotheses; scoring stationary path")
        chosen_path = NodePath.from_ids(graph, [episode.start_node])
        repeats_ndtw = (ndtw(chosen_path.positions, gt_path.positions, cfg.metric),)
        tie_count = 1

    ndtw_value = repeats_ndtw[0]
    result = EpisodeResult(
        episode_id=episode.episode_id,
        scene_id=episode.scene_id,
        ndtw=ndtw_value,
        success=episode_success(ndtw_value, cfg.metric),
        hypo_contains_gt=contains_gt,
        chosen_path=chosen_path,
        repeats_ndtw=repeats_ndtw,
        tie_count=tie_count,
    )
    if cfg.trace_dir is not None:
        _write_trace(
            Path(cfg.trace_dir),
            episode,
            cfg,
            landmarks.phrases,
            goal_scores,
            hypotheses,
            surviving,
            ranked,
            result,
            diagnostics,
        )
    return result


def _write_trace(
    trace_dir, episode, cfg, phrases, goal_scores, hypotheses, surviving, ranked,
    result, diagnostics,
) -> None:
    surviving_ids = {id(h) for h in surviving}
    entries = []
    for hypothesis in hypotheses:
        entry = {
            "node_ids": list(hypothesis.path.node_ids),
            "goal_rank": hypothesis.goal_rank,
            "filtered_out": id(hypothesis) not in surviving_ids,
            "alignment": hypothesis.alignment,
            "rating": hypothesis.rating,
            "grounding_matrix": None,
        }
        if hypothesis.matrix is not None:
            entry["grounding_matrix"] = {
                "entries": [list(row) for row in hypothesis.matrix.entries],
                "landmark_labels": list(hypothesis.matrix.landmark_labels),
                "node_ids": list(hypothesis.matrix.node_ids),
            }
        entries.append(entry)
    trace = {
        "episode_id": episode.episode_id,
        "scene_id": episode.scene_id,
        "instruction": episode.instruction,
        "approach": cfg.approach,
        "seed": cfg.seed,
        "k": cfg.k,
        "landmarks": list(phrases),
        "goal_candidates": [
            {"node_id": s.node_id, "score": s.score} for s in goal_scores
        ],
        "diagnostics": diagnostics,
        "hypotheses": entries,
        "tie_count": result.tie_count,
        "repeat_choices": (
            [list(pick.path.node_ids) for pick in ranked.repeats] if ranked else []
        ),
        "chosen_path": list(result.chosen_path.node_ids),
        "gt_path": list(episode.gt_path),
        "ndtw": result.ndtw,
        "repeats_ndtw": list(result.repeats_ndtw),
        "success": result.success,
        "hypo_contains_gt": result.hypo_contains_gt,
    }
    trace_dir.mkdir(parents=True, exist_ok=True)
    path = trace_dir / f"{episode.episode_id}.json"
    path.write_text(json.dumps(trace, indent=2, sort_keys=True))


@dataclass
class BenchScene:
    """One scene's inputs for a benchmark run."""

    scene_id: str
    graph: TopoGraph
    episodes: list[Episode]
    providers: ProviderSet

    @classmethod
    def from_world(
        cls,
        world: SyntheticWorld,
        flip_probability: float = 0.0,
        noise_seed: int = 0,
    ) -> "BenchScene":
        return cls(
            scene_id=world.scene_id,
            graph=world.graph,
            episodes=list(world.episodes),
            providers=world.oracle_providers(flip_probability, noise_seed),
        )


@dataclass
class BenchmarkRun:
    results: list[EpisodeResult]
    reports: list[SceneReport]
    overall: OverallRow

    def results_jsonl(self) -> str:
        return "".join(
            json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.results
        )


def run_benchmark(
    scenes: Sequence[BenchScene],
    cfg: RunConfig,
    out_dir: Optional[str | Path] = None,
) -> BenchmarkRun:
    """Run every selected episode and aggregate per scene plus overall.

    Episodes run in parallel on a bounded pool; results are folded in
    sorted (scene, episode) order so the machine-readable output is
    byte-identical for a given config and seed. Scenes with zero episodes
    after filtering are skipped with a warning.
    """
    jobs: list[tuple[BenchScene, Episode]] = []
    for scene in scenes:
        if cfg.scenes is not None and scene.scene_id not in cfg.scenes:
            continue
        selected = [
            e for e in scene.episodes
            if cfg.episodes is None or e.episode_id in cfg.episodes
        ]
        if not selected:
            logger.warning("scene %s has no episodes selected; skipping", scene.scene_id)
            continue
        jobs.extend((scene, episode) for episode in selected)
    if not jobs:
        raise InvalidInputError("no episodes selected for benchmark")

    jobs.sort(key=lambda job: (job[0].scene_id, job[1].episode_id))
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(
            pool.map(
                lambda job: run_episode(job[1], job[0].graph, cfg, job[0].providers),
                jobs,
            )
        )
    results.sort(key=lambda r: (r.scene_id, r.episode_id))

    reports = []
    for scene_id in sorted({r.scene_id for r in results}):
        scene_results = [r for r in results if r.scene_id == scene_id]
        reports.append(scene_report(scene_id, scene_results, cfg.metric))
    overall = overall_row(reports)

    run = BenchmarkRun(results=results, reports=reports, overall=overall)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / RESULTS_FILENAME).write_text(run.results_jsonl())
        (out / REPORT_TEXT_FILENAME).write_text(render_text(reports, overall))
        (out / REPORT_CSV_FILENAME).write_text(render_csv(reports, overall))
    return run


def eval_retrieval(
    world: SyntheticWorld, k: int, embedder: Optional[PanoramaEmbedder] = None
) -> float:
    """Mean precision@k over the world's distinct landmark types."""
    types = sorted(set().union(*world.labels.values())) if world.labels else []
    if not types:
        raise InvalidInputError("world has no landmark labels to evaluate")
    if embedder is None:
        embedder = OracleEmbedder(world.labels)
    total = 0.0
    for landmark in types:
        scores = rank_goal_candidates(embedder, world.graph, landmark, k)
        relevant = {nid for nid, found in world.labels.items() if landmark in found}
        total += precision_at_k([s.node_id for s in scores], relevant, k)
    return total / len(types)
