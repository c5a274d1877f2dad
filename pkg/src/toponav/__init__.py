"""Instruction-following navigation on topological maps.

The pipeline builds a unit-edge viewpoint graph from episode
trajectories, extracts landmark sequences from instructions, retrieves
top-k goal candidates by embedding similarity, generates BFS path
hypotheses, ranks them by grounding-matrix alignment (Approach I) or
holistic rating (Approach II), and scores the chosen path with nDTW.
All model calls sit behind pluggable providers, so everything is
verifiable offline against deterministic oracles.
"""

from .alignment import (
    GroundingMatrix,
    RankedResult,
    build_grounding_matrix,
    filter_hypotheses,
    normalized_alignment,
    pano2land_score,
    rank_approach1,
    rank_approach2,
)
from .dataset import Episode, load_episodes
from .errors import (
    FileFormatError,
    InconsistentInputError,
    InvalidInputError,
    NoCandidatesError,
    NoPathError,
    ProviderError,
    ProviderFormatError,
    ReferentialIntegrityError,
    ToponavError,
    TransportError,
    UnknownNodeError,
    WorldGenerationError,
)
from .estimator import InstructionFollower
from .metrics import (
    EpisodeResult,
    MetricConfig,
    OverallRow,
    SceneReport,
    aggregate,
    dtw,
    episode_success,
    hypo_gen_hit,
    ndtw,
    overall_row,
    precision_at_k,
    scene_report,
)
from .pipeline import (
    BenchScene,
    BenchmarkRun,
    RunConfig,
    episode_seed,
    eval_retrieval,
    run_benchmark,
    run_episode,
)
from .providers import (
    GroundingJudgment,
    LandmarkSequence,
    PathRating,
    ProviderConfig,
    ProviderSet,
    RetrievalScore,
    oracle_provider_set,
    rank_goal_candidates,
    remote_provider_set,
)
from .report import render_csv, render_text
from .topomap import (
    GraphNode,
    NodePath,
    PathHypothesis,
    TopoGraph,
    build_graph,
    generate_hypotheses,
    load_graph,
    save_graph,
    shortest_path,
)
from .world import SyntheticWorld, generate_world, load_world, save_world

__version__ = "0.1.0"

__all__ = [
    "BenchScene",
    "BenchmarkRun",
    "Episode",
    "EpisodeResult",
    "FileFormatError",
    "GraphNode",
    "GroundingJudgment",
    "GroundingMatrix",
    "InconsistentInputError",
    "InstructionFollower",
    "InvalidInputError",
    "LandmarkSequence",
    "MetricConfig",
    "NoCandidatesError",
    "NoPathError",
    "NodePath",
    "OverallRow",
    "PathHypothesis",
    "PathRating",
    "ProviderConfig",
    "ProviderError",
    "ProviderFormatError",
    "ProviderSet",
    "RankedResult",
    "ReferentialIntegrityError",
    "RetrievalScore",
    "RunConfig",
    "SceneReport",
    "SyntheticWorld",
    "TopoGraph",
    "ToponavError",
    "TransportError",
    "UnknownNodeError",
    "WorldGenerationError",
    "aggregate",
    "build_graph",
    "build_grounding_matrix",
    "dtw",
    "episode_seed",
    "episode_success",
    "eval_retrieval",
    "filter_hypotheses",
    "generate_hypotheses",
    "generate_world",
    "hypo_gen_hit",
    "load_episodes",
    "load_graph",
    "load_world",
    "ndtw",
    "normalized_alignment",
    "oracle_provider_set",
    "overall_row",
    "pano2land_score",
    "precision_at_k",
    "rank_approach1",
    "rank_approach2",
    "rank_goal_candidates",
    "remote_provider_set",
    "render_csv",
    "render_text",
    "run_benchmark",
    "run_episode",
    "save_graph",
    "save_world",
    "scene_report",
    "shortest_path",
]
