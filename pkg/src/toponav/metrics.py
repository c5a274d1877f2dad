"""Path-fidelity and retrieval metrics, plus per-scene aggregation.

Path fidelity is normalized dynamic time warping,
``exp(-DTW(pred, ref) / (|ref| * d_th))`` with a 3 m distance threshold by
default; an episode succeeds when its nDTW strictly exceeds the 0.87
success threshold. Aggregates report mean and population standard
deviation as two-decimal percentages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .validation import check_positive

if TYPE_CHECKING:  # pragma: no cover
    from .topomap import NodePath, PathHypothesis

Point = Sequence[float]


@dataclass(frozen=True)
class MetricConfig:
    """Thresholds for path-fidelity scoring.

    ``dtw_threshold_m`` is the per-point distance scale of nDTW;
    ``success_ndtw`` is the strict success cutoff. The same cutoff doubles
    as the "highly similar" bound in hypothesis-generation accuracy.
    """

    dtw_threshold_m: float = 3.0
    success_ndtw: float = 0.87

    def __post_init__(self) -> None:
        check_positive("dtw_threshold_m", self.dtw_threshold_m)
        if not 0.0 < self.success_ndtw <= 1.0:
            raise InvalidInputError(
                f"success_ndtw must be in (0, 1], got {self.success_ndtw}"
            )


def dtw(pred: Sequence[Point], ref: Sequence[Point]) -> float:
    """Classic dynamic time warping cost with Euclidean point distance.

    Unit steps (match/insert/delete), full-sequence boundary conditions,
    no windowing; each visited cell contributes its point distance once.
    """
    if len(pred) == 0 or len(ref) == 0:
        raise InvalidInputError("dtw requires non-empty paths")
    p = np.asarray(pred, dtype=float)
    q = np.asarray(ref, dtype=float)
    if p.ndim != 2 or q.ndim != 2 or p.shape[1] != q.shape[1]:
        raise InvalidInputError("paths must be sequences of equal-dimension points")
    n, m = len(p), len(q)
    cost = np.linalg.norm(p[:, None, :] - q[None, :, :], axis=2)
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            acc[i, j] = cost[i - 1, j - 1] + min(
                acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1]
            )
    return float(acc[n, m])


def ndtw(pred: Sequence[Point], ref: Sequence[Point], cfg: MetricConfig) -> float:
    """``exp(-dtw / (|ref| * dtw_threshold_m))``; 1.0 iff the warping cost is 0."""
    return math.exp(-dtw(pred, ref) / (len(ref) * cfg.dtw_threshold_m))


def episode_success(ndtw_value: float, cfg: MetricConfig) -> bool:
    """Strictly above the success threshold counts as success."""
    return ndtw_value > cfg.success_ndtw


def precision_at_k(
    retrieved: Sequence[str], relevant: Iterable[str], k: int
) -> float:
    """Fraction of the top-k retrieved ids that are relevant.

    A retrieved list shorter than k is treated as padded with irrelevant
    entries: the denominator stays k.
    """
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    relevant_set = set(relevant)
    return sum(1 for nid in retrieved[:k] if nid in relevant_set) / k


def hypo_gen_hit(
    hypotheses: Sequence["PathHypothesis"], gt_path: "NodePath", cfg: MetricConfig
) -> bool:
    """Whether the hypothesis set contains the ground truth or a highly
    similar path (nDTW against the ground truth at or above the success
    threshold)."""
    if len(gt_path) == 0:
        raise InvalidInputError("ground-truth path must be non-empty")
    for hypothesis in hypotheses:
        if hypothesis.path.node_ids == gt_path.node_ids:
            return True
        if ndtw(hypothesis.path.positions, gt_path.positions, cfg) >= cfg.success_ndtw:
            return True
    return False


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation."""
    if not values:
        raise InvalidInputError("cannot aggregate an empty value list")
    mean = math.fsum(values) / len(values)
    variance = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(variance)


@dataclass
class EpisodeResult:
    """Per-episode outcome: the ranked choice plus its fidelity metrics.

    ``repeats_ndtw`` holds one nDTW value per tie-protocol repeat (a single
    value when the best score was unique, three when it was tied).
    """

    episode_id: str
    scene_id: str
    ndtw: float
    success: bool
    hypo_contains_gt: bool
    chosen_path: "NodePath"
    repeats_ndtw: tuple[float, ...]
    tie_count: int = 1

    def to_dict(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "scene_id": self.scene_id,
            "ndtw": self.ndtw,
            "success": self.success,
            "hypo_contains_gt": self.hypo_contains_gt,
            "chosen_path": list(self.chosen_path.node_ids),
            "chosen_positions": [list(p) for p in self.chosen_path.positions],
            "repeats_ndtw": list(self.repeats_ndtw),
            "tie_count": self.tie_count,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "EpisodeResult":
        from .topomap import NodePath

        path = NodePath(
            node_ids=tuple(record["chosen_path"]),
            positions=tuple(tuple(p) for p in record["chosen_positions"]),
        )
        return cls(
            episode_id=record["episode_id"],
            scene_id=record["scene_id"],
            ndtw=float(record["ndtw"]),
            success=bool(record["success"]),
            hypo_contains_gt=bool(record["hypo_contains_gt"]),
            chosen_path=path,
            repeats_ndtw=tuple(float(v) for v in record["repeats_ndtw"]),
            tie_count=int(record.get("tie_count", 1)),
        )


@dataclass(frozen=True)
class SceneReport:
    """One scene row of the benchmark table (percent units, population std)."""

    scene_id: str
    num_episodes: int
    hypo_gen_accuracy_pct: float
    ndtw_mean_pct: float
    ndtw_std_pct: float
    accuracy_mean_pct: float
    accuracy_std_pct: float


@dataclass(frozen=True)
class OverallRow:
    """The Average row: per-scene values aggregated with population std."""

    num_episodes: int
    hypo_gen_mean_pct: float
    hypo_gen_std_pct: float
    ndtw_mean_pct: float
    ndtw_std_pct: float
    accuracy_mean_pct: float
    accuracy_std_pct: float


def _repeat_value(result: EpisodeResult, repeat: int) -> float:
    values = result.repeats_ndtw
    return values[repeat] if repeat < len(values) else values[0]


def scene_report(
    scene_id: str, results: Sequence[EpisodeResult], cfg: MetricConfig
) -> SceneReport:
    """Aggregate one scene.

    The tie protocol yields up to three picks per episode; the scene-level
    nDTW/accuracy spread is computed across three virtual benchmark
    repeats, where repeat r takes each episode's r-th pick (episodes with a
    unique best reuse their single pick). Scenes without ties therefore
    report a 0.00 spread.
    """
    if not results:
        raise InvalidInputError(f"scene {scene_id!r} has no episode results")
    n = len(results)
    hypo_pct = 100.0 * sum(1 for r in results if r.hypo_contains_gt) / n

    ndtw_by_repeat = []
    accuracy_by_repeat = []
    repeats = max(len(r.repeats_ndtw) for r in results)
    for repeat in range(repeats):
        values = [_repeat_value(r, repeat) for r in results]
        ndtw_by_repeat.append(100.0 * math.fsum(values) / n)
        accuracy_by_repeat.append(
            100.0 * sum(1 for v in values if episode_success(v, cfg)) / n
        )
    ndtw_mean, ndtw_std = aggregate(ndtw_by_repeat)
    acc_mean, acc_std = aggregate(accuracy_by_repeat)
    return SceneReport(
        scene_id=scene_id,
        num_episodes=n,
        hypo_gen_accuracy_pct=hypo_pct,
        ndtw_mean_pct=ndtw_mean,
        ndtw_std_pct=ndtw_std,
        accuracy_mean_pct=acc_mean,
        accuracy_std_pct=acc_std,
    )


def overall_row(reports: Sequence[SceneReport]) -> OverallRow:
    """Mean and population std of the per-scene values."""
    if not reports:
        raise InvalidInputError("cannot aggregate zero scene reports")
    hypo_mean, hypo_std = aggregate([r.hypo_gen_accuracy_pct for r in reports])
    ndtw_mean, ndtw_std = aggregate([r.ndtw_mean_pct for r in reports])
    acc_mean, acc_std = aggregate([r.accuracy_mean_pct for r in reports])
    return OverallRow(
        num_episodes=sum(r.num_episodes for r in reports),
        hypo_gen_mean_pct=hypo_mean,
        hypo_gen_std_pct=hypo_std,
        ndtw_mean_pct=ndtw_mean,
        ndtw_std_pct=ndtw_std,
        accuracy_mean_pct=acc_mean,
        accuracy_std_pct=acc_std,
    )
