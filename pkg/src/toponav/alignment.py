"""Path-instruction alignment: grounding matrices, the monotone-matching DP,
and hypothesis ranking for both approaches.

The alignment score of a path is the size of the largest set of positive
grounding judgments that can be selected with strictly increasing landmark
indices and strictly increasing panorama indices, normalized by path
length. The recurrence is the LCS one on an (R+1) x (C+1) table with zero
borders; on a matching cell the diagonal transition is taken outright,
which is optimal for this objective (verified exhaustively in the tests).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidInputError, NoCandidatesError, ProviderError
from .providers.base import LandmarkGrounder, LandmarkSequence, PathRater
from .topomap import GraphNode, NodePath, PathHypothesis
from .validation import check_binary_entries

TIE_REPEATS = 3


@dataclass(frozen=True)
class GroundingMatrix:
    """Binary landmark x panorama judgments for one path hypothesis.

    Rows follow instruction order, columns follow path order.
    """

    entries: tuple[tuple[int, ...], ...]
    landmark_labels: tuple[str, ...]
    node_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        rows = len(self.entries)
        if rows < 1:
            raise InvalidInputError("grounding matrix needs at least one row")
        cols = len(self.entries[0])
        if cols < 1:
            raise InvalidInputError("grounding matrix needs at least one column")
        if any(len(row) != cols for row in self.entries):
            raise InvalidInputError("grounding matrix rows must have equal length")
        check_binary_entries(self.entries)
        if len(self.landmark_labels) != rows:
            raise InvalidInputError(
                f"expected {rows} landmark labels, got {len(self.landmark_labels)}"
            )
        if len(self.node_ids) != cols:
            raise InvalidInputError(
                f"expected {cols} node ids, got {len(self.node_ids)}"
            )

    @property
    def num_landmarks(self) -> int:
        return len(self.entries)

    @property
    def num_panoramas(self) -> int:
        return len(self.entries[0])


def build_grounding_matrix(
    path: NodePath, landmarks: LandmarkSequence, grounder: LandmarkGrounder
) -> GroundingMatrix:
    """Query the grounder for every (landmark, panorama) cell.

    Provider failures are re-raised with the failing cell attached.
    """
    if not landmarks.phrases:
        raise InvalidInputError("cannot build a grounding matrix with no landmarks")
    nodes = [
        GraphNode(id=nid, position=pos, panorama=pano)
        for nid, pos, pano in zip(path.node_ids, path.positions, path.panoramas)
    ]
    rows = []
    for r, landmark in enumerate(landmarks.phrases):
        row = []
        for c, node in enumerate(nodes):
            try:
                judgment = grounder.ground_landmark(node, landmark)
            except ProviderError as exc:
                raise type(exc)(
                    f"grounding cell (r={r}, c={c}) landmark={landmark!r} "
                    f"node={node.id!r}: {exc}"
                ) from exc
            row.append(judgment.present)
        rows.append(tuple(row))
    return GroundingMatrix(
        entries=tuple(rows),
        landmark_labels=tuple(landmarks.phrases),
        node_ids=tuple(path.node_ids),
    )


def pano2land_score(matrix: GroundingMatrix) -> int:
    """Largest number of 1-cells selectable with strictly increasing row and
    column indices."""
    entries = matrix.entries
    rows, cols = matrix.num_landmarks, matrix.num_panoramas
    dp = [[0] * (cols + 1) for _ in range(rows + 1)]
    for r in range(1, rows + 1):
        for c in range(1, cols + 1):
            if entries[r - 1][c - 1] == 1:
                dp[r][c] = dp[r - 1][c - 1] + 1
            else:
                dp[r][c] = max(dp[r - 1][c], dp[r][c - 1])
    return dp[rows][cols]


def normalized_alignment(matrix: GroundingMatrix) -> float:
    """Alignment score divided by path length (panorama count), in [0, 1]."""
    return pano2land_score(matrix) / matrix.num_panoramas


def filter_hypotheses(
    hypotheses: Sequence[PathHypothesis], landmarks: LandmarkSequence
) -> list[PathHypothesis]:
    """Drop hypotheses whose path has fewer nodes than there are landmarks."""
    required = len(landmarks.phrases)
    return [h for h in hypotheses if len(h.path) >= required]


@dataclass(frozen=True)
class RankedResult:
    """Outcome of ranking one episode's hypothesis set.

    ``tie_count`` is the number of hypotheses sharing the best score. When
    it exceeds 1, ``repeats`` holds the three seeded uniform picks among
    the tied set and ``chosen`` is the first of them; otherwise ``repeats``
    is just ``(chosen,)``.
    """

    chosen: PathHypothesis
    repeats: tuple[PathHypothesis, ...]
    tie_count: int


def _select_best(
    hypotheses: Sequence[PathHypothesis],
    scores: Sequence[float],
    rng_seed: int,
) -> RankedResult:
    best = max(scores)
    tied = [h for h, s in zip(hypotheses, scores) if s == best]
    if len(tied) == 1:
        return RankedResult(chosen=tied[0], repeats=(tied[0],), tie_count=1)
    rng = random.Random(rng_seed)
    picks = tuple(tied[rng.randrange(len(tied))] for _ in range(TIE_REPEATS))
    return RankedResult(chosen=picks[0], repeats=picks, tie_count=len(tied))


def rank_approach1(
    hypotheses: Sequence[PathHypothesis],
    landmarks: LandmarkSequence,
    grounder: LandmarkGrounder,
    rng_seed: int,
) -> RankedResult:
    """Rank by normalized alignment of each hypothesis's grounding matrix.

    Expects an already-filtered hypothesis list. Records the alignment (and
    the matrix that produced it) on every hypothesis.
    """
    if not hypotheses:
        raise NoCandidatesError("no hypotheses to rank")
    scores = []
    for hypothesis in hypotheses:
        matrix = build_grounding_matrix(hypothesis.path, landmarks, grounder)
        hypothesis.matrix = matrix
        hypothesis.alignment = normalized_alignment(matrix)
        hypothesis.rating = None
        scores.append(hypothesis.alignment)
    return _select_best(hypotheses, scores, rng_seed)


def rank_approach2(
    hypotheses: Sequence[PathHypothesis],
    instruction: str,
    landmarks: LandmarkSequence,
    rater: PathRater,
    rng_seed: int,
) -> RankedResult:
    """Rank by holistic 1-5 ratings; same tie protocol as Approach I."""
    if not hypotheses:
        raise NoCandidatesError("no hypotheses to rank")
    scores = []
    for hypothesis in hypotheses:
        rating = rater.rate_path(hypothesis.path, instruction, landmarks)
        hypothesis.rating = rating.rating
        hypothesis.alignment = None
        scores.append(float(rating.rating))
    return _select_best(hypotheses, scores, rng_seed)
