"""Deterministic providers that answer from synthetic-world ground truth.

These make the full pipeline verifiable offline: extraction is rule-based
and exact on the harness's templated instructions, retrieval embeds
landmark labels as orthogonal basis vectors, grounding is label-set
membership (optionally with seeded flip noise), and rating maps the
oracle alignment of a path onto the 1-5 scale. Every provider is a pure
function of (world labels, seed, request), so results are identical
across runs and thread schedules.
"""

from __future__ import annotations

import hashlib
import math
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence

import numpy as np

from ..validation import check_nonempty_instruction
from .base import (
    GroundingJudgment,
    LandmarkSequence,
    PathRating,
    ProviderSet,
)

if TYPE_CHECKING:  # pragma: no cover
    from ..topomap import GraphNode, NodePath

PREPOSITIONS = frozenset(
    "in to at by into near past toward towards onto through beside".split()
)
ARTICLES = frozenset({"the", "a", "an"})

LabelMap = Mapping[str, frozenset[str]]


class RuleBasedLandmarkExtractor:
    """Noun-phrase extraction for templated instructions.

    Splits on commas, then takes the tokens after the first preposition of
    each clause (or after an article when the clause has no preposition),
    dropping a leading article. Exact on the synthetic-world instruction
    grammar; real-world instructions should use the remote extractor.
    """

    provider_id = "rule-based"

    def extract_landmarks(self, instruction: str) -> LandmarkSequence:
        check_nonempty_instruction(instruction)
        phrases = []
        for clause in instruction.replace(";", ",").split(","):
            tokens = [t.strip(".,;:!?") for t in clause.split()]
            tokens = [t for t in tokens if t]
            phrase = self._phrase_from(tokens)
            if phrase:
                phrases.append(phrase)
        return LandmarkSequence(phrases=tuple(phrases), source_instruction=instruction)

    @staticmethod
    def _phrase_from(tokens: list[str]) -> Optional[str]:
        cut = None
        for i, token in enumerate(tokens):
            if token.lower() in PREPOSITIONS:
                cut = i + 1
                break
        if cut is None:
            for i, token in enumerate(tokens):
                if token.lower() in ARTICLES:
                    cut = i + 1
                    break
            if cut is None:
                return None
            remainder = tokens[cut:]
        else:
            remainder = tokens[cut:]
            if remainder and remainder[0].lower() in ARTICLES:
                remainder = remainder[1:]
        return " ".join(remainder) if remainder else None


class OracleEmbedder:
    """Embeds landmark types as orthogonal basis vectors.

    A panorama embedding is the normalized sum of its node's label vectors,
    so cosine similarity is positive exactly for label-matching nodes and
    1.0 when the node carries that single label. Unknown query text maps to
    the zero vector (similarity 0 everywhere).
    """

    def __init__(self, labels: LabelMap, vocabulary: Optional[Iterable[str]] = None) -> None:
        self._labels = labels
        if vocabulary is None:
            vocabulary = sorted(set().union(*labels.values())) if labels else []
        self._index = {term: i for i, term in enumerate(vocabulary)}
        self._dim = max(len(self._index), 1)

    def embed_text(self, text: str) -> np.ndarray:
        vector = np.zeros(self._dim)
        index = self._index.get(text)
        if index is not None:
            vector[index] = 1.0
        return vector

    def embed_panorama(self, node: "GraphNode") -> np.ndarray:
        vector = np.zeros(self._dim)
        for label in self._labels.get(node.id, ()):
            index = self._index.get(label)
            if index is not None:
                vector[index] = 1.0
        norm = np.linalg.norm(vector)
        return vector / norm if norm else vector


def _stable_uniform(seed: int, node_id: str, landmark: str) -> float:
    """Deterministic uniform in [0, 1) keyed by request, not call order."""
    digest = hashlib.blake2b(
        f"{seed}\x1f{node_id}\x1f{landmark}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") / 2**64


class OracleGrounder:
    """Label-set membership, optionally corrupted by seeded flip noise.

    With ``flip_probability`` p > 0, each (node, landmark) judgment is
    flipped independently with probability p. The flip decision is a hash
    of (seed, node id, landmark), so it is reproducible regardless of the
    order or concurrency of grounding calls.
    """

    def __init__(
        self,
        labels: LabelMap,
        flip_probability: float = 0.0,
        seed: int = 0,
    ) -> None:
        if not 0.0 <= flip_probability <= 1.0:
            raise ValueError(f"flip_probability must be in [0, 1], got {flip_probability}")
        self._labels = labels
        self.flip_probability = flip_probability
        self.seed = seed
        self.provider_id = (
            "oracle"
            if flip_probability == 0.0
            else f"oracle-noisy(p={flip_probability},seed={seed})"
        )

    def ground_landmark(self, node: "GraphNode", landmark: str) -> GroundingJudgment:
        present = 1 if landmark in self._labels.get(node.id, ()) else 0
        if self.flip_probability > 0.0:
            if _stable_uniform(self.seed, node.id, landmark) < self.flip_probability:
                present = 1 - present
        return GroundingJudgment(
            node_id=node.id, landmark=landmark, present=present,
            provider_id=self.provider_id,
        )


def rating_from_alignment(alignment: float) -> int:
    """Map a [0, 1] alignment onto the 1-5 scale (round half up)."""
    return min(5, max(1, int(math.floor(1.0 + 4.0 * alignment + 0.5))))


class OraclePathRater:
    """Rates a path by the alignment its oracle grounding matrix achieves."""

    provider_id = "oracle"

    def __init__(self, labels: LabelMap) -> None:
        self._grounder = OracleGrounder(labels)

    def rate_path(
        self, path: "NodePath", instruction: str, landmarks: LandmarkSequence
    ) -> PathRating:
        from ..alignment import build_grounding_matrix, normalized_alignment

        alignment = normalized_alignment(
            build_grounding_matrix(path, landmarks, self._grounder)
        )
        return PathRating(
            rating=rating_from_alignment(alignment),
            rationale=f"oracle alignment {alignment:.4f}",
        )


def oracle_provider_set(
    labels: LabelMap,
    flip_probability: float = 0.0,
    noise_seed: int = 0,
    vocabulary: Optional[Sequence[str]] = None,
) -> ProviderSet:
    """Providers answering from one synthetic world's label map.

    Noise applies to grounding only; the rater always scores against the
    clean labels (it models a separate holistic judge).
    """
    return ProviderSet(
        extractor=RuleBasedLandmarkExtractor(),
        embedder=OracleEmbedder(labels, vocabulary),
        grounder=OracleGrounder(labels, flip_probability, noise_seed),
        rater=OraclePathRater(labels),
    )
