"""Contracts for the four model-backed capabilities.

Landmark extraction, embedding-based goal retrieval, binary landmark
grounding, and holistic path rating each get a small protocol plus the
value types they exchange. Implementations live in :mod:`.oracle`
(deterministic, answers from synthetic-world ground truth) and
:mod:`.remote` (HTTP chat/embedding endpoints).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Protocol, Sequence, runtime_checkable

import numpy as np

from ..errors import InvalidInputError
from ..validation import check_at_least, check_positive

if TYPE_CHECKING:  # pragma: no cover
    from ..topomap import GraphNode, NodePath, TopoGraph


@dataclass(frozen=True)
class LandmarkSequence:
    """Landmark phrases in the order the instruction visits them.

    Duplicates are legal (instructions can revisit a landmark type); empty
    phrases are not.
    """

    phrases: tuple[str, ...]
    source_instruction: str

    def __post_init__(self) -> None:
        if any(not p or not p.strip() for p in self.phrases):
            raise InvalidInputError("landmark phrases must be non-empty")

    def __len__(self) -> int:
        return len(self.phrases)


@dataclass(frozen=True)
class GroundingJudgment:
    """Binary answer to "is this landmark visible in this panorama?"."""

    node_id: str
    landmark: str
    present: int
    provider_id: str

    def __post_init__(self) -> None:
        if self.present not in (0, 1):
            raise InvalidInputError(f"present must be 0 or 1, got {self.present!r}")


@dataclass(frozen=True)
class RetrievalScore:
    """Cosine similarity between a landmark query and one node's panorama."""

    node_id: str
    score: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.score) or not -1.0 <= self.score <= 1.0:
            raise InvalidInputError(f"score must be finite in [-1, 1], got {self.score}")


@dataclass(frozen=True)
class PathRating:
    """Holistic 1-5 judgment of how well a path follows an instruction."""

    rating: int
    rationale: Optional[str] = None

    def __post_init__(self) -> None:
        if not isinstance(self.rating, int) or not 1 <= self.rating <= 5:
            raise InvalidInputError(f"rating must be an integer in [1, 5], got {self.rating!r}")


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for one remote capability.

    The credential is read from the environment variable named by
    ``api_key_env`` at call time and never stored in config files.
    """

    endpoint: str
    model_name: str
    api_key_env: str = "TOPONAV_API_KEY"
    timeout: float = 30.0
    max_retries: int = 2
    cache_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        check_positive("timeout", self.timeout)
        check_at_least("max_retries", self.max_retries, 0)

    def api_key(self) -> Optional[str]:
        return os.environ.get(self.api_key_env)


# Model names the reference deployment was tuned against; override per config.
DEFAULT_EXTRACTION_MODEL = "Llama-3.1-8B-Instruct"
DEFAULT_GROUNDING_MODEL = "gpt-4o"
DEFAULT_RATING_MODEL = "gpt-4o"
DEFAULT_EMBEDDING_MODEL = "siglip"


def default_provider_configs(
    endpoint: str, cache_dir: Optional[Path] = None, **overrides: object
) -> dict[str, ProviderConfig]:
    """Per-capability configs with the documented default model names."""
    models = {
        "extraction": DEFAULT_EXTRACTION_MODEL,
        "grounding": DEFAULT_GROUNDING_MODEL,
        "rating": DEFAULT_RATING_MODEL,
        "embedding": DEFAULT_EMBEDDING_MODEL,
    }
    return {
        capability: ProviderConfig(
            endpoint=endpoint, model_name=model, cache_dir=cache_dir, **overrides  # type: ignore[arg-type]
        )
        for capability, model in models.items()
    }


@runtime_checkable
class LandmarkExtractor(Protocol):
    def extract_landmarks(self, instruction: str) -> LandmarkSequence: ...


@runtime_checkable
class PanoramaEmbedder(Protocol):
    def embed_text(self, text: str) -> np.ndarray: ...

    def embed_panorama(self, node: "GraphNode") -> np.ndarray: ...


@runtime_checkable
class LandmarkGrounder(Protocol):
    def ground_landmark(self, node: "GraphNode", landmark: str) -> GroundingJudgment: ...


@runtime_checkable
class PathRater(Protocol):
    def rate_path(
        self, path: "NodePath", instruction: str, landmarks: LandmarkSequence
    ) -> PathRating: ...


@dataclass
class ProviderSet:
    """The pluggable seam: one implementation per capability."""

    extractor: LandmarkExtractor
    embedder: PanoramaEmbedder
    grounder: LandmarkGrounder
    rater: PathRater


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two vectors; 0.0 if either is all-zero."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    value = float(np.dot(u, v) / (nu * nv))
    return max(-1.0, min(1.0, value))


def rank_goal_candidates(
    embedder: PanoramaEmbedder, graph: "TopoGraph", landmark: str, k: int
) -> list[RetrievalScore]:
    """Top-k nodes by cosine similarity to the landmark text embedding.

    Ties are ordered by node id so retrieval is deterministic.
    """
    check_at_least("k", k, 1)
    if graph.num_nodes == 0:
        raise InvalidInputError("cannot rank goals in an empty graph")
    query = embedder.embed_text(landmark)
    scored = [
        RetrievalScore(node_id=node.id, score=cosine_similarity(query, embedder.embed_panorama(node)))
        for node in graph.nodes()
    ]
    scored.sort(key=lambda s: (-s.score, s.node_id))
    return scored[:k]
