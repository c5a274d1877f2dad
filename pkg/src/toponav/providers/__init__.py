"""Pluggable model providers: contracts, oracle and remote implementations,
and the response cache."""

from .base import (
    GroundingJudgment,
    LandmarkExtractor,
    LandmarkGrounder,
    LandmarkSequence,
    PanoramaEmbedder,
    PathRater,
    PathRating,
    ProviderConfig,
    ProviderSet,
    RetrievalScore,
    cosine_similarity,
    default_provider_configs,
    rank_goal_candidates,
)
from .cache import ResponseCache, canonical_json, request_digest
from .oracle import (
    OracleEmbedder,
    OracleGrounder,
    OraclePathRater,
    RuleBasedLandmarkExtractor,
    oracle_provider_set,
    rating_from_alignment,
)
from .remote import (
    RemoteEmbedder,
    RemoteLandmarkExtractor,
    RemoteLandmarkGrounder,
    RemotePathRater,
    remote_provider_set,
)

__all__ = [
    "GroundingJudgment",
    "LandmarkExtractor",
    "LandmarkGrounder",
    "LandmarkSequence",
    "OracleEmbedder",
    "OracleGrounder",
    "OraclePathRater",
    "PanoramaEmbedder",
    "PathRater",
    "PathRating",
    "ProviderConfig",
    "ProviderSet",
    "RemoteEmbedder",
    "RemoteLandmarkExtractor",
    "RemoteLandmarkGrounder",
    "RemotePathRater",
    "ResponseCache",
    "RetrievalScore",
    "RuleBasedLandmarkExtractor",
    "canonical_json",
    "cosine_similarity",
    "default_provider_configs",
    "oracle_provider_set",
    "rank_goal_candidates",
    "rating_from_alignment",
    "remote_provider_set",
    "request_digest",
]
