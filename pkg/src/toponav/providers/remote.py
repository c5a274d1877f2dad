"""HTTP-backed providers speaking a chat-completion style protocol.

Requests are JSON POSTs with a bearer token read from the environment;
chat capabilities send a system + user message (with base64 image
attachments when a panorama reference points at a readable file, and the
reference itself as text otherwise, which keeps synthetic worlds
runnable against stub servers). Responses are validated at parse time:
out-of-contract content is retried and ultimately raises
ProviderFormatError, transport failures raise TransportError. Parsed
responses are cached by request digest, so a warm-cache rerun issues no
network calls.
"""

from __future__ import annotations

import base64
import json
import logging
import random
import re
import time
from importlib.resources import files
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Mapping, Optional, TypeVar

import httpx
import numpy as np

from ..errors import InvalidInputError, ProviderFormatError, TransportError
from ..validation import check_nonempty_instruction
from .base import (
    GroundingJudgment,
    LandmarkSequence,
    PathRating,
    ProviderConfig,
    ProviderSet,
)
from .cache import ResponseCache, request_digest

if TYPE_CHECKING:  # pragma: no cover
    from ..topomap import GraphNode, NodePath

logger = logging.getLogger(__name__)

T = TypeVar("T")

BACKOFF_BASE_S = 0.5
BACKOFF_CAP_S = 30.0

_LIST_MARKER = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")
_INT_TOKEN = re.compile(r"(?<![\w.\-])(\d+)(?![\w.])")


def load_prompt(name: str) -> tuple[str, str]:
    """Split a versioned prompt asset into (system, user-template)."""
    text = (files("toponav.providers") / "prompts" / name).read_text()
    system, _, user = text.partition("\n---\n")
    return system.strip(), user.strip()


class RemoteClient:
    """POST machinery shared by all remote capabilities.

    Retries transport failures and malformed responses with jittered
    exponential backoff, honoring server wait hints (Retry-After header or
    a ``retry_after`` body field) on rate-limit responses. ``sleeper`` is
    injectable so tests run without real delays.
    """

    def __init__(
        self,
        config: ProviderConfig,
        capability: str,
        transport: Optional[httpx.BaseTransport] = None,
        sleeper: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config
        self.capability = capability
        self.provider_id = f"remote:{config.model_name}"
        self._client = httpx.Client(transport=transport, timeout=config.timeout)
        self._cache = ResponseCache(config.cache_dir) if config.cache_dir else None
        self._sleep = sleeper
        self._jitter = random.Random()

    def _headers(self) -> dict[str, str]:
        key = self.config.api_key()
        return {"Authorization": f"Bearer {key}"} if key else {}

    @staticmethod
    def _wait_hint(response: httpx.Response) -> Optional[float]:
        header = response.headers.get("Retry-After")
        if header is not None:
            try:
                return float(header)
            except ValueError:
                pass
        try:
            hint = response.json().get("retry_after")
            return float(hint) if hint is not None else None
        except (json.JSONDecodeError, AttributeError, TypeError, ValueError):
            return None

    def call(self, payload: dict, parse: Callable[[str], T]) -> T:
        """POST ``payload`` and return ``parse`` applied to the response body.

        The cache is consulted first and only successfully parsed bodies
        are stored, so a cached malformed response can never wedge a
        capability.
        """
        digest = request_digest(self.capability, self.config.model_name, payload)
        if self._cache is not None:
            cached = self._cache.lookup(digest)
            if cached is not None:
                try:
                    return parse(cached)
                except ProviderFormatError:
                    logger.warning("cache entry %s no longer parses; refetching", digest)

        last_error: Exception = TransportError(
            f"{self.capability}: no attempts made (max_retries={self.config.max_retries})"
        )
        wait_hint: Optional[float] = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                delay = min(BACKOFF_CAP_S, BACKOFF_BASE_S * 2 ** (attempt - 1))
                delay *= 0.5 + self._jitter.random() / 2
                if wait_hint is not None:
                    delay = max(delay, wait_hint)
                    wait_hint = None
                self._sleep(delay)
            try:
                response = self._client.post(
                    self.config.endpoint, json=payload, headers=self._headers()
                )
            except httpx.HTTPError as exc:
                last_error = TransportError(f"{self.capability}: {exc}")
                continue
            if response.status_code == 429 or response.status_code >= 500:
                wait_hint = self._wait_hint(response)
                last_error = TransportError(
                    f"{self.capability}: HTTP {response.status_code}"
                )
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"{self.capability}: HTTP {response.status_code}: "
                    f"{response.text[:200]}"
                )
            try:
                value = parse(response.text)
            except ProviderFormatError as exc:
                last_error = exc
                continue
            if self._cache is not None:
                self._cache.store(digest, payload, response.text)
            return value
        raise last_error


def chat_payload(
    model: str,
    system: str,
    user_text: str,
    images: Optional[list[str]] = None,
) -> dict:
    if images:
        content: object = [{"type": "text", "text": user_text}] + [
            {"type": "image", "image_base64": image} for image in images
        ]
    else:
        content = user_text
    return {
        "model": model,
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": content},
        ],
    }


def chat_content(body: str) -> str:
    """Pull the assistant message text out of a chat-completion body."""
    try:
        data = json.loads(body)
        content = data["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise ProviderFormatError(f"malformed chat completion body: {exc}") from exc
    if not isinstance(content, str):
        raise ProviderFormatError("chat message content must be a string")
    return content


def _encode_if_file(reference: str) -> Optional[str]:
    path = Path(reference)
    try:
        if path.is_file():
            return base64.b64encode(path.read_bytes()).decode("ascii")
    except OSError:
        pass
    return None


def parse_landmark_lines(body: str) -> tuple[str, ...]:
    phrases = []
    for line in chat_content(body).splitlines():
        phrase = _LIST_MARKER.sub("", line).strip()
        if phrase:
            phrases.append(phrase)
    if not phrases:
        raise ProviderFormatError("extraction response contained no landmark lines")
    return tuple(phrases)


def parse_yes_no(body: str) -> int:
    tokens = chat_content(body).strip().split()
    first = tokens[0].strip(".,;:!?").lower() if tokens else ""
    if first in ("yes", "1"):
        return 1
    if first in ("no", "0"):
        return 0
    raise ProviderFormatError(f"expected yes/no or 1/0, got {first!r}")


def parse_rating(body: str) -> tuple[int, str]:
    content = chat_content(body)
    match = _INT_TOKEN.search(content)
    if match is None:
        raise ProviderFormatError(f"no integer rating in {content[:80]!r}")
    value = int(match.group(1))
    if not 1 <= value <= 5:
        raise ProviderFormatError(f"rating {value} outside [1, 5]")
    return value, content


class RemoteLandmarkExtractor:
    def __init__(self, config: ProviderConfig, **client_kwargs: object) -> None:
        self._client = RemoteClient(config, "extraction", **client_kwargs)  # type: ignore[arg-type]
        self._system, self._user = load_prompt("extract_landmarks_v1.txt")

    @property
    def provider_id(self) -> str:
        return self._client.provider_id

    def extract_landmarks(self, instruction: str) -> LandmarkSequence:
        check_nonempty_instruction(instruction)
        payload = chat_payload(
            self._client.config.model_name,
            self._system,
            self._user.format(instruction=instruction),
        )
        phrases = self._client.call(payload, parse_landmark_lines)
        return LandmarkSequence(phrases=phrases, source_instruction=instruction)


class RemoteLandmarkGrounder:
    def __init__(self, config: ProviderConfig, **client_kwargs: object) -> None:
        self._client = RemoteClient(config, "grounding", **client_kwargs)  # type: ignore[arg-type]
        self._system, self._user = load_prompt("ground_landmark_v1.txt")

    @property
    def provider_id(self) -> str:
        return self._client.provider_id

    def ground_landmark(self, node: "GraphNode", landmark: str) -> GroundingJudgment:
        if not landmark or not landmark.strip():
            raise InvalidInputError("landmark must be non-empty")
        encoded = _encode_if_file(node.panorama)
        payload = chat_payload(
            self._client.config.model_name,
            self._system,
            self._user.format(landmark=landmark, panorama=node.panorama),
            images=[encoded] if encoded else None,
        )
        present = self._client.call(payload, parse_yes_no)
        return GroundingJudgment(
            node_id=node.id,
            landmark=landmark,
            present=present,
            provider_id=self.provider_id,
        )


class RemotePathRater:
    def __init__(self, config: ProviderConfig, **client_kwargs: object) -> None:
        self._client = RemoteClient(config, "rating", **client_kwargs)  # type: ignore[arg-type]
        self._system, self._user = load_prompt("rate_path_v1.txt")

    @property
    def provider_id(self) -> str:
        return self._client.provider_id

    def rate_path(
        self, path: "NodePath", instruction: str, landmarks: LandmarkSequence
    ) -> PathRating:
        images = [
            encoded
            for encoded in (_encode_if_file(p) for p in path.panoramas)
            if encoded
        ]
        payload = chat_payload(
            self._client.config.model_name,
            self._system,
            self._user.format(
                instruction=instruction,
                landmarks="; ".join(landmarks.phrases),
                panoramas="\n".join(path.panoramas),
            ),
            images=images or None,
        )
        value, content = self._client.call(payload, parse_rating)
        return PathRating(rating=value, rationale=content)


def parse_embedding(body: str) -> np.ndarray:
    try:
        data = json.loads(body)
        vector = data["data"][0]["embedding"]
        array = np.asarray(vector, dtype=float)
    except (json.JSONDecodeError, KeyError, IndexError, TypeError, ValueError) as exc:
        raise ProviderFormatError(f"malformed embedding body: {exc}") from exc
    if array.ndim != 1 or array.size == 0 or not np.all(np.isfinite(array)):
        raise ProviderFormatError("embedding must be a non-empty finite vector")
    return array


class RemoteEmbedder:
    """Embedding capability over an embeddings-style endpoint.

    Inputs are tagged objects: text queries, base64 images, or bare
    panorama references when no image file is available.
    """

    def __init__(self, config: ProviderConfig, **client_kwargs: object) -> None:
        self._client = RemoteClient(config, "embedding", **client_kwargs)  # type: ignore[arg-type]

    @property
    def provider_id(self) -> str:
        return self._client.provider_id

    def _embed(self, entry: dict) -> np.ndarray:
        payload = {"model": self._client.config.model_name, "input": [entry]}
        return self._client.call(payload, parse_embedding)

    def embed_text(self, text: str) -> np.ndarray:
        return self._embed({"type": "text", "text": text})

    def embed_panorama(self, node: "GraphNode") -> np.ndarray:
        encoded = _encode_if_file(node.panorama)
        if encoded:
            return self._embed({"type": "image", "image_base64": encoded})
        return self._embed({"type": "reference", "reference": node.panorama})


def remote_provider_set(
    configs: Mapping[str, ProviderConfig],
    transport: Optional[httpx.BaseTransport] = None,
    sleeper: Callable[[float], None] = time.sleep,
) -> ProviderSet:
    """Build all four remote capabilities from per-capability configs."""
    missing = {"extraction", "embedding", "grounding", "rating"} - set(configs)
    if missing:
        raise InvalidInputError(f"missing provider configs: {sorted(missing)}")
    kwargs = {"transport": transport, "sleeper": sleeper}
    return ProviderSet(
        extractor=RemoteLandmarkExtractor(configs["extraction"], **kwargs),
        embedder=RemoteEmbedder(configs["embedding"], **kwargs),
        grounder=RemoteLandmarkGrounder(configs["grounding"], **kwargs),
        rater=RemotePathRater(configs["rating"], **kwargs),
    )
