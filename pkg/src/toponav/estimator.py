"""Scikit-learn style facade over the navigation pipeline.

``fit`` builds the topological scene map from training episodes;
``predict`` selects a path per episode; ``score`` reports mean nDTW
against the ground truth. Parameters follow the sklearn convention
(stored verbatim, introspectable via ``get_params``), so the follower
composes with ``sklearn.base.clone`` and friends.
"""

from __future__ import annotations

from typing import Optional, Sequence

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dataset import Episode
from .errors import InvalidInputError
from .metrics import EpisodeResult, MetricConfig
from .pipeline import RunConfig, run_episode
from .providers.base import ProviderSet
from .topomap import NodePath, build_graph


class InstructionFollower(BaseEstimator):
    """Follow natural-language route instructions on a learned scene map."""

    def __init__(
        self,
        k: int = 3,
        approach: str = "I",
        seed: int = 0,
        dtw_threshold_m: float = 3.0,
        success_ndtw: float = 0.87,
        providers: Optional[ProviderSet] = None,
        workers: int = 1,
    ) -> None:
        self.k = k
        self.approach = approach
        self.seed = seed
        self.dtw_threshold_m = dtw_threshold_m
        self.success_ndtw = success_ndtw
        self.providers = providers
        self.workers = workers

    def _run_config(self) -> RunConfig:
        return RunConfig(
            k=self.k,
            approach=self.approach,
            seed=self.seed,
            metric=MetricConfig(
                dtw_threshold_m=self.dtw_threshold_m,
                success_ndtw=self.success_ndtw,
            ),
            workers=self.workers,
        )

    def fit(self, episodes: Sequence[Episode], y: object = None) -> "InstructionFollower":
        """Build the scene graph from the episodes' waypoints and trajectories."""
        if not episodes:
            raise InvalidInputError("fit requires at least one episode")
        scene_ids = {e.scene_id for e in episodes}
        if len(scene_ids) != 1:
            raise InvalidInputError(
                f"fit expects episodes from one scene, got {sorted(scene_ids)}"
            )
        self.scene_id_ = episodes[0].scene_id
        self.graph_ = build_graph(list(episodes), self.scene_id_)
        return self

    def _check_ready(self) -> ProviderSet:
        if not hasattr(self, "graph_"):
            raise NotFittedError("call fit before predict/score")
        if self.providers is None:
            raise InvalidInputError(
                "no providers configured; pass a ProviderSet "
                "(e.g. world.oracle_providers() or remote_provider_set(...))"
            )
        return self.providers

    def evaluate(self, episodes: Sequence[Episode]) -> list[EpisodeResult]:
        """Run the pipeline per episode and return full results."""
        providers = self._check_ready()
        cfg = self._run_config()
        return [run_episode(e, self.graph_, cfg, providers) for e in episodes]

    def predict(self, episodes: Sequence[Episode]) -> list[NodePath]:
        """The chosen path per episode."""
        return [result.chosen_path for result in self.evaluate(episodes)]

    def score(self, episodes: Sequence[Episode], y: object = None) -> float:
        """Mean nDTW of the chosen paths against the ground truth."""
        results = self.evaluate(episodes)
        return sum(r.ndtw for r in results) / len(results)
