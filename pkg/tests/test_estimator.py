from __future__ import annotations

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from toponav.errors import InvalidInputError
from toponav.estimator import InstructionFollower
from toponav.world import generate_world


@pytest.fixture(scope="module")
def world():
    return generate_world(
        n_nodes=16, branching=2.5, n_landmark_types=150, n_episodes=4, seed=31
    )


class TestEstimatorApi:
    def test_get_params_round_trip(self):
        follower = InstructionFollower(k=5, approach="II", seed=3)
        params = follower.get_params()
        assert params["k"] == 5 and params["approach"] == "II" and params["seed"] == 3
        rebuilt = InstructionFollower(**params)
        assert rebuilt.get_params() == params

    def test_clone_preserves_params(self):
        follower = InstructionFollower(k=4, success_ndtw=0.9)
        duplicate = clone(follower)
        assert duplicate.get_params() == follower.get_params()

    def test_set_params_chains(self):
        follower = InstructionFollower().set_params(k=7)
        assert follower.k == 7

    def test_predict_before_fit_raises(self, world):
        follower = InstructionFollower(providers=world.oracle_providers())
        with pytest.raises(NotFittedError):
            follower.predict(world.episodes)

    def test_predict_without_providers_raises(self, world):
        follower = InstructionFollower().fit(world.episodes)
        with pytest.raises(InvalidInputError, match="providers"):
            follower.predict(world.episodes)

    def test_fit_requires_single_scene(self, world):
        other = generate_world(
            n_nodes=8, branching=2.0, n_landmark_types=60, n_episodes=1, seed=99
        )
        with pytest.raises(InvalidInputError, match="one scene"):
            InstructionFollower().fit(list(world.episodes) + list(other.episodes))


class TestEstimatorBehavior:
    def test_fit_builds_scene_graph(self, world):
        follower = InstructionFollower().fit(world.episodes)
        assert follower.scene_id_ == world.scene_id
        for episode in world.episodes:
            for nid in episode.gt_path:
                assert follower.graph_.has_node(nid)

    def test_predict_recovers_ground_truth_paths(self, world):
        follower = InstructionFollower(providers=world.oracle_providers())
        paths = follower.fit(world.episodes).predict(world.episodes)
        assert [p.node_ids for p in paths] == [e.gt_path for e in world.episodes]

    def test_score_is_mean_ndtw(self, world):
        follower = InstructionFollower(providers=world.oracle_providers())
        assert follower.fit(world.episodes).score(world.episodes) == 1.0

    def test_evaluate_exposes_full_results(self, world):
        follower = InstructionFollower(providers=world.oracle_providers())
        results = follower.fit(world.episodes).evaluate(world.episodes)
        assert all(r.success for r in results)
        assert [r.episode_id for r in results] == [
            e.episode_id for e in world.episodes
        ]
