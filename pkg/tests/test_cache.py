from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stubs import canned_chat, no_sleep
from toponav.providers.base import ProviderConfig
from toponav.providers.cache import ResponseCache, canonical_json, request_digest
from toponav.providers.remote import RemoteLandmarkGrounder
from conftest import grid_node


class TestDigest:
    def test_reordered_payload_keys_share_digest(self):
        a = {"model": "m", "messages": [{"role": "user", "content": "hi"}], "x": 1}
        b = {"x": 1, "messages": [{"content": "hi", "role": "user"}], "model": "m"}
        assert request_digest("grounding", "m", a) == request_digest("grounding", "m", b)

    def test_capability_and_model_separate_namespaces(self):
        payload = {"q": 1}
        assert request_digest("grounding", "m", payload) != request_digest(
            "rating", "m", payload
        )
        assert request_digest("grounding", "m1", payload) != request_digest(
            "grounding", "m2", payload
        )

    @given(
        st.dictionaries(
            st.text(min_size=1, max_size=6),
            st.one_of(st.integers(), st.text(max_size=6), st.booleans()),
            max_size=6,
        ),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_canonicalization_over_permuted_insertion_order(self, payload, rng):
        keys = list(payload)
        rng.shuffle(keys)
        permuted = {k: payload[k] for k in keys}
        assert canonical_json(payload) == canonical_json(permuted)


class TestResponseCache:
    def test_store_then_lookup_round_trips_bytes(self, tmp_path):
        cache = ResponseCache(tmp_path)
        cache.store("ab12", {"q": 1}, '{"choices": []}')
        assert cache.lookup("ab12") == '{"choices": []}'

    def test_unknown_digest_misses(self, tmp_path):
        assert ResponseCache(tmp_path).lookup("feed") is None

    def test_survives_new_instance(self, tmp_path):
        ResponseCache(tmp_path).store("cafe", {}, "body")
        assert ResponseCache(tmp_path).lookup("cafe") == "body"

    def test_corrupt_entry_evicted_and_missed(self, tmp_path, caplog):
        cache = ResponseCache(tmp_path)
        cache.store("dead", {}, "body")
        entry = tmp_path / "dead.json"
        entry.write_text("{not json")
        with caplog.at_level("WARNING"):
            assert cache.lookup("dead") is None
        assert not entry.exists()
        assert "corrupt" in caplog.text

    def test_entry_is_human_inspectable(self, tmp_path):
        cache = ResponseCache(tmp_path)
        cache.store("beef", {"capability": "grounding"}, "yes")
        entry = json.loads((tmp_path / "beef.json").read_text())
        assert entry["request"] == {"capability": "grounding"}
        assert entry["response"] == "yes"
        assert "timestamp" in entry


class TestCachedRemoteCalls:
    def make_grounder(self, tmp_path, transport):
        config = ProviderConfig(
            endpoint="http://stub.test/v1/chat",
            model_name="stub-model",
            cache_dir=tmp_path,
        )
        return RemoteLandmarkGrounder(config, transport=transport, sleeper=no_sleep)

    def test_identical_request_never_hits_network_twice(self, tmp_path):
        transport = canned_chat("yes")
        grounder = self.make_grounder(tmp_path, transport)
        node = grid_node("a", 0.0)
        first = grounder.ground_landmark(node, "sofa")
        second = grounder.ground_landmark(node, "sofa")
        assert (first.present, second.present) == (1, 1)
        assert transport.calls == 1

    def test_cache_shared_across_client_instances(self, tmp_path):
        transport = canned_chat("no")
        node = grid_node("a", 0.0)
        assert self.make_grounder(tmp_path, transport).ground_landmark(node, "x").present == 0
        assert self.make_grounder(tmp_path, transport).ground_landmark(node, "x").present == 0
        assert transport.calls == 1

    def test_malformed_responses_are_not_cached(self, tmp_path):
        transport = canned_chat("maybe", "yes")
        grounder = self.make_grounder(tmp_path, transport)
        node = grid_node("a", 0.0)
        with pytest.raises(Exception):
            # max_retries defaults to 2; exhaust with a single-response stub
            RemoteLandmarkGrounder(
                ProviderConfig(
                    endpoint="http://stub.test/v1/chat",
                    model_name="stub-model",
                    cache_dir=tmp_path,
                    max_retries=0,
                ),
                transport=canned_chat("maybe"),
                sleeper=no_sleep,
            ).ground_landmark(node, "sofa")
        # the malformed body must not have been stored for this digest
        assert grounder.ground_landmark(node, "sofa").present == 1
