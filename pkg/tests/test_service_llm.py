"""LLM client plumbing: config, retries, and the anticipation round trip."""

from __future__ import annotations

import json

import httpx
import pytest
from fastapi.testclient import TestClient

from easg_kit.service import (
    EventStore,
    LLMClient,
    LLMConfig,
    UpstreamError,
    create_app,
)

from service_helpers import FakeClock, register_body, simple_graph

COMPLETION = "Graph 6: Camera wearer - verb - remove; remove - direct object - dough"


def chat_response(content: str) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"content": content}}]})


def make_client(transport, **overrides) -> LLMClient:
    config = LLMConfig(url="https://llm.test/v1/chat", **overrides)
    return LLMClient(config, transport=transport, sleep=lambda s: None)


class TestConfig:
    def test_from_env_requires_a_url(self):
        assert LLMConfig.from_env({}) is None

    def test_from_env_reads_the_knobs(self):
        config = LLMConfig.from_env({
            "EASG_LLM_URL": "https://llm.test/v1/chat",
            "EASG_LLM_KEY": "sk-test",
            "EASG_LLM_MODEL": "local-7b",
            "EASG_LLM_TEMPERATURE": "0.5",
            "EASG_LLM_MAX_TOKENS": "64",
            "EASG_LLM_MAX_RETRIES": "1",
        })
        assert config.url == "https://llm.test/v1/chat"
        assert config.api_key == "sk-test"
        assert config.model == "local-7b"
        assert config.temperature == 0.5
        assert config.max_tokens == 64
        assert config.max_retries == 1

    def test_nonsense_values_rejected(self):
        with pytest.raises(ValueError):
            LLMConfig(url="https://llm.test", temperature=-1.0)
        with pytest.raises(ValueError):
            LLMConfig(url="https://llm.test", max_tokens=0)


class TestClientWire:
    def test_sends_chat_payload_and_reads_the_choice(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["url"] = str(request.url)
            seen["auth"] = request.headers.get("authorization")
            seen["body"] = json.loads(request.content)
            return chat_response(COMPLETION)

        client = make_client(httpx.MockTransport(handler), api_key="sk-test",
                             model="local-7b", temperature=0.25, max_tokens=99)
        out = client.complete("be terse", "what happens next?")
        assert out == COMPLETION
        assert seen["url"] == "https://llm.test/v1/chat"
        assert seen["auth"] == "Bearer sk-test"
        assert seen["body"] == {
            "model": "local-7b",
            "messages": [
                {"role": "system", "content": "be terse"},
                {"role": "user", "content": "what happens next?"},
            ],
            "temperature": 0.25,
            "max_tokens": 99,
        }
        client.close()

    def test_retries_with_doubling_backoff_then_succeeds(self):
        calls = {"n": 0}
        sleeps: list[float] = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(503, text="busy")
            return chat_response("ok")

        config = LLMConfig(url="https://llm.test/v1/chat")
        client = LLMClient(config, transport=httpx.MockTransport(handler),
                           sleep=sleeps.append)
        assert client.complete("s", "u") == "ok"
        assert calls["n"] == 3
        assert sleeps == [0.5, 1.0]
        client.close()

    def test_rate_limit_is_retryable(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(429, headers={"retry-after": "7"}, text="slow down")
            return chat_response("ok")

        client = make_client(httpx.MockTransport(handler))
        assert client.complete("s", "u") == "ok"
        assert calls["n"] == 2
        client.close()

    def test_client_error_is_not_retried(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            return httpx.Response(400, text="bad request")

        client = make_client(httpx.MockTransport(handler))
        with pytest.raises(UpstreamError) as err:
            client.complete("s", "u")
        assert calls["n"] == 1
        assert err.value.attempts == 1
        assert err.value.status == 400
        client.close()

    def test_exhausted_retries_raise_with_attempt_count(self):
        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(503, headers={"retry-after": "11"}, text="busy")

        client = make_client(httpx.MockTransport(handler), max_retries=2)
        with pytest.raises(UpstreamError) as err:
            client.complete("s", "u")
        assert err.value.attempts == 3
        assert err.value.status == 503
        assert err.value.retry_after == 11.0
        client.close()

    def test_transport_failure_is_retryable(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] == 1:
                raise httpx.ConnectError("refused")
            return chat_response("ok")

        client = make_client(httpx.MockTransport(handler))
        assert client.complete("s", "u") == "ok"
        client.close()

    def test_malformed_upstream_body_is_an_upstream_error(self):
        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json={"surprise": True})

        client = make_client(httpx.MockTransport(handler))
        with pytest.raises(UpstreamError):
            client.complete("s", "u")
        client.close()


FLOUR_STEPS = [
    ("take", "flour", "takes the flour"),
    ("pour", "flour", "pours the flour"),
    ("mix", "dough", "mixes the dough"),
    ("knead", "dough", "kneads the dough"),
    ("press", "dough", "presses the dough"),
]


@pytest.fixture()
def flour_client(tmp_path):
    """Service with a five-step dough clip and a canned LLM.

    Five observed graphs is an accepted anticipation window, so the
    recorded completion names Graph 6 as the predicted next action.
    """
    store = EventStore(tmp_path / "events.ndjson", clock=FakeClock())

    def handler(request: httpx.Request) -> httpx.Response:
        return chat_response(COMPLETION)

    llm = LLMClient(LLMConfig(url="https://llm.test/v1/chat"),
                    transport=httpx.MockTransport(handler), sleep=lambda s: None)
    client = TestClient(create_app(store, llm))
    graphs = [simple_graph("clip-flour", t, verb, noun)
              for t, (verb, noun, _) in enumerate(FLOUR_STEPS, start=1)]
    body = register_body("clip-flour", graphs,
                         narrations=[n for _, _, n in FLOUR_STEPS],
                         summary="CW prepares dough with flour.")
    assert client.post("/clips", json=body).status_code == 201
    yield client
    store.close()


class TestLLMEndpoints:
    def test_anticipate_parses_and_scores_the_completion(self, flour_client):
        r = flour_client.post("/llm/anticipate",
                              json={"clip_id": "clip-flour", "mode": "easg",
                                    "gt": ["remove", "dough"]})
        assert r.status_code == 200
        doc = r.json()
        assert doc["completion"] == COMPLETION
        assert doc["predictions"] == [["remove", "dough"]]
        assert doc["hits"]["top1"] == {"verb": 1, "noun": 1, "action": 1}
        assert doc["hits"]["top5"] == {"verb": 1, "noun": 1, "action": 1}
        assert "system" in doc["prompt"] and "user" in doc["prompt"]

    def test_anticipate_without_gt_skips_scoring(self, flour_client):
        r = flour_client.post("/llm/anticipate", json={"clip_id": "clip-flour"})
        assert r.status_code == 200
        assert "hits" not in r.json()

    def test_summarize_narration_mode_uses_the_narrations(self, flour_client):
        r = flour_client.post("/llm/summarize",
                              json={"clip_id": "clip-flour", "mode": "narration"})
        assert r.status_code == 200
        doc = r.json()
        assert "takes the flour" in doc["prompt"]["user"]
        assert doc["reference"] == "CW prepares dough with flour."

    def test_summarize_easg_mode(self, flour_client):
        r = flour_client.post("/llm/summarize",
                              json={"clip_id": "clip-flour", "mode": "easg"})
        assert r.status_code == 200

    def test_unknown_clip_404(self, flour_client):
        r = flour_client.post("/llm/anticipate", json={"clip_id": "nope"})
        assert r.status_code == 404

    def test_bad_mode_422(self, flour_client):
        r = flour_client.post("/llm/anticipate",
                              json={"clip_id": "clip-flour", "mode": "interpretive dance"})
        assert r.status_code == 422

    def test_unconfigured_llm_is_502(self, tmp_path):
        store = EventStore(tmp_path / "noconf.ndjson", clock=FakeClock())
        client = TestClient(create_app(store))
        client.post("/clips", json=register_body(
            "clip-a", [simple_graph("clip-a", 1)]))
        r = client.post("/llm/anticipate", json={"clip_id": "clip-a"})
        assert r.status_code == 502
        assert r.json()["detail"]["error"] == "llm-not-configured"
        store.close()

    def test_upstream_failure_maps_to_502_with_retry_metadata(self, tmp_path):
        store = EventStore(tmp_path / "down.ndjson", clock=FakeClock())

        def handler(request: httpx.Request) -> httpx.Response:
            return httpx.Response(503, headers={"retry-after": "13"}, text="down")

        llm = LLMClient(LLMConfig(url="https://llm.test/v1/chat", max_retries=1),
                        transport=httpx.MockTransport(handler), sleep=lambda s: None)
        client = TestClient(create_app(store, llm))
        graphs = [simple_graph("clip-a", t, verb, noun)
                  for t, (verb, noun, _) in enumerate(FLOUR_STEPS, start=1)]
        client.post("/clips", json=register_body("clip-a", graphs))
        r = client.post("/llm/anticipate", json={"clip_id": "clip-a"})
        assert r.status_code == 502
        detail = r.json()["detail"]
        assert detail["error"] == "llm-upstream"
        assert detail["attempts"] == 2
        assert detail["retry_after"] == 13.0
        assert detail["status"] == 503
        store.close()

    def test_short_clip_is_a_prompt_error(self, tmp_path):
        store = EventStore(tmp_path / "short.ndjson", clock=FakeClock())
        llm = LLMClient(
            LLMConfig(url="https://llm.test/v1/chat"),
            transport=httpx.MockTransport(lambda r: chat_response("ok")),
            sleep=lambda s: None,
        )
        client = TestClient(create_app(store, llm))
        client.post("/clips", json=register_body(
            "clip-a", [simple_graph("clip-a", 1)]))
        r = client.post("/llm/anticipate", json={"clip_id": "clip-a"})
        assert r.status_code == 422
        assert r.json()["detail"]["error"] == "bad-prompt"
        store.close()
