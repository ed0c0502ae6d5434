import json
import threading

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from validmol.llm_client import (
    ENV_API_KEY,
    ENV_ENDPOINT,
    CassetteMiss,
    CassetteUnreadable,
    ChatRequest,
    LlmClient,
    MalformedProviderReply,
    ProviderError,
    Timeout,
    TransientExhausted,
    TransportConfig,
    TransportMode,
    backoff_delays,
    cassette_record,
    complete,
)

URL = "http://llm.test/v1/chat/completions"


def reply(text: str) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


class Scripted:
    """Mock handler that plays back a list of outcomes and remembers requests."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.requests: list[httpx.Request] = []

    def __call__(self, request: httpx.Request) -> httpx.Response:
        self.requests.append(request)
        out = self.outcomes.pop(0)
        if isinstance(out, Exception):
            raise out
        return out


def http_client(outcomes, **cfg):
    handler = Scripted(outcomes)
    sleeps: list[float] = []
    config = TransportConfig(TransportMode.HTTP, endpoint=URL, **cfg)
    return LlmClient(config, http_transport=httpx.MockTransport(handler), sleep=sleeps.append), handler, sleeps


def test_request_id_is_deterministic():
    a = ChatRequest("p", "m", 0.0)
    assert a.request_id == ChatRequest("p", "m", 0).request_id
    assert a.request_id != ChatRequest("p", "m", 0.5).request_id
    assert a.request_id != ChatRequest("q", "m", 0.0).request_id


def test_request_validation():
    with pytest.raises(ValueError):
        ChatRequest("p", temperature=-1)
    with pytest.raises(ValueError):
        ChatRequest("p", max_tokens=0)


def test_wire_body():
    client, handler, _ = http_client([reply("ok")])
    client.complete(ChatRequest("hello", "m1", 0.2, 64))
    body = json.loads(handler.requests[0].content)
    assert body == {"model": "m1", "messages": [{"role": "user", "content": "hello"}], "temperature": 0.2, "max_tokens": 64}


def test_transient_failures_then_success():
    client, _, sleeps = http_client([httpx.Response(503), httpx.ConnectError("down"), reply("done")], max_retries=3)
    resp = client.complete(ChatRequest("p"))
    assert (resp.text, resp.attempt) == ("done", 3)
    assert sleeps == [0.5, 1.0]


def test_retries_exhausted():
    client, handler, _ = http_client([httpx.Response(500)] * 3, max_retries=2)
    with pytest.raises(TransientExhausted) as err:
        client.complete(ChatRequest("p"))
    assert err.value.attempts == 3 and len(handler.requests) == 3


def test_all_timeouts():
    client, _, _ = http_client([httpx.ReadTimeout("slow")] * 2, max_retries=1)
    with pytest.raises(Timeout):
        client.complete(ChatRequest("p"))


def test_client_errors_are_not_retried():
    client, handler, _ = http_client([httpx.Response(401)])
    with pytest.raises(ProviderError):
        client.complete(ChatRequest("p"))
    assert len(handler.requests) == 1


@pytest.mark.parametrize("payload", [{"choices": []}, {"x": 1}, {"choices": [{"message": {"content": 5}}]}])
def test_malformed_replies(payload):
    client, _, _ = http_client([httpx.Response(200, json=payload)])
    with pytest.raises(MalformedProviderReply):
        client.complete(ChatRequest("p"))


def test_api_key_header():
    handler = Scripted([reply("x")])
    cfg = TransportConfig(TransportMode.HTTP, endpoint=URL, api_key="secret")
    LlmClient(cfg, http_transport=httpx.MockTransport(handler)).complete(ChatRequest("p"))
    assert handler.requests[0].headers["authorization"] == "Bearer secret"
    assert "secret" not in repr(cfg)


@given(st.integers(0, 8), st.floats(0, 5))
def test_backoff_is_non_decreasing(retries, base):
    delays = backoff_delays(TransportConfig(TransportMode.HTTP, endpoint=URL, max_retries=retries, backoff_base=base))
    assert len(delays) == retries
    assert all(a <= b for a, b in zip(delays, delays[1:]))


# ---- cassettes ------------------------------------------------------------


def write_cassette(path, pairs):
    path.write_text("".join(json.dumps(cassette_record(req, text)) + "\n" for req, text in pairs))


def test_replay_hit_and_miss(tmp_path):
    path = tmp_path / "c.jsonl"
    req = ChatRequest("prompt")
    write_cassette(path, [(req, "recorded")])
    cfg = TransportConfig(TransportMode.REPLAY, cassette_path=path)
    resp = complete(req, cfg)
    assert (resp.text, resp.attempt) == ("recorded", 1)
    with pytest.raises(CassetteMiss):
        complete(ChatRequest("other"), cfg)


def test_replay_missing_or_corrupt_cassette(tmp_path):
    with pytest.raises(CassetteUnreadable):
        complete(ChatRequest("p"), TransportConfig(TransportMode.REPLAY, cassette_path=tmp_path / "none.jsonl"))
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    with pytest.raises(CassetteUnreadable):
        complete(ChatRequest("p"), TransportConfig(TransportMode.REPLAY, cassette_path=bad))


def test_record_then_replay(tmp_path):
    path = tmp_path / "rec.jsonl"
    prompts = [f"prompt {i}" for i in range(5)]
    handler = Scripted([reply(f"answer {i}") for i in range(5)])
    cfg = TransportConfig(TransportMode.RECORD, endpoint=URL, cassette_path=path)
    with LlmClient(cfg, http_transport=httpx.MockTransport(handler)) as rec:
        recorded = [rec.complete(ChatRequest(p)).text for p in prompts]
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert set(lines[0]) == {"request_id", "prompt_digest", "response_text"}
    with LlmClient(TransportConfig(TransportMode.REPLAY, cassette_path=path)) as rep:
        assert [rep.complete(ChatRequest(p)).text for p in prompts] == recorded
        assert [rep.complete(ChatRequest(p)).text for p in prompts] == recorded
        assert rep.calls == 10


def test_replay_is_thread_safe(tmp_path):
    path = tmp_path / "c.jsonl"
    reqs = [ChatRequest(f"p{i}") for i in range(20)]
    write_cassette(path, [(r, f"t{i}") for i, r in enumerate(reqs)])
    client = LlmClient(TransportConfig(TransportMode.REPLAY, cassette_path=path))
    out: dict[int, str] = {}

    def work(i):
        out[i] = client.complete(reqs[i]).text

    threads = [threading.Thread(target=work, args=(i,)) for i in range(20)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert out == {i: f"t{i}" for i in range(20)}
    assert client.calls == 20


# ---- configuration --------------------------------------------------------


def test_transport_spec_parsing(monkeypatch, tmp_path):
    monkeypatch.setenv(ENV_ENDPOINT, URL)
    monkeypatch.setenv(ENV_API_KEY, "k")
    http = TransportConfig.parse("http")
    assert (http.mode, http.endpoint, http.api_key) == (TransportMode.HTTP, URL, "k")
    replay = TransportConfig.parse(f"replay:{tmp_path / 'c.jsonl'}")
    assert replay.mode is TransportMode.REPLAY and replay.cassette_path == tmp_path / "c.jsonl"
    assert TransportConfig.parse("record:x.jsonl").mode is TransportMode.RECORD
    for bad in ("replay", "ftp:x", "record:"):
        with pytest.raises(ValueError):
            TransportConfig.parse(bad)


def test_mode_requirements(monkeypatch):
    monkeypatch.delenv(ENV_ENDPOINT, raising=False)
    with pytest.raises(ValueError):
        TransportConfig.parse("http")
    with pytest.raises(ValueError):
        TransportConfig(TransportMode.REPLAY)
    with pytest.raises(ValueError):
        TransportConfig(TransportMode.HTTP, endpoint=URL, timeout=0)
