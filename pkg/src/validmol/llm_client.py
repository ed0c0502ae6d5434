"""Chat-completion client with HTTP, record and replay transports.

Wire format (HTTP and Record modes): ``POST <endpoint>`` with a JSON body
``{"model", "messages": [{"role": "user", "content": prompt}],
"temperature", "max_tokens"}``; the reply text is read from
``choices[0].message.content``. An API key, when configured, is sent as a
bearer token and never logged.

Cassettes are append-only JSON-lines files, one object per exchange:
``{"request_id", "prompt_digest", "response_text"}``.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import httpx

log = logging.getLogger(__name__)

ENV_ENDPOINT = "VALIDMOL_LLM_ENDPOINT"
ENV_API_KEY = "VALIDMOL_LLM_API_KEY"
ENV_MODEL = "VALIDMOL_LLM_MODEL"
DEFAULT_MODEL = "ministral-8b-instruct"


class TransportError(RuntimeError):
    """The request could not be completed; nothing was learned about the model."""


class Timeout(TransportError):
    def __init__(self, attempts: int):
        super().__init__(f"timed out after {attempts} attempt(s)")
        self.attempts = attempts


class TransientExhausted(TransportError):
    def __init__(self, attempts: int, last: str):
        super().__init__(f"gave up after {attempts} attempt(s): {last}")
        self.attempts = attempts


class CassetteMiss(TransportError):
    def __init__(self, request_id: str):
        super().__init__(f"no cassette entry for request {request_id}")
        self.request_id = request_id


class CassetteUnreadable(TransportError):
    pass


class MalformedProviderReply(TransportError):
    pass


class ProviderError(TransportError):
    """Non-retryable HTTP status from the provider."""


class TransportMode(enum.Enum):
    HTTP = "Http"
    REPLAY = "Replay"
    RECORD = "Record"


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @property
    def request_id(self) -> str:
        return _sha256(json.dumps([self.prompt, self.model, float(self.temperature)]))

    def body(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": "user", "content": self.prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class ChatResponse:
    text: str
    latency: float
    attempt: int


@dataclass(frozen=True)
class TransportConfig:
    mode: TransportMode
    endpoint: str | None = None
    cassette_path: Path | None = None
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 0.5
    api_key: str | None = field(default=None, repr=False)
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.mode in (TransportMode.HTTP, TransportMode.RECORD) and not self.endpoint:
            raise ValueError(f"{self.mode.value} mode needs an endpoint")
        if self.mode in (TransportMode.REPLAY, TransportMode.RECORD) and self.cassette_path is None:
            raise ValueError(f"{self.mode.value} mode needs a cassette path")
        if self.max_retries < 0 or self.timeout <= 0 or self.backoff_base < 0 or self.max_in_flight < 1:
            raise ValueError("invalid retry/timeout settings")

    @classmethod
    def parse(cls, spec: str, **kwargs) -> "TransportConfig":
        """``http``, ``replay:<path>`` or ``record:<path>``; endpoint and key come from the environment."""
        kind, _, path = spec.partition(":")
        endpoint = kwargs.pop("endpoint", None) or os.environ.get(ENV_ENDPOINT)
        api_key = kwargs.pop("api_key", None) or os.environ.get(ENV_API_KEY)
        if kind == "http" and not path:
            return cls(TransportMode.HTTP, endpoint=endpoint, api_key=api_key, **kwargs)
        if kind == "replay" and path:
            return cls(TransportMode.REPLAY, cassette_path=Path(path), **kwargs)
        if kind == "record" and path:
            return cls(TransportMode.RECORD, endpoint=endpoint, cassette_path=Path(path), api_key=api_key, **kwargs)
        raise ValueError(f"bad transport spec {spec!r}")


def backoff_delays(cfg: TransportConfig) -> list[float]:
    """Sleep before each retry: base, 2*base, 4*base, ..."""
    return [cfg.backoff_base * 2**k for k in range(cfg.max_retries)]


def cassette_record(req: ChatRequest, text: str) -> dict:
    return {"request_id": req.request_id, "prompt_digest": _sha256(req.prompt), "response_text": text}


def load_cassette(path: Path) -> dict[str, str]:
    """request_id -> response text; the first record for an id wins."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CassetteUnreadable(f"cannot read cassette {path}: {exc.strerror}") from exc
    out: dict[str, str] = {}
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.setdefault(rec["request_id"], rec["response_text"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CassetteUnreadable(f"{path}:{n}: malformed cassette record") from exc
    return out


class LlmClient:
    """Thread-safe client; HTTP calls are bounded by ``cfg.max_in_flight``.

    ``http_transport`` and ``sleep`` are injection points for tests.
    """

    def __init__(
        self,
        cfg: TransportConfig,
        http_transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.cfg = cfg
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(cfg.max_in_flight)
        self._cassette_lock = threading.Lock()
        self._cassette: dict[str, str] | None = None
        self._http: httpx.Client | None = None
        if cfg.mode is not TransportMode.REPLAY:
            headers = {"Authorization": f"Bearer {cfg.api_key}"} if cfg.api_key else {}
            self._http = httpx.Client(transport=http_transport, timeout=cfg.timeout, headers=headers)
        self._count_lock = threading.Lock()
        self.calls = 0  # transport calls attempted, for instrumentation

    def close(self) -> None:
        if self._http is not None:
            self._http.close()

    def __enter__(self) -> "LlmClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _replay_table(self) -> dict[str, str]:
        with self._cassette_lock:
            if self._cassette is None:
                path = self.cfg.cassette_path
                if self.cfg.mode is TransportMode.RECORD and not Path(path).exists():  # type: ignore[arg-type]
                    self._cassette = {}
                else:
                    self._cassette = load_cassette(path)  # type: ignore[arg-type]
            return self._cassette

    def complete(self, req: ChatRequest) -> ChatResponse:
        with self._count_lock:
            self.calls += 1
        if self.cfg.mode is TransportMode.REPLAY:
            table = self._replay_table()
            if req.request_id not in table:
                raise CassetteMiss(req.request_id)
            return ChatResponse(table[req.request_id], 0.0, 1)
        resp = self._post(req)
        if self.cfg.mode is TransportMode.RECORD:
            table = self._replay_table()
            with self._cassette_lock:
                with open(self.cfg.cassette_path, "a") as fh:  # type: ignore[arg-type]
                    fh.write(json.dumps(cassette_record(req, resp.text)) + "\n")
                table.setdefault(req.request_id, resp.text)
        return resp

    def _post(self, req: ChatRequest) -> ChatResponse:
        assert self._http is not None
        delays = backoff_delays(self.cfg)
        last = ""
        timeouts = 0
        start = time.perf_counter()
        for attempt in range(1, self.cfg.max_retries + 2):
            if attempt > 1:
                self._sleep(delays[attempt - 2])
            try:
                with self._slots:
                    reply = self._http.post(self.cfg.endpoint, json=req.body())  # type: ignore[arg-type]
            except httpx.TimeoutException:
                timeouts += 1
                last = "timeout"
                log.warning("attempt %d timed out", attempt)
                continue
            except httpx.TransportError as exc:
                last = type(exc).__name__
                log.warning("attempt %d failed: %s", attempt, last)
                continue
            if reply.status_code == 429 or reply.status_code >= 500:
                last = f"HTTP {reply.status_code}"
                log.warning("attempt %d: %s", attempt, last)
                continue
            if reply.status_code >= 400:
                raise ProviderError(f"HTTP {reply.status_code}")
            return ChatResponse(_reply_text(reply), time.perf_counter() - start, attempt)
        attempts = self.cfg.max_retries + 1
        if timeouts == attempts:
            raise Timeout(attempts)
        raise TransientExhausted(attempts, last)


def _reply_text(reply: httpx.Response) -> str:
    try:
        content = reply.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedProviderReply("reply lacks choices[0].message.content") from exc
    if not isinstance(content, str):
        raise MalformedProviderReply("message content is not a string")
    return content


def complete(req: ChatRequest, cfg: TransportConfig) -> ChatResponse:
    """One-shot convenience wrapper around :class:`LlmClient`."""
    with LlmClient(cfg) as client:
        return client.complete(req)
