"""Chat-completion gateway: remote HTTP provider, deterministic mock, retries.

The rest of the pipeline talks to a provider only through `complete_chat`,
so benchmarks can swap the real endpoint for a mock keyed by request
fingerprints.  With temperature 0 and a mock provider every downstream
artifact is bit-deterministic.
"""

from __future__ import annotations

import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from hashlib import blake2b
from pathlib import Path
from typing import Callable, Protocol

import requests

from .errors import (
    AuthError,
    ExtractionError,
    ProviderError,
    RetryableTransportError,
    TransportError,
    ValidationError,
)

log = logging.getLogger("colorrec.llm")

_ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_backoff: float = 0.5

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValidationError("retry policy needs at least one attempt")
        if self.base_backoff < 0:
            raise ValidationError("base backoff must be non-negative")


@dataclass(frozen=True)
class LlmProviderConfig:
    provider: str = "remote_chat"
    model: str = ""
    endpoint: str = ""
    api_key: str | None = None
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout: float = 30.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self):
        if self.provider not in ("remote_chat", "mock"):
            raise ValidationError(f"unknown provider kind {self.provider!r}")
        if self.temperature < 0:
            raise ValidationError("temperature must be non-negative")

    def resolved_model(self) -> str:
        return self.model or os.environ.get("LLM_MODEL", "")

    def resolved_endpoint(self) -> str:
        return self.endpoint or os.environ.get("LLM_API_URL", "")

    def resolved_api_key(self) -> str:
        return self.api_key or os.environ.get("LLM_API_KEY", "")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in _ROLES:
            raise ValidationError(f"unknown chat role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]

    def __post_init__(self):
        messages = tuple(self.messages)
        object.__setattr__(self, "messages", messages)
        if not messages:
            raise ValidationError("chat request needs at least one message")
        if messages[0].role not in ("system", "user"):
            raise ValidationError("first message must be system or user")


@dataclass(frozen=True)
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    usage: dict = field(default_factory=dict)
    latency: float = 0.0
    attempts: int = 1


def make_request(system: str, user: str) -> ChatRequest:
    return ChatRequest((ChatMessage("system", system), ChatMessage("user", user)))


def fingerprint(req: ChatRequest) -> str:
    """Stable 64-bit hash over the role+content sequence, as a hex string."""
    h = blake2b(digest_size=8)
    for m in req.messages:
        h.update(m.role.encode("utf-8"))
        h.update(b"\x1f")
        h.update(m.content.encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()


class ChatProvider(Protocol):
    def complete(self, req: ChatRequest) -> ChatResponse: ...


class RemoteChatProvider:
    """HTTP chat endpoint speaking the plain {model, messages, ...} protocol."""

    def __init__(self, cfg: LlmProviderConfig, session: requests.Session | None = None):
        if not cfg.resolved_endpoint():
            raise ValidationError("remote provider needs an endpoint (or LLM_API_URL)")
        self.cfg = cfg
        self._session = session or requests.Session()

    def complete(self, req: ChatRequest) -> ChatResponse:
        cfg = self.cfg
        body = {
            "model": cfg.resolved_model(),
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        key = cfg.resolved_api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = self._session.post(
                cfg.resolved_endpoint(), json=body, headers=headers, timeout=cfg.timeout
            )
        except requests.Timeout as exc:
            raise RetryableTransportError(f"request timed out: {exc}") from None
        except requests.RequestException as exc:
            raise RetryableTransportError(f"request failed: {exc}") from None
        if resp.status_code in (401, 403):
            raise AuthError(f"authentication failed (HTTP {resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise RetryableTransportError(
                f"transient HTTP {resp.status_code}", status=resp.status_code
            )
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}", status=resp.status_code)
        try:
            payload = resp.json()
            choice = payload["choices"][0]
            content = choice["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise TransportError(f"malformed provider response: {exc}") from None
        return ChatResponse(
            content=content,
            finish_reason=choice.get("finish_reason", "stop"),
            usage=payload.get("usage", {}),
        )


class MockChatProvider:
    """Canned replies keyed by request fingerprint.

    Unknown fingerprints are handled per mode: "strict" raises, "default"
    returns a fixed fallback, "echo" asks an attached oracle callable for
    the reply (used by the 100%-accuracy pipeline tests).  Reads only
    immutable state, so it is safe under concurrent use.
    """

    def __init__(
        self,
        fixtures: dict[str, str] | None = None,
        mode: str = "strict",
        default_reply: str = "",
        oracle: Callable[[ChatRequest], str] | None = None,
    ):
        if mode not in ("strict", "default", "echo"):
            raise ValidationError(f"unknown mock mode {mode!r}")
        if mode == "echo" and oracle is None:
            raise ValidationError("echo mode needs an oracle callable")
        self.fixtures = dict(fixtures or {})
        self.mode = mode
        self.default_reply = default_reply
        self.oracle = oracle
        self.calls: list[str] = []

    def complete(self, req: ChatRequest) -> ChatResponse:
        fp = fingerprint(req)
        self.calls.append(fp)
        if fp in self.fixtures:
            content = self.fixtures[fp]
        elif self.mode == "echo":
            content = self.oracle(req)
        elif self.mode == "default":
            content = self.default_reply
        else:
            raise ProviderError(f"no canned reply for fingerprint {fp}")
        prompt_chars = sum(len(m.content) for m in req.messages)
        return ChatResponse(
            content=content,
            usage={"prompt_chars": prompt_chars, "completion_chars": len(content)},
        )


def make_provider(cfg: LlmProviderConfig, **mock_kwargs) -> ChatProvider:
    if cfg.provider == "mock":
        return MockChatProvider(**mock_kwargs)
    return RemoteChatProvider(cfg)


def complete_chat(
    provider: ChatProvider,
    req: ChatRequest,
    policy: RetryPolicy | None = None,
    sleep: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> ChatResponse:
    """Run one exchange with retries on transient transport failures.

    Exponential backoff with full jitter: the n-th wait is uniform over
    [0, base * 2^n], so expected delays are non-decreasing.  Auth errors
    and non-transient transport errors are raised immediately.
    """
    policy = policy or getattr(getattr(provider, "cfg", None), "retry", None) or RetryPolicy()
    rng = rng or random.Random()
    last: RetryableTransportError | None = None
    for attempt in range(1, policy.max_attempts + 1):
        started = time.monotonic()
        try:
            resp = provider.complete(req)
        except RetryableTransportError as exc:
            last = exc
            elapsed = time.monotonic() - started
            log.info("attempt %d/%d failed in %.3fs: %s", attempt, policy.max_attempts, elapsed, exc)
            if attempt == policy.max_attempts:
                break
            sleep(rng.uniform(0.0, policy.base_backoff * (2**attempt)))
            continue
        elapsed = time.monotonic() - started
        log.debug("attempt %d/%d succeeded in %.3fs", attempt, policy.max_attempts, elapsed)
        return ChatResponse(
            content=resp.content,
            finish_reason=resp.finish_reason,
            usage=resp.usage,
            latency=elapsed,
            attempts=attempt,
        )
    raise last


_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\n?(.*?)```", re.DOTALL)


def _scan_json(text: str):
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch not in "{[":
            continue
        try:
            value, _ = decoder.raw_decode(text[i:])
        except ValueError:
            continue
        return value
    return None


def extract_json(reply: str):
    """Pull the first complete JSON object or array out of a model reply.

    Fenced code block contents are tried first, then the reply as a whole
    is scanned for a balanced {...} or [...] that the JSON parser accepts.
    Raises ExtractionError (carrying the raw reply) when nothing parses.
    """
    if not isinstance(reply, str):
        raise ExtractionError("reply is not text", reply=repr(reply))
    for candidate in [m.group(1) for m in _FENCE_RE.finditer(reply)] + [reply]:
        value = _scan_json(candidate)
        if value is not None:
            return value
    raise ExtractionError("no JSON value found in reply", reply=reply)


class TokenBucket:
    """Requests-per-minute limiter shared by concurrent benchmark workers."""

    def __init__(
        self,
        rpm: float,
        capacity: float = 1.0,
        clock=time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rpm <= 0:
            raise ValidationError("rate limit must be positive")
        if capacity < 1:
            raise ValidationError("bucket capacity must allow at least one request")
        self.capacity = capacity
        self.tokens = capacity
        self.rate = rpm / 60.0
        self.updated = clock()
        self.clock = clock
        self.sleep = sleep
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            self.sleep(wait)


class RecordingProvider:
    """Wraps a provider and appends request/reply pairs to a JSONL audit file."""

    def __init__(self, inner: ChatProvider, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self._lock = threading.Lock()

    def complete(self, req: ChatRequest) -> ChatResponse:
        resp = self.inner.complete(req)
        line = json.dumps(
            {
                "fingerprint": fingerprint(req),
                "messages": [{"role": m.role, "content": m.content} for m in req.messages],
                "content": resp.content,
            },
            ensure_ascii=False,
        )
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        return resp


def replay_provider(path: str | Path) -> MockChatProvider:
    """Strict mock provider fed from a JSONL audit file."""
    fixtures: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
                fixtures[entry["fingerprint"]] = entry["content"]
            except (ValueError, KeyError) as exc:
                raise ValidationError(f"bad audit record on line {line_no}: {exc}") from None
    return MockChatProvider(fixtures=fixtures, mode="strict")
