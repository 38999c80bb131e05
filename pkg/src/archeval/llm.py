"""Chat-completion transports shared by the judge and the generation client."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import httpx

log = logging.getLogger(__name__)


class TransportError(RuntimeError):
    """Network or HTTP failure talking to a model endpoint."""


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[tuple[str, str], ...]  # (role, content)
    temperature: float = 0.0
    max_tokens: int | None = None

    @classmethod
    def build(cls, model: str, system: str | None, user: str, **kw) -> ChatRequest:
        msgs = ((("system", system),) if system else ()) + (("user", user),)
        return cls(model, msgs, **kw)

    def with_message(self, role: str, content: str) -> ChatRequest:
        return ChatRequest(self.model, self.messages + ((role, content),), self.temperature, self.max_tokens)

    @property
    def user_text(self) -> str:
        return next((c for r, c in reversed(self.messages) if r == "user"), "")

    def payload(self) -> dict:
        body = {
            "model": self.model,
            "messages": [{"role": r, "content": c} for r, c in self.messages],
            "temperature": self.temperature,
        }
        if self.max_tokens is not None:
            body["max_tokens"] = self.max_tokens
        return body


class Transport(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


def _chat_url(endpoint: str) -> str:
    endpoint = endpoint.rstrip("/")
    if endpoint.endswith("/chat/completions"):
        return endpoint
    return endpoint + "/chat/completions"


_RETRYABLE_STATUS = {408, 409, 429, 500, 502, 503, 504}


class RetryableTransportError(TransportError):
    pass


class HttpChatTransport:
    """POSTs OpenAI-style chat-completion requests."""

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
    ):
        if not endpoint:
            raise ValueError("endpoint is required")
        self.url = _chat_url(endpoint)
        self.api_key = api_key
        self._client = client or httpx.Client(timeout=timeout)

    def complete(self, request: ChatRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = self._client.post(self.url, json=request.payload(), headers=headers)
        except httpx.HTTPError as exc:
            raise RetryableTransportError(f"{type(exc).__name__}: {exc}") from exc
        if resp.status_code in _RETRYABLE_STATUS:
            raise RetryableTransportError(f"HTTP {resp.status_code} from {self.url}")
        if resp.status_code >= 400:
            raise TransportError(f"HTTP {resp.status_code} from {self.url}: {resp.text[:200]}")
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"unexpected response body from {self.url}") from exc
        return content or ""


class MockTransport:
    """In-process transport for tests and hermetic runs.

    ``responder`` is a fixed string, a list of strings consumed in order, or
    a callable receiving the request.
    """

    def __init__(self, responder: str | Sequence[str] | Callable[[ChatRequest], str]):
        self._responder = responder
        self._queue = list(responder) if isinstance(responder, (list, tuple)) else None
        self._lock = threading.Lock()
        self.calls: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            self.calls.append(request)
            if self._queue is not None:
                if not self._queue:
                    raise TransportError("mock transport has no responses left")
                return self._queue.pop(0)
        if callable(self._responder):
            return self._responder(request)
        return self._responder

    @property
    def call_count(self) -> int:
        return len(self.calls)


class FailingTransport:
    """Always raises; useful for exercising degradation paths."""

    def __init__(self, message: str = "endpoint unreachable"):
        self.message = message
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        raise RetryableTransportError(self.message)


@dataclass
class RetryPolicy:
    max_retries: int = 3
    backoff: float = 0.5
    sleep: Callable[[float], None] = field(default=time.sleep, repr=False)


def complete_with_retry(transport: Transport, request: ChatRequest, policy: RetryPolicy) -> str:
    """Retry retryable transport failures with exponential backoff."""
    for attempt in range(policy.max_retries + 1):
        try:
            return transport.complete(request)
        except RetryableTransportError as exc:
            if attempt == policy.max_retries:
                raise TransportError(f"giving up after {attempt + 1} attempts: {exc}") from exc
            delay = policy.backoff * (2**attempt)
            log.warning("transport error (%s); retrying in %.1fs", exc, delay)
            policy.sleep(delay)
    raise AssertionError("unreachable")
