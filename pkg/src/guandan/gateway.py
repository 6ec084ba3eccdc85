"""Chat-completion gateway with an HTTP backend and a deterministic mock.

The mock backend is a pure function of the request: it hashes the system
text and messages (SHA-256 over role/text pairs with unit separators) and
answers either the canned text registered for that digest or the fallback
``[mock:<first-12-hex>]``. The HTTP backend POSTs an OpenAI-compatible
chat-completions body and retries 429/5xx and transport failures with
exponential backoff (base 500 ms, factor 2, up to max_retries).

Credentials are read from the environment at request time and are never
interpolated into logs, errors, or serialized descriptions.
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Mapping

import requests

__all__ = [
    "BACKOFF_BASE_MS",
    "BACKOFF_FACTOR",
    "GatewayError",
    "TransportError",
    "ProviderError",
    "ProtocolError",
    "ChatRequest",
    "BackendConfig",
    "prompt_digest",
    "complete",
    "describe",
]

log = logging.getLogger(__name__)

BACKOFF_BASE_MS = 500
BACKOFF_FACTOR = 2
RETRIABLE_STATUSES = frozenset({429, 500, 502, 503, 504})


class GatewayError(Exception):
    """Base error for backend failures."""


class TransportError(GatewayError):
    """Network failure or timeout that survived all retries."""


class ProviderError(GatewayError):
    """Non-2xx response from the provider."""

    def __init__(self, message: str, status: int) -> None:
        super().__init__(message)
        self.status = status


class ProtocolError(GatewayError):
    """Response body did not match the chat-completions shape."""


@dataclass(frozen=True)
class ChatRequest:
    """One chat-completion call."""

    system_text: str
    messages: tuple[tuple[str, str], ...]
    temperature: float = 0.0
    max_tokens: int = 512
    model_name: str = "mock-small"

    def __post_init__(self) -> None:
        if not any(role == "user" for role, _ in self.messages):
            raise ValueError("request needs at least one user message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class BackendConfig:
    """Where completions come from: a remote endpoint or the mock table."""

    kind: str
    endpoint: str = ""
    token_env: str = ""
    timeout_ms: int = 30000
    max_retries: int = 2
    mock_table: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("http", "mock"):
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        if self.kind == "http" and (not self.endpoint or not self.token_env):
            raise ValueError("http backend requires endpoint and token_env")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def prompt_digest(request: ChatRequest) -> str:
    """SHA-256 hex over the system text and ordered messages."""
    parts = [("system", request.system_text), *request.messages]
    payload = "\x1e".join(role + "\x1f" + text for role, text in parts)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def describe(backend: BackendConfig) -> dict[str, object]:
    """Loggable backend summary; names the token variable, never its value."""
    return {
        "kind": backend.kind,
        "endpoint": backend.endpoint,
        "token_env": backend.token_env,
        "timeout_ms": backend.timeout_ms,
        "max_retries": backend.max_retries,
    }


def _mock_complete(request: ChatRequest, backend: BackendConfig) -> str:
    digest = prompt_digest(request)
    canned = backend.mock_table.get(digest)
    if canned is not None:
        return canned
    return f"[mock:{digest[:12]}]"


def _http_complete(request: ChatRequest, backend: BackendConfig) -> str:
    token = os.environ.get(backend.token_env)
    if token is None:
        raise GatewayError(
            f"auth token environment variable {backend.token_env} is not set"
        )
    url = backend.endpoint.rstrip("/") + "/chat/completions"
    body = {
        "model": request.model_name,
        "messages": [
            {"role": "system", "content": request.system_text},
            *({"role": role, "content": text} for role, text in request.messages),
        ],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    }
    headers = {
        "Authorization": f"Bearer {token}",
        "Content-Type": "application/json",
    }
    timeout = backend.timeout_ms / 1000.0
    last_status: int | None = None
    last_transport: Exception | None = None
    for attempt in range(backend.max_retries + 1):
        if attempt > 0:
            delay_ms = BACKOFF_BASE_MS * BACKOFF_FACTOR ** (attempt - 1)
            time.sleep(delay_ms / 1000.0)
        try:
            response = requests.post(url, json=body, headers=headers, timeout=timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            # never interpolate headers into the error: it would leak the token
            last_transport = exc
            log.debug("transport failure for %s (attempt %d)", url, attempt + 1)
            continue
        if response.status_code in RETRIABLE_STATUSES:
            last_status = response.status_code
            last_transport = None
            log.debug(
                "retriable status %d from %s (attempt %d)",
                response.status_code, url, attempt + 1,
            )
            continue
        if not 200 <= response.status_code < 300:
            raise ProviderError(
                f"provider returned status {response.status_code} for {url}",
                status=response.status_code,
            )
        try:
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(f"malformed completion body from {url}") from exc
        if not isinstance(text, str):
            raise ProtocolError(f"completion content is not text from {url}")
        return text
    if last_status is not None:
        raise ProviderError(
            f"provider still returning status {last_status} for {url} "
            f"after {backend.max_retries + 1} attempts",
            status=last_status,
        )
    raise TransportError(
        f"cannot reach {url} after {backend.max_retries + 1} attempts"
    ) from last_transport


def complete(request: ChatRequest, backend: BackendConfig) -> str:
    """Completion text for the request from the configured backend."""
    if backend.kind == "mock":
        return _mock_complete(request, backend)
    return _http_complete(request, backend)
