"""Model backends: the chat-completion API, the offline rule table, and cache wrappers."""
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import requests

from lapa.annotate import rules
from lapa.annotate.cache import ResponseCache
from lapa.annotate.prompts import CLASSIFY_STAGE, SEGMENT_STAGE, BackendRequest, BackendResponse
from lapa.errors import BackendError, CacheMissError
from lapa.utils import canonical_json

logger = logging.getLogger(__name__)

RULES_BACKEND_ID = "rules-v1"
RETRY_BACKOFF_SECONDS = (1.0, 2.0, 4.0)
RETRYABLE_STATUS_CODES = {429, 500, 502, 503, 504}


class Backend(Protocol):
    backend_id: str

    def complete(self, request: BackendRequest) -> BackendResponse:
        ...


@dataclass
class ApiBackend:
    """Client for an HTTP chat-completion endpoint in the OpenAI wire format.

    Transient failures (connection errors, timeouts, 429 and 5xx) are retried: one initial attempt plus one retry
    per `backoff` delay, so the default (1s, 2s, 4s) makes at most four requests. Anything the endpoint returns
    that is not a usable completion surfaces as `BackendError`.
    """

    base_url: str
    api_key: str
    model: str
    timeout: float = 120.0
    backoff: tuple[float, ...] = RETRY_BACKOFF_SECONDS
    sleep: Callable[[float], None] = time.sleep
    session: requests.Session = field(default_factory=requests.Session)

    @property
    def backend_id(self) -> str:
        return f"api:{self.model}"

    def complete(self, request: BackendRequest) -> BackendResponse:
        body = {
            "model": request.model,
            "temperature": request.temperature,
            "response_format": {"type": "json_object"},
            "messages": [
                {
                    "role": "system",
                    # schema serialized in declaration order (reasoning before the label)
                    "content": f"{request.system_instructions}\n\nJSON schema:\n{json.dumps(request.response_schema)}",
                },
                {"role": "user", "content": request.user_payload},
            ],
        }
        url = f"{self.base_url.rstrip('/')}/chat/completions"
        headers = {"Authorization": f"Bearer {self.api_key}"}

        attempts = len(self.backoff) + 1
        for attempt in range(1, attempts + 1):
            started = time.monotonic()
            try:
                response = self.session.post(url, json=body, headers=headers, timeout=self.timeout)
                if response.status_code in RETRYABLE_STATUS_CODES:
                    raise _RetryableStatus(response.status_code)
                response.raise_for_status()
            except (requests.ConnectionError, requests.Timeout, _RetryableStatus) as e:
                if attempt == attempts:
                    raise BackendError(f"{request.stage} request failed after {attempts} attempts: {e}") from e
                delay = self.backoff[attempt - 1]
                logger.warning(f"Transient backend failure ({e}); retrying in {delay}s ({attempt=})")
                self.sleep(delay)
                continue
            except requests.HTTPError as e:
                raise BackendError(f"{request.stage} request rejected: {e}") from e

            latency = time.monotonic() - started
            try:
                data = response.json()
            except ValueError as e:
                raise BackendError(f"{request.stage} response is not JSON: {e}") from e
            try:
                text = data["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as e:
                raise BackendError(f"Unexpected chat-completion response shape: {data!r}") from e
            if not isinstance(text, str):
                raise BackendError(f"Chat-completion content is not text: {text!r}")
            usage = data.get("usage") or {}
            if not isinstance(usage, dict):
                usage = {}
            return BackendResponse(
                text=text,
                backend_id=self.backend_id,
                usage={k: int(v) for k, v in usage.items() if isinstance(v, int)},
                latency=latency,
            )

        raise AssertionError("unreachable")


class _RetryableStatus(Exception):
    def __init__(self, status_code: int) -> None:
        super().__init__(f"HTTP {status_code}")
        self.status_code = status_code


class RuleBackend:
    """Deterministic offline backend answering both stages from the rule table."""

    backend_id = RULES_BACKEND_ID

    def complete(self, request: BackendRequest) -> BackendResponse:
        payload = request.payload
        if request.stage == SEGMENT_STAGE:
            answer = {"segments": [_segment_entry(entry) for entry in payload["entries"]]}
        elif request.stage == CLASSIFY_STAGE:
            answer = _classify(payload["target"]["description"])
        else:
            raise BackendError(f"Rule backend cannot answer stage {request.stage!r}")
        return BackendResponse(text=canonical_json(answer), backend_id=self.backend_id)


def _segment_entry(entry: dict) -> dict:
    first_line = next((line.strip() for line in entry["text"].splitlines() if line.strip()), "")
    return {"description": first_line, "first_entry": entry["index"], "last_entry": entry["index"]}


def _classify(description: str) -> dict:
    matched = rules.match_rule(description)
    if matched is None:
        return {"reasoning": "No persistence rule matches the action.", "is_persistence": False, "technique_label": ""}
    rule, label = matched
    return {"reasoning": f"Rule {rule.name}: {rule.reasoning}", "is_persistence": True, "technique_label": label}


@dataclass
class CachingBackend:
    """Serve from the cache when possible, otherwise ask `inner` and record its answer."""

    inner: Backend
    cache: ResponseCache

    @property
    def backend_id(self) -> str:
        return self.inner.backend_id

    def complete(self, request: BackendRequest) -> BackendResponse:
        cached = self.cache.get(request)
        if cached is not None:
            return cached
        response = self.inner.complete(request)
        self.cache.put(request, response)
        return response


@dataclass
class ReplayBackend:
    cache: ResponseCache
    backend_id: str = "replay"

    def complete(self, request: BackendRequest) -> BackendResponse:
        cached = self.cache.get(request)
        if cached is None:
            raise CacheMissError(request.cache_key)
        return cached


@dataclass
class BoundedBackend:
    """Cap the number of in-flight requests to `inner` across worker threads."""

    inner: Backend
    max_inflight: int
    _semaphore: threading.BoundedSemaphore = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._semaphore = threading.BoundedSemaphore(max(1, self.max_inflight))

    @property
    def backend_id(self) -> str:
        return self.inner.backend_id

    def complete(self, request: BackendRequest) -> BackendResponse:
        with self._semaphore:
            return self.inner.complete(request)
