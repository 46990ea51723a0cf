"""Oracle backends: live HTTP chat completion, scripted tables and a record/replay cache.

Every backend answers ``complete(request) -> str``.  Scripted and replay
backends are keyed by (kind, sha-256 of the rendered prompt, sample index),
so they return identical text for identical requests in any process.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Protocol

import httpx

from ..errors import CacheConflictError, ReplayMissError, ScriptedMissError, TransportError
from .prompts import PromptKind, role_preamble

log = logging.getLogger(__name__)

CacheKey = tuple[str, str, int]


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class OracleRequest:
    kind: PromptKind
    rendered_prompt: str
    sample_index: int = 0
    role_preamble: str = field(default_factory=role_preamble)
    temperature: float = 1.0
    max_tokens: int = 256

    def __post_init__(self) -> None:
        if not self.rendered_prompt:
            raise ValueError("rendered_prompt must be non-empty")
        if self.sample_index < 0:
            raise ValueError("sample_index must be >= 0")
        object.__setattr__(self, "kind", PromptKind(self.kind))

    @property
    def digest(self) -> str:
        return prompt_digest(self.rendered_prompt)

    @property
    def key(self) -> CacheKey:
        return (self.kind.value, self.digest, self.sample_index)


class OracleBackend(Protocol):
    def complete(self, request: OracleRequest) -> str: ...


def complete(backend: OracleBackend, request: OracleRequest) -> str:
    return backend.complete(request)


def _record(key: CacheKey, response: str) -> dict:
    return {"kind": key[0], "digest": key[1], "sample": key[2], "response": response}


def _read_records(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad JSON line") from exc
            yield rec


class _Counter:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.calls = 0

    def bump(self) -> None:
        with self._lock:
            self.calls += 1


class ScriptedBackend:
    """Answers from a fixed table; unknown keys raise ScriptedMissError."""

    def __init__(self, records: Iterable[dict] = ()) -> None:
        self.table: dict[CacheKey, str] = {}
        for rec in records:
            key = (PromptKind(rec["kind"]).value, rec["digest"], int(rec["sample"]))
            if key in self.table and self.table[key] != rec["response"]:
                raise CacheConflictError(f"conflicting scripted responses for {key}")
            self.table[key] = rec["response"]
        self._counter = _Counter()

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ScriptedBackend":
        return cls(_read_records(path))

    @property
    def calls(self) -> int:
        return self._counter.calls

    def complete(self, request: OracleRequest) -> str:
        self._counter.bump()
        try:
            return self.table[request.key]
        except KeyError:
            raise ScriptedMissError(
                f"no scripted response for {request.kind.value} sample {request.sample_index}: "
                f"{request.rendered_prompt[:80]!r}"
            ) from None


class ReplayCache:
    """Append-only JSONL store; a key, once written, is never overwritten."""

    def __init__(self, path: str | Path | None = None) -> None:
        self.path = Path(path) if path is not None else None
        self._entries: dict[CacheKey, str] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for rec in _read_records(self.path):
                self._entries.setdefault((rec["kind"], rec["digest"], int(rec["sample"])), rec["response"])

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: CacheKey) -> bool:
        return key in self._entries

    def get(self, key: CacheKey) -> str | None:
        return self._entries.get(key)

    def put(self, key: CacheKey, response: str) -> None:
        with self._lock:
            old = self._entries.get(key)
            if old is not None:
                if old != response:
                    raise CacheConflictError(f"replay key {key} already holds a different response")
                return
            self._entries[key] = response
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(_record(key, response), ensure_ascii=False) + "\n")

    def records(self) -> list[dict]:
        return [_record(k, v) for k, v in self._entries.items()]


class ReplayBackend:
    """Serve from a cache; on a miss, ask ``fallback`` and record (or fail when replay-only)."""

    def __init__(self, cache: ReplayCache, fallback: OracleBackend | None = None) -> None:
        self.cache = cache
        self.fallback = fallback

    @property
    def replay_only(self) -> bool:
        return self.fallback is None

    def complete(self, request: OracleRequest) -> str:
        hit = self.cache.get(request.key)
        if hit is not None:
            return hit
        if self.fallback is None:
            raise ReplayMissError(
                f"replay miss for {request.kind.value} sample {request.sample_index}: "
                f"{request.rendered_prompt[:80]!r}"
            )
        response = self.fallback.complete(request)
        self.cache.put(request.key, response)
        return response


_RETRY_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class HttpBackend:
    """Minimal chat-completion client with bounded retries and in-flight limit."""

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        model: str = "gpt-3.5-turbo",
        *,
        max_retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 60.0,
        max_in_flight: int = 8,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self.url = url or os.environ.get("SYMBOLACT_ORACLE_URL")
        if not self.url:
            raise ValueError("no oracle URL; pass url= or set SYMBOLACT_ORACLE_URL")
        self.api_key = api_key if api_key is not None else os.environ.get("SYMBOLACT_ORACLE_KEY")
        self.model = model
        self.max_retries = max_retries
        self.backoff = backoff
        self._slots = threading.BoundedSemaphore(max_in_flight)
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)
        self._counter = _Counter()

    @property
    def calls(self) -> int:
        return self._counter.calls

    def close(self) -> None:
        self._client.close()

    def payload(self, request: OracleRequest) -> dict:
        return {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.role_preamble},
                {"role": "user", "content": request.rendered_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "n": 1,
        }

    def complete(self, request: OracleRequest) -> str:
        body = self.payload(request)
        last: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            with self._slots:
                self._counter.bump()
                try:
                    resp = self._client.post(self.url, json=body)
                except httpx.TransportError as exc:
                    last = exc
                    log.warning("oracle transport failure (attempt %d): %s", attempt + 1, exc)
                    continue
            if resp.status_code in _RETRY_STATUS:
                last = TransportError(f"HTTP {resp.status_code}")
                log.warning("oracle returned %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"unexpected completion payload: {resp.text[:200]}") from exc
        raise TransportError(f"oracle unreachable after {self.max_retries + 1} attempts: {last}")
