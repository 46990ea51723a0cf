"""Prompt rendering, response parsing and backends for language oracles."""

from .backends import (
    HttpBackend,
    OracleRequest,
    ReplayBackend,
    ReplayCache,
    ScriptedBackend,
    complete,
    prompt_digest,
)
from .parsing import CHOICE_SCORES, parse_response
from .prompts import PromptKind

__all__ = [
    "CHOICE_SCORES",
    "HttpBackend",
    "OracleRequest",
    "PromptKind",
    "ReplayBackend",
    "ReplayCache",
    "ScriptedBackend",
    "complete",
    "parse_response",
    "prompt_digest",
]
