"""Parse raw oracle text into payloads; anything unexpected is a MalformedResponseError."""

from __future__ import annotations

import re
from typing import Any

from ..errors import MalformedResponseError
from .prompts import PromptKind

# entailment choices; None marks "unknown"
CHOICE_SCORES: dict[str, float | None] = {
    "a": 0.1,
    "b": 0.5,
    "c": 0.7,
    "d": 0.9,
    "e": 0.95,
    "f": None,
}

_ENUM_ITEM = re.compile(r"(?:^|(?<=\s))(\d+)[.)]\s+")
_SCAFFOLD = re.compile(r"(?i)^(?:(?:his|her|their|the person['’]s)\s+)?hands?\s*[:,-]?\s+")
_CONDITION = re.compile(r"(?is)\[?\s*(condition|summary)\s*\]?\s*is\s*:\s*(.+)")
_LETTER = re.compile(r"(?<![A-Za-z0-9])\(?([A-Za-z])\)?(?![A-Za-z0-9])")


def _clean_phrase(text: str) -> str:
    text = text.strip().strip("[]\"'").strip()
    return re.sub(r"[\s.;,]+$", "", text).strip()


def parse_numbered_list(raw: str, count: int | None = None) -> list[str]:
    """Split "1. x 2. y ..." (inline or one per line) into phrases."""
    marks = list(_ENUM_ITEM.finditer(raw))
    items = []
    expected = 1
    starts = []
    for m in marks:
        if int(m.group(1)) == expected:
            starts.append(m)
            expected += 1
    for i, m in enumerate(starts):
        end = starts[i + 1].start() if i + 1 < len(starts) else len(raw)
        phrase = _clean_phrase(raw[m.end():end])
        if phrase:
            items.append(phrase)
    if not items or (count is not None and len(items) != count):
        raise MalformedResponseError(f"expected a numbered list of {count or 'some'} phrases", raw)
    return items


def parse_symbol_init(raw: str, count: int = 5) -> list[str]:
    return [_SCAFFOLD.sub("", p, count=1) for p in parse_numbered_list(raw, count)]


def parse_bracketed_answer(raw: str) -> str:
    """Pull xxx out of "[condition] is: [xxx]." (brackets optional)."""
    m = _CONDITION.search(raw)
    if m is None:
        raise MalformedResponseError("no '[condition] is:' answer", raw)
    answer = m.group(2).strip().splitlines()[0]
    inner = re.match(r"^\[(.*?)\]", answer)
    phrase = _clean_phrase(inner.group(1) if inner else answer)
    if not phrase or phrase.lower() == "xxx":
        raise MalformedResponseError("empty condition phrase", raw)
    return phrase


def parse_choice(raw: str) -> float | None:
    """First standalone letter decides; only a-f are valid."""
    m = _LETTER.search(raw)
    if m is None:
        raise MalformedResponseError("no choice letter", raw)
    letter = m.group(1).lower()
    if letter not in CHOICE_SCORES:
        raise MalformedResponseError(f"choice {letter!r} is not one of a-f", raw)
    return CHOICE_SCORES[letter]


def parse_yes_no(raw: str) -> bool:
    m = re.search(r"(?i)\b(yes|no)\b", raw)
    if m is None:
        raise MalformedResponseError("no yes/no answer", raw)
    return m.group(1).lower() == "yes"


def parse_response(kind: PromptKind, raw: str, count: int = 5) -> Any:
    """Dispatch on prompt kind.

    SymbolInit -> list of ``count`` phrases; RuleExtension and
    HierarchySummarize -> one phrase; EntailmentCheck -> score or None for
    "unknown"; Paraphrase -> list of ``count`` phrases; YesNoStatement -> bool.
    """
    if not raw or not raw.strip():
        raise MalformedResponseError("empty response", raw or "")
    kind = PromptKind(kind)
    if kind is PromptKind.SYMBOL_INIT:
        return parse_symbol_init(raw, count)
    if kind in (PromptKind.RULE_EXTENSION, PromptKind.HIERARCHY_SUMMARIZE):
        return parse_bracketed_answer(raw)
    if kind is PromptKind.ENTAILMENT_CHECK:
        return parse_choice(raw)
    if kind is PromptKind.PARAPHRASE:
        return parse_numbered_list(raw, count)
    return parse_yes_no(raw)
