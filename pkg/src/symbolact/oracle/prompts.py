"""Prompt rendering for every oracle protocol.

Templates live in ``templates/<version>/*.txt`` so that replay caches stay
valid for the template version they were recorded against.
"""

from __future__ import annotations

import enum
import re
from functools import lru_cache
from importlib import resources
from string import Template
from typing import Sequence

from ..phrasing import activity_phrase, indefinite, is_sentence, statement

TEMPLATE_VERSION = "v1"


class PromptKind(str, enum.Enum):
    SYMBOL_INIT = "SymbolInit"
    RULE_EXTENSION = "RuleExtension"
    ENTAILMENT_CHECK = "EntailmentCheck"
    PARAPHRASE = "Paraphrase"
    YES_NO_STATEMENT = "YesNoStatement"
    HIERARCHY_SUMMARIZE = "HierarchySummarize"


@lru_cache(maxsize=None)
def load_template(name: str, version: str = TEMPLATE_VERSION) -> Template:
    path = resources.files("symbolact.oracle") / "templates" / version / f"{name}.txt"
    return Template(path.read_text(encoding="utf-8").rstrip("\n"))


def role_preamble(version: str = TEMPLATE_VERSION) -> str:
    return load_template("role", version).template


def _slots(count: int) -> str:
    return " ".join(f"{i}. xxx" for i in range(1, count + 1))


def _scene(object_hint: str | None) -> str:
    return f"there is {indefinite(object_hint)}. " if object_hint else ""


def _sentences(texts: Sequence[str]) -> str:
    return " ".join(t.strip() if is_sentence(t) else statement(t) for t in texts)


def _activity(activity: str, object_hint: str | None) -> str:
    # once the object is introduced by the scene sentence it becomes definite
    if not object_hint:
        return activity
    return re.sub(rf"\b(?:a|an)\s+({re.escape(object_hint)})\b", r"the \1", activity)


def render_symbol_init(activity: str, object_hint: str | None = None, count: int = 5) -> str:
    """Ask for ``count`` hand-state phrases for a person doing ``activity``.

    ``object_hint`` is accepted for symmetry with the other renderers; the
    initialization question does not mention the object separately.
    """
    if not activity.strip():
        raise ValueError("activity must be non-empty")
    return load_template("symbol_init").substitute(
        activity=activity.strip(), count=count, answer_slots=_slots(count)
    )


def render_rule_extension(known_premises: Sequence[str], activity: str, object_hint: str | None = None) -> str:
    if not known_premises:
        raise ValueError("rule extension needs at least one known premise")
    conclusion = f"The person is {_activity(activity.strip(), object_hint)}."
    return load_template("rule_extension").substitute(
        scene=_scene(object_hint), premises=_sentences(known_premises), conclusion=conclusion
    )


def render_entailment(premises: Sequence[str], activity: str, object_hint: str | None = None) -> str:
    if not premises:
        raise ValueError("entailment check needs at least one premise")
    body = _sentences(premises)
    if not object_hint:
        body = body[:1].lower() + body[1:]
    return load_template("entailment").substitute(
        scene=_scene(object_hint), premises=body, activity=_activity(activity.strip(), object_hint)
    )


def render_paraphrase(symbol_text: str, count: int = 5) -> str:
    return load_template("paraphrase").substitute(
        count=count, statement=statement(symbol_text), answer_slots=_slots(count)
    )


def render_yes_no(question: str) -> str:
    return load_template("yes_no").substitute(question=question)


def render_hierarchy(son_texts: Sequence[str]) -> str:
    return load_template("hierarchy").substitute(phrases="; ".join(son_texts))


def conclusion_prompts(conclusion_text: str, object_hint: str | None) -> tuple[str, str]:
    """Gerund phrases for a conclusion: (initialization form, extension/entailment form)."""
    plain = activity_phrase(conclusion_text)
    return plain, _activity(plain, object_hint)
