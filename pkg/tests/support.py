"""Test helpers: hand-built scripted traces, a seeded random oracle, brute-force reference evaluators."""

from __future__ import annotations

import math
import random
import re
from itertools import combinations

from symbolact.oracle import OracleRequest, PromptKind, ScriptedBackend, prompt_digest
from symbolact.oracle.prompts import conclusion_prompts, render_entailment, render_rule_extension, render_symbol_init

LETTER_VALUE = {"a": 0.1, "b": 0.5, "c": 0.7, "d": 0.9, "e": 0.95}


class TraceBuilder:
    """Assemble a scripted table from the public renderers."""

    def __init__(self, conclusion: str, object_hint: str | None = None) -> None:
        self.activity, _ = conclusion_prompts(conclusion, object_hint)
        self.hint = object_hint
        self.records: list[dict] = []

    def _add(self, kind: PromptKind, prompt: str, sample: int, response: str) -> None:
        self.records.append(
            {"kind": kind.value, "digest": prompt_digest(prompt), "sample": sample, "response": response}
        )

    def init(self, phrases: list[str], raw: str | None = None) -> "TraceBuilder":
        prompt = render_symbol_init(self.activity, self.hint, len(phrases))
        body = raw if raw is not None else " ".join(f"{i}. Hands {p}." for i, p in enumerate(phrases, 1))
        self._add(PromptKind.SYMBOL_INIT, prompt, 0, body)
        return self

    def entail(self, premises: list[str], letters: str, start: int = 0) -> "TraceBuilder":
        prompt = render_entailment(premises, self.activity, self.hint)
        for i, letter in enumerate(letters, start):
            self._add(PromptKind.ENTAILMENT_CHECK, prompt, i, letter)
        return self

    def extend(self, premises: list[str], answer: str, sample: int = 0, raw: str | None = None) -> "TraceBuilder":
        prompt = render_rule_extension(premises, self.activity, self.hint)
        self._add(PromptKind.RULE_EXTENSION, prompt, sample, raw if raw is not None else f"[condition] is: [{answer}].")
        return self

    def backend(self) -> ScriptedBackend:
        return ScriptedBackend(self.records)


VOCAB = [
    f"{verb} the {noun}"
    for verb in ("hold", "push", "grab", "touch", "lift")
    for noun in ("rail", "cup", "rope", "door")
]


class RandomOracle:
    """Deterministic pseudo-random answers keyed by request; every call is logged."""

    def __init__(self, seed: int, vocab: list[str] = VOCAB, malformed: float = 0.05,
                 letters: str = "aabcddeef") -> None:
        self.seed = seed
        self.vocab = vocab
        self.malformed = malformed
        self.letters = letters
        self.log: list[tuple[str, str, int]] = []

    def complete(self, req: OracleRequest) -> str:
        self.log.append((req.kind.value, req.rendered_prompt, req.sample_index))
        rng = random.Random(f"{self.seed}|{req.kind.value}|{req.digest}|{req.sample_index}")
        bad = rng.random() < self.malformed
        if req.kind is PromptKind.SYMBOL_INIT:
            count = int(re.search(r"Answer with (\d+)", req.rendered_prompt).group(1))
            if bad:
                return "Sorry, I cannot see the picture."
            return " ".join(f"{i}. Hands {rng.choice(self.vocab)}." for i in range(1, count + 1))
        if req.kind is PromptKind.RULE_EXTENSION:
            return "no idea" if bad else f"[condition] is: [{rng.choice(self.vocab)}]."
        if req.kind is PromptKind.ENTAILMENT_CHECK:
            return rng.choice(["g", "maybe?"]) if bad else rng.choice(self.letters)
        raise AssertionError(f"unexpected kind {req.kind}")


# -- brute-force references ------------------------------------------------------


def ap_reference(scores, labels) -> float | None:
    """AP from ranks counted pairwise: rank_i = 1 + #{j : s_j > s_i or (s_j == s_i and j < i)}."""
    n = len(scores)
    ranks = [1 + sum(1 for j in range(n) if scores[j] > scores[i] or (scores[j] == scores[i] and j < i))
             for i in range(n)]
    pos = [i for i in range(n) if labels[i]]
    if not pos:
        return None
    terms = []
    for i in pos:
        hits = sum(1 for j in pos if ranks[j] <= ranks[i])
        terms.append(hits / ranks[i])
    return math.fsum(terms) / len(pos)


def crisp_reference(rules: list[list[int]], truth: dict[int, int]) -> int:
    """OR over rules of AND over premises, on booleans."""
    return int(any(all(truth[p] == 1 for p in rule) for rule in rules))


def minmax_reference(rules: list[list[int]], probs: dict[int, float]) -> float:
    best = 0.0
    for rule in rules:
        worst = 1.0
        for p in rule:
            if probs[p] < worst:
                worst = probs[p]
        if worst > best:
            best = worst
    return best if rules else 0.0


def confusion_reference(items: list[tuple[str, str, frozenset]]) -> int:
    return sum(1 for a, b in combinations(items, 2) if a[1] != b[1] and a[2] == b[2])
