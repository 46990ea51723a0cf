"""Symbolic systems as B-graphs: symbols are vertices, rules are B-arcs.

A rule joins a non-empty set of premise symbols to exactly one conclusion
symbol.  Symbols are identified by canonical text, rules by the pair
(premise text set, conclusion text), so "1, 6, 7, 8 => c" and
"6, 1, 7, 8 => c" are the same rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

from .errors import (
    ConclusionInPremisesError,
    DuplicateRuleError,
    EmptyPremisesError,
    FrozenSystemError,
    InvalidSymbolText,
    MismatchedConclusionError,
    UnknownConclusionError,
)

_ARTICLE = re.compile(r"^(?:a|an|the)\s+")
_TRAILING = re.compile(r"[\s.,;:!?]+$")


def canonicalize_symbol_text(raw: str) -> str:
    """Lowercase, collapse whitespace, drop leading articles and trailing punctuation.

    >>> canonicalize_symbol_text("  HOLD   a Boarding Pass. ")
    'hold a boarding pass'
    """
    text = " ".join(raw.lower().split())
    while True:
        stripped = _TRAILING.sub("", _ARTICLE.sub("", text)).strip()
        if stripped == text:
            break
        text = stripped
    if not text:
        raise InvalidSymbolText(f"symbol text {raw!r} is empty after canonicalization")
    return text


@dataclass(frozen=True)
class Symbol:
    id: int
    text: str
    raw_text: str
    is_conclusion: bool = False


@dataclass(frozen=True)
class Rule:
    id: int
    premise_ids: frozenset[int]
    conclusion_id: int
    entailment_score: float | None = None  # None = unknown (e.g. imported rules)
    round_index: int = 1
    trace: tuple[int, ...] = ()  # premise ids in generation order
    flagged_unknown: bool = False
    merged_scores: tuple[float | None, ...] = ()


RuleKey = tuple[frozenset[str], str]


class SymbolicSystem:
    """Mutable while being built, read-only after :meth:`freeze`."""

    def __init__(self) -> None:
        self.symbols: dict[int, Symbol] = {}
        self.rules: dict[int, Rule] = {}
        self._by_text: dict[str, int] = {}
        self._rule_index: dict[RuleKey, int] = {}
        self._next_symbol_id = 0
        self._next_rule_id = 0
        self._frozen = False

    # -- construction ---------------------------------------------------

    @classmethod
    def from_parts(cls, symbols: Iterable[Symbol], rules: Iterable[Rule]) -> "SymbolicSystem":
        """Assemble a system without checking invariants (see :func:`validate`)."""
        system = cls()
        system._load(symbols, rules)
        return system

    def _load(self, symbols: Iterable[Symbol], rules: Iterable[Rule]) -> None:
        for s in symbols:
            self.symbols[s.id] = s
            self._by_text.setdefault(s.text, s.id)
            self._next_symbol_id = max(self._next_symbol_id, s.id + 1)
        for r in rules:
            self.rules[r.id] = r
            self._next_rule_id = max(self._next_rule_id, r.id + 1)
            key = self._key_or_none(r)
            if key is not None:
                self._rule_index.setdefault(key, r.id)

    def _check_mutable(self) -> None:
        if self._frozen:
            raise FrozenSystemError("system is frozen")

    def freeze(self) -> "SymbolicSystem":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def upsert_symbol(self, raw: str, is_conclusion: bool = False, raw_text: str | None = None) -> int:
        text = canonicalize_symbol_text(raw)
        sid = self._by_text.get(text)
        if sid is not None:
            if is_conclusion and not self.symbols[sid].is_conclusion:
                self._check_mutable()
                self.symbols[sid] = replace(self.symbols[sid], is_conclusion=True)
            return sid
        self._check_mutable()
        sid = self._next_symbol_id
        self._next_symbol_id += 1
        self.symbols[sid] = Symbol(sid, text, raw.strip() if raw_text is None else raw_text, is_conclusion)
        self._by_text[text] = sid
        return sid

    def insert_rule(
        self,
        premise_ids: Sequence[int],
        conclusion_id: int,
        entailment_score: float | None = None,
        *,
        round_index: int = 1,
        flagged_unknown: bool = False,
        merged_scores: tuple[float | None, ...] = (),
    ) -> int:
        """Add a rule over existing symbol ids; ``premise_ids`` order becomes the trace."""
        self._check_mutable()
        if not premise_ids:
            raise EmptyPremisesError("a rule needs at least one premise")
        if conclusion_id in premise_ids:
            raise ConclusionInPremisesError(
                f"conclusion {self.symbols[conclusion_id].text!r} is among the premises"
            )
        trace = tuple(dict.fromkeys(premise_ids))
        key = (frozenset(self.symbols[i].text for i in trace), self.symbols[conclusion_id].text)
        existing = self._rule_index.get(key)
        if existing is not None:
            raise DuplicateRuleError(existing)
        rid = self._next_rule_id
        self._next_rule_id += 1
        self.rules[rid] = Rule(
            rid, frozenset(trace), conclusion_id, entailment_score, round_index, trace,
            flagged_unknown, merged_scores,
        )
        self._rule_index[key] = rid
        return rid

    def replace_rule(self, rule: Rule) -> None:
        self._check_mutable()
        self.rules[rule.id] = rule

    # -- queries --------------------------------------------------------

    def symbol_id(self, raw: str) -> int | None:
        return self._by_text.get(canonicalize_symbol_text(raw))

    def text(self, symbol_id: int) -> str:
        return self.symbols[symbol_id].text

    def rule_key(self, rule: Rule) -> RuleKey:
        return (frozenset(self.symbols[i].text for i in rule.premise_ids), self.symbols[rule.conclusion_id].text)

    def _key_or_none(self, rule: Rule) -> RuleKey | None:
        try:
            return self.rule_key(rule)
        except KeyError:
            return None

    def find_rule(self, premise_texts: Iterable[str], conclusion_text: str) -> int | None:
        key = (
            frozenset(canonicalize_symbol_text(t) for t in premise_texts),
            canonicalize_symbol_text(conclusion_text),
        )
        return self._rule_index.get(key)

    def conclusions(self) -> list[Symbol]:
        return [s for s in self.symbols.values() if s.is_conclusion]

    def rules_for(self, conclusion_id: int) -> list[Rule]:
        return sorted((r for r in self.rules.values() if r.conclusion_id == conclusion_id), key=lambda r: r.id)

    def premise_ids(self) -> set[int]:
        return {i for r in self.rules.values() for i in r.premise_ids}

    def signature(self) -> tuple[frozenset, frozenset]:
        """Id-free identity: canonical symbol texts and canonical rules."""
        syms = frozenset((s.text, s.is_conclusion) for s in self.symbols.values())
        rules = frozenset(self.rule_key(r) for r in self.rules.values())
        return syms, rules

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[Symbol]:
        return iter(sorted(self.symbols.values(), key=lambda s: s.id))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({len(self.symbols)} symbols, {len(self.rules)} rules)"


class SubSystem(SymbolicSystem):
    """The slice of a system that concerns one conclusion."""

    def __init__(self, conclusion_id: int) -> None:
        super().__init__()
        self.conclusion_id = conclusion_id

    @classmethod
    def from_parts(cls, symbols: Iterable[Symbol], rules: Iterable[Rule], conclusion_id: int = 0) -> "SubSystem":
        sub = cls(conclusion_id)
        sub._load(symbols, rules)
        return sub

    @property
    def conclusion(self) -> Symbol:
        return self.symbols[self.conclusion_id]

    def premise_symbols(self) -> list[Symbol]:
        return [s for s in self if s.id != self.conclusion_id]


def add_rule(
    system: SymbolicSystem,
    premise_texts: Sequence[str],
    conclusion_text: str,
    score: float | None = None,
    *,
    round_index: int = 1,
    flagged_unknown: bool = False,
) -> int:
    """Upsert symbols by canonical text and store the rule.

    Raises DuplicateRuleError when the same premise set already concludes the
    same symbol, whatever order the premises were given in.
    """
    if not premise_texts:
        raise EmptyPremisesError("a rule needs at least one premise")
    conclusion = canonicalize_symbol_text(conclusion_text)
    premises = [canonicalize_symbol_text(t) for t in premise_texts]
    if conclusion in premises:
        raise ConclusionInPremisesError(f"conclusion {conclusion!r} is among the premises")
    existing = system.find_rule(premises, conclusion)
    if existing is not None:
        raise DuplicateRuleError(existing)
    cid = system.upsert_symbol(conclusion_text, is_conclusion=True)
    pids = [system.upsert_symbol(t) for t in premise_texts]
    return system.insert_rule(pids, cid, score, round_index=round_index, flagged_unknown=flagged_unknown)


def decompose(system: SymbolicSystem, conclusion_id: int) -> SubSystem:
    """Keep only the rules concluding ``conclusion_id`` and the symbols they use."""
    sym = system.symbols.get(conclusion_id)
    if sym is None or not sym.is_conclusion:
        raise UnknownConclusionError(f"no conclusion with id {conclusion_id}")
    rules = system.rules_for(conclusion_id)
    keep = {conclusion_id} | {i for r in rules for i in r.premise_ids}
    sub = SubSystem(conclusion_id)
    sub._load((system.symbols[i] for i in sorted(keep)), rules)
    sub._next_symbol_id = max(sub._next_symbol_id, system._next_symbol_id)
    sub._next_rule_id = max(sub._next_rule_id, system._next_rule_id)
    return sub


def decompose_by_text(system: SymbolicSystem, conclusion_text: str) -> SubSystem:
    cid = system.symbol_id(conclusion_text)
    if cid is None:
        raise UnknownConclusionError(f"no conclusion {conclusion_text!r}")
    return decompose(system, cid)


def merge_subsystems(subsystems: Iterable[SymbolicSystem]) -> SymbolicSystem:
    """Union of symbols (by canonical text) and rules (by canonical key).

    When the same rule arrives twice with different entailment scores the
    larger score is kept and every score seen is recorded on the rule.
    """
    merged = SymbolicSystem()
    for sub in subsystems:
        remap: dict[int, int] = {}
        for s in sub:
            remap[s.id] = merged.upsert_symbol(s.text, is_conclusion=s.is_conclusion, raw_text=s.raw_text)
        for r in sorted(sub.rules.values(), key=lambda r: r.id):
            trace = [remap[i] for i in (r.trace or sorted(r.premise_ids))]
            existing = merged.find_rule([merged.text(i) for i in trace], merged.text(remap[r.conclusion_id]))
            if existing is None:
                merged.insert_rule(
                    trace, remap[r.conclusion_id], r.entailment_score,
                    round_index=r.round_index, flagged_unknown=r.flagged_unknown,
                    merged_scores=r.merged_scores,
                )
                continue
            old = merged.rules[existing]
            if old.entailment_score == r.entailment_score and not r.merged_scores:
                continue
            seen = old.merged_scores or (old.entailment_score,)
            seen = seen + (r.merged_scores or (r.entailment_score,))
            known = [s for s in seen if s is not None]
            merged.replace_rule(
                replace(
                    old,
                    entailment_score=max(known) if known else None,
                    merged_scores=seen,
                    flagged_unknown=old.flagged_unknown or r.flagged_unknown,
                )
            )
    return merged


@dataclass(frozen=True)
class Finding:
    kind: str  # dangling-reference | duplicate-rule | empty-premises | conclusion-in-premises | duplicate-symbol-text
    detail: str
    rule_id: int | None = None


def validate(system: SymbolicSystem) -> list[Finding]:
    findings: list[Finding] = []
    texts: dict[str, int] = {}
    for s in system:
        if s.text in texts:
            findings.append(Finding("duplicate-symbol-text", f"symbols {texts[s.text]} and {s.id} share {s.text!r}"))
        else:
            texts[s.text] = s.id
    seen: dict[RuleKey, int] = {}
    for r in sorted(system.rules.values(), key=lambda r: r.id):
        dangling = False
        for i in sorted(r.premise_ids | {r.conclusion_id}):
            if i not in system.symbols:
                dangling = True
                findings.append(Finding("dangling-reference", f"rule {r.id} references missing symbol {i}", r.id))
        if not r.premise_ids:
            findings.append(Finding("empty-premises", f"rule {r.id} has no premises", r.id))
        if r.conclusion_id in r.premise_ids:
            findings.append(Finding("conclusion-in-premises", f"rule {r.id} concludes one of its premises", r.id))
        if dangling:
            continue
        key = system.rule_key(r)
        if key in seen:
            findings.append(Finding("duplicate-rule", f"rule {r.id} duplicates rule {seen[key]}", r.id))
        else:
            seen[key] = r.id
    return findings


def _jaccard(a: set, b: set) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def graph_similarity(a: SymbolicSystem, b: SymbolicSystem) -> float:
    """Mean of the rescaled Jaccard indices over symbols and over rules, in [-1, 1].

    Sub-systems must share their conclusion; the conclusion takes part in the
    symbol Jaccard like any other vertex.
    """
    if isinstance(a, SubSystem) and isinstance(b, SubSystem):
        if a.conclusion.text != b.conclusion.text:
            raise MismatchedConclusionError(f"{a.conclusion.text!r} vs {b.conclusion.text!r}")
    syms_a = {s.text for s in a.symbols.values()}
    syms_b = {s.text for s in b.symbols.values()}
    rules_a = {a.rule_key(r) for r in a.rules.values()}
    rules_b = {b.rule_key(r) for r in b.rules.values()}
    return ((2 * _jaccard(syms_a, syms_b) - 1) + (2 * _jaccard(rules_a, rules_b) - 1)) / 2
