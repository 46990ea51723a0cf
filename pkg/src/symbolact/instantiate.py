"""The symbol-rule loop: grow rules from known symbols until they pass the entailment gate.

A conclusion's sub-system is built from a FIFO queue of known symbols.  Each
popped symbol seeds ``branch_factor`` candidate rules; a candidate alternates
entailment scoring and rule extension until its mean score reaches ``e_h``
(accept), its score drops ``drop_patience`` times in a row, or it hits
``max_premises``.  Symbols minted by accepted rules are queued while fewer
than ``max_extension_symbols`` symbols have been queued in total.

Query accounting: every oracle call lands in exactly one CostLedger bucket.
Calls spent on a candidate are held locally and committed to the productive
buckets (entailment, extension) only when the candidate becomes a new rule;
everything else (abandoned or duplicate candidates, malformed-answer retries,
echo resamples) goes to ``early_stop_queries``.
"""

from __future__ import annotations

import enum
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

from .errors import InvalidSymbolText, MalformedResponseError, OracleError, SymbolActError
from .graph import SubSystem, SymbolicSystem, canonicalize_symbol_text, merge_subsystems
from .oracle.backends import OracleBackend, OracleRequest, prompt_digest
from .oracle.parsing import parse_response
from .oracle.prompts import (
    PromptKind,
    conclusion_prompts,
    render_entailment,
    render_rule_extension,
    render_symbol_init,
)
from .phrasing import phrase_to_symbol

log = logging.getLogger(__name__)

UNKNOWN_SCORE = 0.5


@dataclass(frozen=True)
class LoopConfig:
    e_h: float = 0.9
    n_ent: int = 5
    init_symbol_count: int = 5
    max_extension_symbols: int = 15
    max_premises: int = 6
    branch_factor: int = 2
    drop_patience: int = 2
    malformed_retries: int = 3
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.e_h <= 1:
            raise ValueError("e_h must lie in (0, 1]")
        if self.n_ent < 1:
            raise ValueError("n_ent must be >= 1")
        if self.max_premises < 2:
            raise ValueError("max_premises must be >= 2")
        if min(self.init_symbol_count, self.max_extension_symbols, self.branch_factor, self.drop_patience) < 1:
            raise ValueError("counts must be >= 1")
        if self.malformed_retries < 0:
            raise ValueError("malformed_retries must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "LoopConfig":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class CostLedger:
    conclusion: str = ""
    init_queries: int = 0
    entailment_queries: int = 0
    extension_queries: int = 0
    early_stop_queries: int = 0
    premise_counts: list[int] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.init_queries + self.entailment_queries + self.extension_queries + self.early_stop_queries

    def predicted(self, n_ent: int) -> int:
        return 1 + n_ent * sum(self.premise_counts)

    def _add(self, other: "CostLedger") -> None:
        self.init_queries += other.init_queries
        self.entailment_queries += other.entailment_queries
        self.extension_queries += other.extension_queries
        self.early_stop_queries += other.early_stop_queries

    def to_dict(self, n_ent: int | None = None) -> dict:
        doc = asdict(self)
        doc["total"] = self.total
        if n_ent is not None:
            doc["predicted"] = self.predicted(n_ent)
            doc["rule_count"] = len(self.premise_counts)
        return doc


def predicted_query_count(source: CostLedger | SymbolicSystem | Iterable[int], config: LoopConfig | int) -> int:
    """1 + n_ent * (sum of accepted-rule premise counts)."""
    n_ent = config if isinstance(config, int) else config.n_ent
    if isinstance(source, CostLedger):
        counts: Iterable[int] = source.premise_counts
    elif isinstance(source, SymbolicSystem):
        counts = (len(r.premise_ids) for r in source.rules.values())
    else:
        counts = source
    return 1 + n_ent * sum(counts)


class SampleCounter:
    """Hands out sample indices per (kind, prompt) so repeated prompts get fresh samples."""

    def __init__(self) -> None:
        self._next: dict[tuple[str, str], int] = {}

    def take(self, kind: PromptKind, prompt: str, start: int = 0) -> int:
        key = (PromptKind(kind).value, prompt_digest(prompt))
        idx = self._next.get(key, start)
        self._next[key] = idx + 1
        return idx


class CandidateStatus(str, enum.Enum):
    EXTENDING = "extending"
    ACCEPTED = "accepted"
    DUPLICATE = "duplicate"
    ABANDONED_DROP = "abandoned-drop"
    ABANDONED_CAP = "abandoned-cap"
    ABANDONED_ECHO = "abandoned-echo"
    ABANDONED_MALFORMED = "abandoned-malformed"


@dataclass
class CandidateRule:
    premises: list[str]
    raw_premises: list[str] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    flagged_unknown: bool = False
    status: CandidateStatus = CandidateStatus.EXTENDING
    ledger: CostLedger = field(default_factory=CostLedger)

    def __post_init__(self) -> None:
        if not self.raw_premises:
            self.raw_premises = list(self.premises)


@dataclass(frozen=True)
class EntailmentResult:
    mean: float
    flagged_unknown: bool
    samples: tuple[float | None, ...]


class _Oracle:
    """One conclusion's view of a backend: prompt forms, sample counters, retries."""

    def __init__(self, backend: OracleBackend, config: LoopConfig, conclusion: str,
                 object_hint: str | None, counter: SampleCounter | None = None) -> None:
        self.backend = backend
        self.config = config
        self.conclusion = canonicalize_symbol_text(conclusion)
        self.object_hint = object_hint
        self.activity, _ = conclusion_prompts(conclusion, object_hint)
        self.counter = counter or SampleCounter()

    def request(self, kind: PromptKind, prompt: str, sample: int) -> OracleRequest:
        return OracleRequest(kind, prompt, sample, temperature=self.config.temperature)

    def ask(self, kind: PromptKind, prompt: str, ledger: CostLedger, bucket: str,
            sample: int | None = None, count: int = 5) -> Any:
        """Query with bounded resampling on malformed answers.

        The first attempt is charged to ``bucket``; retries are overhead.
        """
        attempts = self.config.malformed_retries + 1
        for attempt in range(attempts):
            if attempt == 0 and sample is not None:
                idx = sample
            elif kind is PromptKind.ENTAILMENT_CHECK:
                idx = self.counter.take(kind, prompt, start=self.config.n_ent)
            else:
                idx = self.counter.take(kind, prompt)
            if attempt == 0:
                setattr(ledger, bucket, getattr(ledger, bucket) + 1)
            else:
                ledger.early_stop_queries += 1
            raw = self.backend.complete(self.request(kind, prompt, idx))
            try:
                return parse_response(kind, raw, count)
            except MalformedResponseError as exc:
                log.debug("malformed %s answer (attempt %d): %s", kind.value, attempt + 1, exc)
                err = exc
        raise err


def _symbol_text(phrase: str) -> str | None:
    try:
        return canonicalize_symbol_text(phrase_to_symbol(phrase))
    except InvalidSymbolText:
        return None


def _initialize(oracle: _Oracle, ledger: CostLedger) -> list[tuple[str, str]]:
    prompt = render_symbol_init(oracle.activity, oracle.object_hint, oracle.config.init_symbol_count)
    phrases = oracle.ask(PromptKind.SYMBOL_INIT, prompt, ledger, "init_queries",
                         count=oracle.config.init_symbol_count)
    out: dict[str, str] = {}
    for phrase in phrases:
        text = _symbol_text(phrase)
        if text is not None and text != oracle.conclusion:
            out.setdefault(text, phrase)
    return list(out.items())


def _score(oracle: _Oracle, premises: Sequence[str], ledger: CostLedger) -> EntailmentResult:
    prompt = render_entailment(list(premises), oracle.activity, oracle.object_hint)
    samples = tuple(
        oracle.ask(PromptKind.ENTAILMENT_CHECK, prompt, ledger, "entailment_queries", sample=i)
        for i in range(oracle.config.n_ent)
    )
    values = [UNKNOWN_SCORE if s is None else s for s in samples]
    mean = round(math.fsum(values) / len(values), 12)
    return EntailmentResult(mean, any(s is None for s in samples), samples)


def _extend(oracle: _Oracle, candidate: CandidateRule) -> str | None:
    prompt = render_rule_extension(candidate.premises, oracle.activity, oracle.object_hint)
    taken = set(candidate.premises) | {oracle.conclusion}
    for attempt in range(2):
        bucket = "extension_queries" if attempt == 0 else "early_stop_queries"
        sample = oracle.counter.take(PromptKind.RULE_EXTENSION, prompt)
        phrase = oracle.ask(PromptKind.RULE_EXTENSION, prompt, candidate.ledger, bucket, sample=sample)
        text = _symbol_text(phrase)
        if text is not None and text not in taken:
            candidate.premises.append(text)
            candidate.raw_premises.append(phrase)
            return text
    candidate.status = CandidateStatus.ABANDONED_ECHO
    return None


# -- public single-step operations ---------------------------------------------


def initialize_symbols(conclusion: str, backend: OracleBackend, config: LoopConfig = LoopConfig(), *,
                       object_hint: str | None = None, ledger: CostLedger | None = None) -> list[str]:
    """Canonical, de-duplicated initial symbols for ``conclusion``."""
    if not conclusion.strip():
        raise ValueError("conclusion must be non-empty")
    ledger = ledger if ledger is not None else CostLedger(conclusion)
    return [t for t, _ in _initialize(_Oracle(backend, config, conclusion, object_hint), ledger)]


def score_entailment(premises: Sequence[str], conclusion: str, backend: OracleBackend,
                     config: LoopConfig = LoopConfig(), *, object_hint: str | None = None,
                     ledger: CostLedger | None = None) -> EntailmentResult:
    """Mean of ``n_ent`` sampled entailment answers; "unknown" counts as 0.5 and sets the flag."""
    if not premises:
        raise ValueError("premises must be non-empty")
    ledger = ledger if ledger is not None else CostLedger(conclusion)
    return _score(_Oracle(backend, config, conclusion, object_hint), premises, ledger)


def extend_rule(candidate: CandidateRule, conclusion: str, backend: OracleBackend,
                config: LoopConfig = LoopConfig(), *, object_hint: str | None = None,
                counter: SampleCounter | None = None) -> str | None:
    """Ask for one more premise; returns its canonical text, or None when the candidate is abandoned."""
    if candidate.status is not CandidateStatus.EXTENDING:
        raise ValueError(f"candidate is {candidate.status.value}, not extending")
    if len(candidate.premises) >= config.max_premises:
        raise ValueError("candidate already has max_premises premises")
    oracle = _Oracle(backend, config, conclusion, object_hint, counter)
    try:
        return _extend(oracle, candidate)
    except MalformedResponseError:
        candidate.status = CandidateStatus.ABANDONED_MALFORMED
        return None


def grow_candidate(oracle: _Oracle, seed: str) -> CandidateRule:
    cfg = oracle.config
    cand = CandidateRule([seed], ledger=CostLedger(oracle.conclusion))
    drops = 0
    try:
        while True:
            res = _score(oracle, cand.premises, cand.ledger)
            if cand.scores and res.mean < cand.scores[-1]:
                drops += 1
            else:
                drops = 0
            cand.scores.append(res.mean)
            cand.flagged_unknown = cand.flagged_unknown or res.flagged_unknown
            if res.mean >= cfg.e_h:
                cand.status = CandidateStatus.ACCEPTED
            elif drops >= cfg.drop_patience:
                cand.status = CandidateStatus.ABANDONED_DROP
            elif len(cand.premises) >= cfg.max_premises:
                cand.status = CandidateStatus.ABANDONED_CAP
            if cand.status is not CandidateStatus.EXTENDING:
                return cand
            if _extend(oracle, cand) is None:
                return cand
    except MalformedResponseError:
        cand.status = CandidateStatus.ABANDONED_MALFORMED
        return cand


# -- the loop ------------------------------------------------------------------


@dataclass
class RoundStats:
    round: int
    new_symbols: int = 0
    new_rules: int = 0
    duplicates: int = 0
    abandoned: int = 0


@dataclass(frozen=True)
class CandidateRecord:
    seed: str
    round: int
    premises: tuple[str, ...]
    scores: tuple[float, ...]
    status: str
    rule_id: int | None = None


@dataclass
class InstantiationResult:
    subsystem: SubSystem
    ledger: CostLedger
    config: LoopConfig
    rounds: list[RoundStats]
    orphans: list[str]
    candidates: list[CandidateRecord]
    partial: bool = False
    error: str | None = None

    @property
    def round_count(self) -> int:
        return len(self.rounds)

    def new_symbol_counts(self) -> list[int]:
        return [r.new_symbols for r in self.rounds]

    def report(self) -> dict:
        return {
            "conclusion": self.ledger.conclusion,
            "partial": self.partial,
            "error": self.error,
            "ledger": self.ledger.to_dict(self.config.n_ent),
            "symbol_count": len(self.subsystem.premise_symbols()),
            "rule_count": len(self.subsystem.rules),
            "rounds": [asdict(r) for r in self.rounds],
            "orphans": self.orphans,
            "candidates": [asdict(c) for c in self.candidates],
        }


def _finish(sub: SubSystem, born: dict[int, int], init_ids: list[int], max_round: int) -> tuple[SubSystem, list[RoundStats], list[str]]:
    used = sub.premise_ids()
    orphans = [sub.text(i) for i in init_ids if i not in used]
    keep = [s for s in sub if s.id in used or s.id == sub.conclusion_id]
    final = SubSystem.from_parts(keep, sub.rules.values(), sub.conclusion_id)
    rounds = [RoundStats(k) for k in range(1, max_round + 1)]
    for sid in used:
        rounds[born[sid] - 1].new_symbols += 1
    for r in final.rules.values():
        rounds[r.round_index - 1].new_rules += 1
    return final, rounds, orphans


def instantiate_subsystem(conclusion: str, backend: OracleBackend, config: LoopConfig = LoopConfig(), *,
                          object_hint: str | None = None) -> InstantiationResult:
    """Run the symbol-rule loop for one conclusion.

    Transport failures and replay/scripted misses stop the loop and return
    what was built so far with ``partial=True``.
    """
    if not conclusion.strip():
        raise ValueError("conclusion must be non-empty")
    oracle = _Oracle(backend, config, conclusion, object_hint)
    ledger = CostLedger(oracle.conclusion)
    sub = SubSystem(0)
    cid = sub.upsert_symbol(conclusion, is_conclusion=True)
    sub.conclusion_id = cid
    born: dict[int, int] = {}
    init_ids: list[int] = []
    candidates: list[CandidateRecord] = []
    stats: dict[int, RoundStats] = {}
    max_round = 1
    error = None

    try:
        for text, raw in _initialize(oracle, ledger):
            sid = sub.upsert_symbol(text, raw_text=raw)
            born[sid] = 1
            init_ids.append(sid)
        queue = deque((sid, 1) for sid in init_ids[: config.max_extension_symbols])
        queued = len(queue)

        while queue:
            sid, gen = queue.popleft()
            rnd = gen + 1
            max_round = max(max_round, rnd)
            st = stats.setdefault(rnd, RoundStats(rnd))
            for _ in range(config.branch_factor):
                cand = grow_candidate(oracle, sub.text(sid))
                rule_id = None
                if cand.status is CandidateStatus.ACCEPTED:
                    existing = sub.find_rule(cand.premises, sub.text(cid))
                    if existing is not None:
                        cand.status = CandidateStatus.DUPLICATE
                        st.duplicates += 1
                    else:
                        fresh = [t for t in cand.premises if sub.symbol_id(t) is None]
                        pids = [sub.upsert_symbol(t, raw_text=r) for t, r in zip(cand.premises, cand.raw_premises)]
                        rule_id = sub.insert_rule(
                            pids, cid, cand.scores[-1], round_index=rnd, flagged_unknown=cand.flagged_unknown
                        )
                        for t in fresh:
                            nid = sub.symbol_id(t)
                            born[nid] = rnd
                            if queued < config.max_extension_symbols:
                                queue.append((nid, rnd))
                                queued += 1
                else:
                    st.abandoned += 1
                if rule_id is not None:
                    ledger.entailment_queries += cand.ledger.entailment_queries
                    ledger.extension_queries += cand.ledger.extension_queries
                    ledger.early_stop_queries += cand.ledger.early_stop_queries
                    ledger.premise_counts.append(len(cand.premises))
                else:
                    ledger.early_stop_queries += cand.ledger.total
                candidates.append(CandidateRecord(
                    sub.text(sid), rnd, tuple(cand.premises), tuple(cand.scores), cand.status.value, rule_id
                ))
    except OracleError as exc:
        if isinstance(exc, MalformedResponseError) and not init_ids:
            error = f"symbol initialization failed: {exc}"
        else:
            error = str(exc)
        log.warning("instantiation of %r stopped early: %s", conclusion, error)

    final, rounds, orphans = _finish(sub, born, init_ids, max_round)
    for r in rounds:
        if r.round in stats:
            r.duplicates = stats[r.round].duplicates
            r.abandoned = stats[r.round].abandoned
    return InstantiationResult(final, ledger, config, rounds, orphans, candidates, error is not None, error)


@dataclass
class SystemResult:
    system: SymbolicSystem
    results: dict[str, InstantiationResult]
    failed: list[str]

    def report(self) -> dict:
        return {
            "failed": self.failed,
            "conclusions": {name: res.report() for name, res in self.results.items()},
        }


def instantiate_system(conclusions: Sequence[str | tuple[str, str | None]], backend: OracleBackend,
                       config: LoopConfig = LoopConfig()) -> SystemResult:
    """One sub-system per conclusion, merged; failed conclusions are listed, not merged."""
    if not conclusions:
        raise ValueError("conclusions must be non-empty")
    items = [(c, None) if isinstance(c, str) else (c[0], c[1]) for c in conclusions]
    names = [canonicalize_symbol_text(c) for c, _ in items]
    if len(set(names)) != len(names):
        raise ValueError("conclusions must be canonically distinct")
    results: dict[str, InstantiationResult] = {}
    failed: list[str] = []
    for (text, hint), name in zip(items, names):
        try:
            res = instantiate_subsystem(text, backend, config, object_hint=hint)
        except SymbolActError as exc:
            log.warning("conclusion %r failed: %s", text, exc)
            failed.append(name)
            continue
        results[name] = res
        if res.partial:
            failed.append(name)
    merged = merge_subsystems(res.subsystem for name, res in results.items() if name not in failed)
    return SystemResult(merged, results, failed)
