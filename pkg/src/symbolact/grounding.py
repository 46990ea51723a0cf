"""Symbol grounding: statements, yes/no normalization, the paraphrase checker, reuse and pruning.

Scores come from a ScoringBackend keyed by (image id, canonical text).  The
table backend stands in for a vision-language model at desk scale.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .errors import CoverageMissError, TreeMismatchError
from .files import read_json, write_json
from .graph import Symbol, SymbolicSystem, canonicalize_symbol_text
from .oracle.backends import OracleBackend, OracleRequest
from .oracle.parsing import parse_response
from .oracle.prompts import PromptKind, render_paraphrase, render_yes_no
from .phrasing import statement, yes_no_question

DEFAULT_STD_THRESHOLD = 0.05


class Policy(str, enum.Enum):
    NEUTRAL = "neutral"
    DROP_PREMISE = "drop-premise"
    DROP_RULE = "drop-rule"


@dataclass(frozen=True)
class ScorePair:
    p_yes: float
    p_no: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p_yes) and math.isfinite(self.p_no)):
            raise ValueError("yes/no scores must be finite")


def normalize_yes_no(pair: ScorePair | tuple[float, float]) -> float:
    """Two-way softmax of the yes score, written as a sigmoid of the difference."""
    p_yes, p_no = (pair.p_yes, pair.p_no) if isinstance(pair, ScorePair) else pair
    d = p_yes - p_no
    if d >= 0:
        return 1.0 / (1.0 + math.exp(-d))
    e = math.exp(d)
    return e / (1.0 + e)


@dataclass(frozen=True)
class SymbolProbability:
    symbol_id: int
    value: float
    source: str = "single"  # single | variant-mean | pruned | policy
    uncertain: bool = False
    variant_std: float | None = None
    excluded: bool = False  # drop-rule policy: rules using this symbol are skipped


@dataclass(frozen=True)
class VariantSet:
    symbol_id: int
    statements: tuple[str, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.statements) != len(self.probabilities):
            raise ValueError("one probability per variant statement")

    @property
    def mean(self) -> float:
        return statistics.fmean(self.probabilities)

    @property
    def std(self) -> float:
        return statistics.pstdev(self.probabilities)


def check_symbol(variants: VariantSet | Sequence[float], std_threshold: float = DEFAULT_STD_THRESHOLD,
                 symbol_id: int = -1) -> SymbolProbability:
    """Mean of the variant probabilities; uncertain when their population std reaches the threshold."""
    if not isinstance(variants, VariantSet):
        probs = tuple(float(p) for p in variants)
        variants = VariantSet(symbol_id, tuple(str(i) for i in range(len(probs))), probs)
    if len(variants.probabilities) < 2:
        raise ValueError("the checker needs at least two variants")
    std = variants.std
    return SymbolProbability(variants.symbol_id, variants.mean, "variant-mean", std >= std_threshold, std)


def statement_of(symbol: Symbol | str) -> tuple[str, str]:
    """(declarative statement, yes/no question) for a symbol."""
    text = symbol.text if isinstance(symbol, Symbol) else symbol
    if not text.strip():
        raise ValueError("symbol text must be non-empty")
    return statement(text), yes_no_question(text)


# -- scoring backends ------------------------------------------------------------


class ScoringBackend(Protocol):
    def probability(self, image_id: str, text: str) -> float: ...


class TableBackend:
    """Per-image table of yes/no score pairs or direct probabilities."""

    def __init__(self, table: Mapping[str, Mapping[str, ScorePair | float | Mapping]]) -> None:
        self.table: dict[str, dict[str, ScorePair | float]] = {}
        for image, entries in table.items():
            row = self.table.setdefault(str(image), {})
            for text, value in entries.items():
                row[canonicalize_symbol_text(text)] = _entry(value)
        self.calls = 0

    @classmethod
    def load(cls, path: str | Path) -> "TableBackend":
        return cls(read_json(path))

    def to_dict(self) -> dict:
        out: dict[str, dict] = {}
        for image in sorted(self.table):
            row = {}
            for text in sorted(self.table[image]):
                v = self.table[image][text]
                row[text] = {"yes": v.p_yes, "no": v.p_no} if isinstance(v, ScorePair) else {"p": v}
            out[image] = row
        return out

    def images(self) -> list[str]:
        return sorted(self.table)

    def probability(self, image_id: str, text: str) -> float:
        self.calls += 1
        try:
            value = self.table[image_id][canonicalize_symbol_text(text)]
        except KeyError:
            raise CoverageMissError(f"no score for image {image_id!r}, symbol {text!r}") from None
        return normalize_yes_no(value) if isinstance(value, ScorePair) else value


def _entry(value) -> ScorePair | float:
    if isinstance(value, (ScorePair, int, float)) and not isinstance(value, bool):
        return value if isinstance(value, ScorePair) else float(value)
    if isinstance(value, Mapping):
        if "p" in value:
            p = float(value["p"])
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"direct probability {p} outside [0, 1]")
            return p
        return ScorePair(float(value["yes"]), float(value["no"]))
    raise ValueError(f"bad score entry {value!r}")


class OracleScorer:
    """Yes/no questions through an oracle backend; probability = share of "yes" over samples.

    The image id is passed as a prefix line so a multimodal endpoint (or a
    recorded trace) can bind the question to a picture.
    """

    def __init__(self, backend: OracleBackend, samples: int = 5, temperature: float = 1.0) -> None:
        self.backend = backend
        self.samples = samples
        self.temperature = temperature
        self.calls = 0

    def probability(self, image_id: str, text: str) -> float:
        self.calls += 1
        question = text if text.rstrip().endswith("?") else yes_no_question(text)
        prompt = f"[image: {image_id}]\n" + render_yes_no(question)
        yes = 0
        for i in range(self.samples):
            raw = self.backend.complete(
                OracleRequest(PromptKind.YES_NO_STATEMENT, prompt, i, temperature=self.temperature)
            )
            yes += parse_response(PromptKind.YES_NO_STATEMENT, raw)
        # keep away from the crisp ends so the value stays a probability estimate
        return (yes + 0.5) / (self.samples + 1)


def paraphrase_variants(symbol_text: str, backend: OracleBackend, k: int = 5) -> list[str]:
    prompt = render_paraphrase(symbol_text, k)
    raw = backend.complete(OracleRequest(PromptKind.PARAPHRASE, prompt, 0))
    return parse_response(PromptKind.PARAPHRASE, raw, k)


# -- grounding -------------------------------------------------------------------


class GroundingCache:
    """(image, canonical text) -> probability; every miss is one backend call."""

    def __init__(self, backend: ScoringBackend) -> None:
        self.backend = backend
        self.values: dict[tuple[str, str], float] = {}
        self.calls = 0

    def get(self, image_id: str, text: str) -> float:
        key = (image_id, canonicalize_symbol_text(text))
        if key not in self.values:
            self.values[key] = self.backend.probability(image_id, text)
            self.calls += 1
        return self.values[key]


def _premise_symbols(system: SymbolicSystem) -> list[Symbol]:
    used = system.premise_ids()
    return [s for s in system if s.id in used]


def _apply_policy(sp: SymbolProbability, policy: Policy) -> SymbolProbability:
    if not sp.uncertain:
        return sp
    if policy is Policy.NEUTRAL:
        return SymbolProbability(sp.symbol_id, 0.5, "policy", True, sp.variant_std)
    if policy is Policy.DROP_PREMISE:
        return SymbolProbability(sp.symbol_id, 1.0, "policy", True, sp.variant_std)
    return SymbolProbability(sp.symbol_id, sp.value, sp.source, True, sp.variant_std, excluded=True)


def ground_symbols(
    image_id: str,
    system: SymbolicSystem,
    backend: ScoringBackend | GroundingCache,
    *,
    checker: bool = False,
    variants: Mapping[str, Sequence[str]] | None = None,
    std_threshold: float = DEFAULT_STD_THRESHOLD,
    policy: Policy | str = Policy.NEUTRAL,
) -> dict[int, SymbolProbability]:
    """Probability for every premise symbol of ``system`` in one image.

    Pass a shared GroundingCache to reuse scores across sub-systems.  With the
    checker on, ``variants`` maps canonical symbol text to its paraphrased
    statements; uncertain symbols are then resolved by ``policy``.
    """
    cache = backend if isinstance(backend, GroundingCache) else GroundingCache(backend)
    policy = Policy(policy)
    out: dict[int, SymbolProbability] = {}
    for sym in _premise_symbols(system):
        if checker:
            texts = (variants or {}).get(sym.text)
            if texts is None:
                raise CoverageMissError(f"no paraphrase variants for symbol {sym.text!r}")
            vs = VariantSet(sym.id, tuple(texts), tuple(cache.get(image_id, t) for t in texts))
            out[sym.id] = _apply_policy(check_symbol(vs, std_threshold), policy)
        else:
            out[sym.id] = SymbolProbability(sym.id, cache.get(image_id, sym.text))
    return out


@dataclass
class SymbolTree:
    theta: float
    fathers: list[tuple[str, list[str]]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        self.fathers = [(f, [canonicalize_symbol_text(s) for s in sons]) for f, sons in self.fathers]
        seen: set[str] = set()
        for _, sons in self.fathers:
            for s in sons:
                if s in seen:
                    raise TreeMismatchError(f"symbol {s!r} has more than one father")
                seen.add(s)
        fathers = {canonicalize_symbol_text(f) for f, _ in self.fathers}
        if fathers & seen:
            raise TreeMismatchError("a father cannot also be a son")

    @property
    def leaves(self) -> set[str]:
        return {s for _, sons in self.fathers for s in sons}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SymbolTree":
        return cls(float(doc["theta"]), [(f["text"], list(f["sons"])) for f in doc["fathers"]])

    def to_dict(self) -> dict:
        return {"theta": self.theta, "fathers": [{"text": f, "sons": sons} for f, sons in self.fathers]}

    @classmethod
    def load(cls, path: str | Path) -> "SymbolTree":
        return cls.from_dict(read_json(path))


def ground_with_pruning(
    image_id: str,
    system: SymbolicSystem,
    tree: SymbolTree,
    backend: ScoringBackend | GroundingCache,
) -> tuple[dict[int, SymbolProbability], int]:
    """Score fathers first; sons of a father below theta get theta without a call.

    Premise symbols outside the tree are scored directly.  Returns the
    probabilities and the number of backend calls made by this invocation.
    """
    cache = backend if isinstance(backend, GroundingCache) else GroundingCache(backend)
    start = cache.calls
    premises = {s.text: s for s in _premise_symbols(system)}
    stray = tree.leaves - set(premises)
    if stray:
        raise TreeMismatchError(f"tree leaves not among the premise symbols: {sorted(stray)}")
    out: dict[int, SymbolProbability] = {}
    for father, sons in tree.fathers:
        p = cache.get(image_id, father)
        for son in sons:
            sym = premises[son]
            if p < tree.theta:
                out[sym.id] = SymbolProbability(sym.id, tree.theta, "pruned")
            else:
                out[sym.id] = SymbolProbability(sym.id, cache.get(image_id, son))
    for text, sym in premises.items():
        if sym.id not in out:
            out[sym.id] = SymbolProbability(sym.id, cache.get(image_id, text))
    return out, cache.calls - start


# -- grounding file --------------------------------------------------------------


def grounding_row(system: SymbolicSystem, probs: Mapping[int, SymbolProbability]) -> dict[str, float | None]:
    return {
        system.text(sid): (None if sp.excluded else sp.value)
        for sid, sp in sorted(probs.items(), key=lambda kv: system.text(kv[0]))
    }


def save_grounding(path: str | Path, rows: Mapping[str, Mapping[str, float | None]]) -> None:
    write_json(path, {img: dict(sorted(rows[img].items())) for img in sorted(rows)})


def load_grounding(path: str | Path) -> dict[str, dict[str, float | None]]:
    doc = read_json(path)
    return {
        str(img): {canonicalize_symbol_text(t): (None if v is None else float(v)) for t, v in row.items()}
        for img, row in doc.items()
    }


def load_variants(path: str | Path) -> dict[str, list[str]]:
    return {canonicalize_symbol_text(k): list(v) for k, v in read_json(path).items()}
