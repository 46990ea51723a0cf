"""Fuzzy-logic scoring of conclusions (min over premises, max over rules) and score fusion."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import KeyMismatchError, MissingProbabilityError, UnresolvableActivityError
from .files import read_json, write_json
from .graph import SymbolicSystem, canonicalize_symbol_text, decompose
from .grounding import SymbolProbability

ProbabilityLike = float | SymbolProbability | None


@dataclass(frozen=True)
class RuleMin:
    rule_id: int
    value: float
    argmin_symbol_id: int


@dataclass(frozen=True)
class ConclusionScore:
    conclusion_id: int
    p_c: float
    winning_rule_id: int | None
    trace: tuple[RuleMin, ...] = ()
    excluded_rules: tuple[int, ...] = ()

    def explain(self, system: SymbolicSystem) -> dict:
        return {
            "p_c": self.p_c,
            "winning_rule": self.winning_rule_id,
            "rules": [
                {"rule": m.rule_id, "min": m.value, "argmin": system.text(m.argmin_symbol_id)} for m in self.trace
            ],
            "excluded_rules": list(self.excluded_rules),
        }


def _value(p: ProbabilityLike) -> float | None:
    if isinstance(p, SymbolProbability):
        return None if p.excluded else p.value
    return p


def evaluate_conclusion(system: SymbolicSystem, probabilities: Mapping[int, ProbabilityLike],
                        conclusion_id: int | None = None) -> ConclusionScore:
    """p_c = max over rules of the min premise probability.

    A probability of None (or an excluded SymbolProbability) drops every rule
    using that symbol.  Ties between rules go to the lowest rule id; with no
    usable rule the score is 0.
    """
    if conclusion_id is None:
        conclusion_id = getattr(system, "conclusion_id", None)
        if conclusion_id is None:
            raise ValueError("conclusion_id is required for a whole system")
    trace: list[RuleMin] = []
    excluded: list[int] = []
    for rule in system.rules_for(conclusion_id):
        best: tuple[float, int] | None = None
        skip = False
        for pid in rule.trace or sorted(rule.premise_ids):
            if pid not in probabilities:
                raise MissingProbabilityError(
                    f"no probability for symbol {system.text(pid)!r} (rule {rule.id})"
                )
            v = _value(probabilities[pid])
            if v is None:
                skip = True
                break
            if best is None or v < best[0]:
                best = (v, pid)
        if skip or best is None:
            excluded.append(rule.id)
            continue
        trace.append(RuleMin(rule.id, best[0], best[1]))
    if not trace:
        return ConclusionScore(conclusion_id, 0.0, None, (), tuple(excluded))
    winner = trace[0]
    for m in trace[1:]:
        if m.value > winner.value:
            winner = m
    return ConclusionScore(conclusion_id, winner.value, winner.rule_id, tuple(trace), tuple(excluded))


@dataclass(frozen=True)
class Activity:
    text: str
    object: str | None = None

    @classmethod
    def parse(cls, item: str | Mapping) -> "Activity":
        if isinstance(item, str):
            return cls(item)
        return cls(item["activity"], item.get("object"))


def load_activities(path: str | Path) -> list[Activity]:
    return [Activity.parse(x) for x in read_json(path)]


def evaluate_activity_set(
    system: SymbolicSystem,
    grounding: Mapping[str, float | None] | Mapping[int, ProbabilityLike],
    activities: Sequence[str | Activity],
    *,
    known_objects: Iterable[str] | None = None,
) -> tuple[dict[str, float], dict[str, ConclusionScore | None]]:
    """Score each activity on its own decomposed sub-system for one image.

    ``grounding`` maps symbol text (or id) to probability.  With
    ``known_objects`` given, an activity whose object is not among them is
    masked to 0 before evaluation.
    """
    by_id = _by_id(system, grounding)
    objects = None if known_objects is None else {canonicalize_symbol_text(o) for o in known_objects}
    scores: dict[str, float] = {}
    explanations: dict[str, ConclusionScore | None] = {}
    for item in activities:
        act = item if isinstance(item, Activity) else Activity(item)
        name = canonicalize_symbol_text(act.text)
        cid = system.symbol_id(name)
        if cid is None or not system.symbols[cid].is_conclusion:
            raise UnresolvableActivityError(f"activity {act.text!r} is not a conclusion of the system")
        if objects is not None and act.object is not None and canonicalize_symbol_text(act.object) not in objects:
            scores[name] = 0.0
            explanations[name] = None
            continue
        res = evaluate_conclusion(decompose(system, cid), by_id)
        scores[name] = res.p_c
        explanations[name] = res
    return scores, explanations


def _by_id(system: SymbolicSystem, grounding: Mapping) -> dict[int, ProbabilityLike]:
    out: dict[int, ProbabilityLike] = {}
    for key, value in grounding.items():
        if isinstance(key, int):
            out[key] = value
            continue
        sid = system.symbol_id(key)
        if sid is not None:
            out[sid] = value
    return out


def infer_images(
    system: SymbolicSystem,
    grounding: Mapping[str, Mapping[str, float | None]],
    activities: Sequence[str | Activity],
    objects: Mapping[str, Iterable[str]] | None = None,
) -> tuple[dict[str, dict[str, float]], dict[str, dict]]:
    """Predictions and explanations for every image of a grounding file."""
    preds: dict[str, dict[str, float]] = {}
    explain: dict[str, dict] = {}
    for image in sorted(grounding):
        known = None if objects is None else objects.get(image, ())
        scores, expl = evaluate_activity_set(system, grounding[image], activities, known_objects=known)
        preds[image] = scores
        explain[image] = {a: (None if e is None else e.explain(system)) for a, e in expl.items()}
    return preds, explain


# -- fusion ----------------------------------------------------------------------


@dataclass(frozen=True)
class FusionConfig:
    policy: str = "maxnorm"  # maxnorm | fixed
    alpha1: float = 1.0
    alpha2: float = 1.0

    def __post_init__(self) -> None:
        if self.policy not in ("maxnorm", "fixed"):
            raise ValueError(f"unknown fusion policy {self.policy!r}")
        if self.policy == "fixed":
            if self.alpha1 < 0 or self.alpha2 < 0:
                raise ValueError("fixed weights must be non-negative")
            if self.alpha1 == 0 and self.alpha2 == 0:
                raise ValueError("fixed weights cannot both be zero")


def _maxnorm(vector: Mapping[str, float]) -> float:
    top = max(vector.values(), default=0.0)
    return 1.0 / top if top > 0 else 0.0


def fuse_predictions(sys1: Mapping[str, float], sys2: Mapping[str, float],
                     config: FusionConfig = FusionConfig()) -> dict[str, float]:
    """alpha1 * sys1 + alpha2 * sys2 for one image."""
    if set(sys1) != set(sys2):
        raise KeyMismatchError(
            f"score vectors differ in keys: {sorted(set(sys1) ^ set(sys2))}"
        )
    if config.policy == "maxnorm":
        a1, a2 = _maxnorm(sys1), _maxnorm(sys2)
    else:
        a1, a2 = config.alpha1, config.alpha2
    return {k: a1 * sys1[k] + a2 * sys2[k] for k in sys1}


def fuse_files(sys1: Mapping[str, Mapping[str, float]], sys2: Mapping[str, Mapping[str, float]],
               config: FusionConfig = FusionConfig()) -> dict[str, dict[str, float]]:
    if set(sys1) != set(sys2):
        raise KeyMismatchError(f"prediction files cover different images: {sorted(set(sys1) ^ set(sys2))}")
    return {img: fuse_predictions(sys1[img], sys2[img], config) for img in sorted(sys1)}


def save_predictions(path: str | Path, preds: Mapping[str, Mapping[str, float]]) -> None:
    write_json(path, {img: dict(sorted(preds[img].items())) for img in sorted(preds)})


def load_predictions(path: str | Path) -> dict[str, dict[str, float]]:
    return {str(img): {str(k): float(v) for k, v in row.items()} for img, row in read_json(path).items()}
