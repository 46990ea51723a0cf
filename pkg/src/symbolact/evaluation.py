"""Metrics and analyses: mAP, top-1, coverage, confusion pairs, the bottleneck grid, operation counts."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, fsum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import KeyMismatchError, MissingScoreTableError
from .files import read_json, write_json
from .graph import SymbolicSystem, canonicalize_symbol_text, decompose, merge_subsystems
from .grounding import GroundingCache, ScoringBackend, SymbolTree, TableBackend, ground_with_pruning
from .inference import evaluate_conclusion


@dataclass(frozen=True)
class DatasetRecord:
    image_id: str
    gt_activities: frozenset[str]
    gt_symbols: frozenset[str]
    score_table: Mapping | None = None

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DatasetRecord":
        return cls(
            str(doc["image_id"]),
            frozenset(canonicalize_symbol_text(a) for a in doc.get("gt_activities", [])),
            frozenset(canonicalize_symbol_text(s) for s in doc.get("gt_symbols", [])),
            doc.get("score_table"),
        )

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "gt_activities": sorted(self.gt_activities),
            "gt_symbols": sorted(self.gt_symbols),
            "score_table": self.score_table,
        }


def load_dataset(path: str | Path) -> list[DatasetRecord]:
    return [DatasetRecord.from_dict(d) for d in read_json(path)]


def save_dataset(path: str | Path, records: Iterable[DatasetRecord]) -> None:
    write_json(path, [r.to_dict() for r in records])


# -- metrics ---------------------------------------------------------------------


def average_precision(scores: Sequence[float], labels: Sequence[int | bool]) -> float | None:
    """Mean precision at each positive's rank; ties keep input order.  None without positives."""
    if len(scores) != len(labels):
        raise ValueError("scores and labels differ in length")
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    hits = 0
    terms = []
    for rank, i in enumerate(order, 1):
        if labels[i]:
            hits += 1
            terms.append(hits / rank)
    return fsum(terms) / hits if hits else None


@dataclass
class MetricReport:
    per_class: dict[str, float] = field(default_factory=dict)
    mAP: float | None = None
    top1: float | None = None
    excluded_classes: list[str] = field(default_factory=list)
    samples: int = 0

    def to_dict(self) -> dict:
        pct = lambda v: None if v is None else round(100 * v, 2)  # noqa: E731
        return {
            "mAP": pct(self.mAP),
            "top1": pct(self.top1),
            "per_class_ap": {k: pct(v) for k, v in sorted(self.per_class.items())},
            "excluded_classes": sorted(self.excluded_classes),
            "samples": self.samples,
        }


def mean_average_precision(scores: Mapping[str, Sequence[float]], labels: Mapping[str, Sequence[int]]) -> MetricReport:
    if set(scores) != set(labels):
        raise KeyMismatchError("score and label classes differ")
    report = MetricReport()
    for cls in sorted(scores):
        ap = average_precision(scores[cls], labels[cls])
        report.samples = max(report.samples, len(scores[cls]))
        if ap is None:
            report.excluded_classes.append(cls)
        else:
            report.per_class[cls] = ap
    if report.per_class:
        report.mAP = sum(report.per_class.values()) / len(report.per_class)
    return report


def map_from_predictions(preds: Mapping[str, Mapping[str, float]], dataset: Sequence[DatasetRecord],
                         classes: Iterable[str] | None = None) -> MetricReport:
    """mAP of a prediction file against dataset labels; missing scores count as 0."""
    records = {r.image_id: r for r in dataset}
    missing = set(records) - set(preds)
    if missing:
        raise KeyMismatchError(f"no predictions for images {sorted(missing)}")
    if classes is None:
        classes = {c for row in preds.values() for c in row} | {a for r in dataset for a in r.gt_activities}
    classes = sorted(canonicalize_symbol_text(c) for c in classes)
    images = sorted(records)
    rows = {img: {canonicalize_symbol_text(k): v for k, v in preds[img].items()} for img in images}
    scores = {c: [rows[img].get(c, 0.0) for img in images] for c in classes}
    labels = {c: [int(c in records[img].gt_activities) for img in images] for c in classes}
    return mean_average_precision(scores, labels)


def top1_accuracy(predictions: Mapping[str, str], truth: Mapping[str, str]) -> float:
    if set(predictions) != set(truth):
        raise KeyMismatchError(f"question sets differ: {sorted(set(predictions) ^ set(truth))}")
    if not truth:
        raise ValueError("no questions")
    return sum(predictions[q] == truth[q] for q in truth) / len(truth)


# -- symbolic-system analyses ----------------------------------------------------


def _vocab(system: SymbolicSystem, activity: str, memo: dict[str, frozenset[str]]) -> frozenset[str]:
    if activity not in memo:
        cid = system.symbol_id(activity)
        if cid is None or not system.symbols[cid].is_conclusion:
            memo[activity] = frozenset()
        else:
            sub = decompose(system, cid)
            memo[activity] = frozenset(s.text for s in sub.premise_symbols())
    return memo[activity]


def happening_items(dataset: Sequence[DatasetRecord], system: SymbolicSystem) -> list[tuple[str, str, frozenset[str]]]:
    """(image, activity, gt symbols inside that activity's sub-system) per positive pair."""
    memo: dict[str, frozenset[str]] = {}
    items = []
    for rec in dataset:
        for act in sorted(rec.gt_activities):
            items.append((rec.image_id, act, rec.gt_symbols & _vocab(system, act, memo)))
    return items


@dataclass
class CoverageReport:
    counts: list[tuple[str, str, int]]
    mean: float

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "pairs": [{"image_id": i, "activity": a, "count": c} for i, a, c in self.counts],
        }


def coverage_stats(dataset: Sequence[DatasetRecord], system: SymbolicSystem) -> CoverageReport:
    counts = [(img, act, len(h)) for img, act, h in happening_items(dataset, system)]
    mean = sum(c for *_, c in counts) / len(counts) if counts else 0.0
    return CoverageReport(counts, mean)


@dataclass
class ConfusionReport:
    count: int
    denominator: int
    pairs: list[tuple[tuple[str, str], tuple[str, str]]]

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "denominator": self.denominator,
            "share": self.count / self.denominator if self.denominator else 0.0,
            "pairs": [[list(a), list(b)] for a, b in self.pairs],
        }


def confusion_pairs(dataset: Sequence[DatasetRecord], system: SymbolicSystem) -> ConfusionReport:
    """Unordered pairs of items with different activities but identical happening-symbol sets."""
    items = happening_items(dataset, system)
    groups: dict[frozenset[str], list[int]] = {}
    for idx, (_, _, h) in enumerate(items):
        groups.setdefault(h, []).append(idx)
    pairs = []
    for members in groups.values():
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                a, b = items[members[x]], items[members[y]]
                if a[1] != b[1]:
                    pairs.append(((a[0], a[1]), (b[0], b[1])))
    pairs.sort()
    return ConfusionReport(len(pairs), comb(len(items), 2), pairs)


# -- bottleneck grid -------------------------------------------------------------


@dataclass
class BottleneckGrid:
    """mAP (x100) keyed by (symbol prediction, symbolic system), each perfect or imperfect."""

    cells: dict[tuple[str, str], float]

    def __getitem__(self, key: tuple[str, str]) -> float:
        return self.cells[key]

    def to_dict(self) -> dict:
        return {f"{s}-symbols/{y}-system": v for (s, y), v in sorted(self.cells.items())}


def complete_system(system: SymbolicSystem, dataset: Sequence[DatasetRecord]) -> SymbolicSystem:
    """Copy of ``system`` plus one rule per positive pair whose premises are the image's gt symbols."""
    out = merge_subsystems([system])
    for rec in dataset:
        for act in sorted(rec.gt_activities):
            premises = sorted(rec.gt_symbols - {act})
            if not premises:
                continue
            cid = out.upsert_symbol(act, is_conclusion=True)
            if out.find_rule(premises, act) is None:
                out.insert_rule([out.upsert_symbol(t) for t in premises], cid, None)
    return out


def _symbol_probs(system: SymbolicSystem, rec: DatasetRecord, perfect: bool) -> dict[int, float]:
    ids = system.premise_ids()
    if perfect:
        return {i: float(system.text(i) in rec.gt_symbols) for i in ids}
    if rec.score_table is None:
        raise MissingScoreTableError(f"image {rec.image_id!r} has no score table")
    table = TableBackend({rec.image_id: rec.score_table})
    return {i: table.probability(rec.image_id, system.text(i)) for i in ids}


def _system_map(system: SymbolicSystem, dataset: Sequence[DatasetRecord], classes: list[str], perfect_symbols: bool) -> float:
    subs = {}
    for c in classes:
        cid = system.symbol_id(c)
        subs[c] = decompose(system, cid) if cid is not None and system.symbols[cid].is_conclusion else None
    scores: dict[str, list[float]] = {c: [] for c in classes}
    labels: dict[str, list[int]] = {c: [] for c in classes}
    for rec in dataset:
        probs = _symbol_probs(system, rec, perfect_symbols)
        for c in classes:
            sub = subs[c]
            scores[c].append(0.0 if sub is None else evaluate_conclusion(sub, probs).p_c)
            labels[c].append(int(c in rec.gt_activities))
    report = mean_average_precision(scores, labels)
    return round(100 * (report.mAP or 0.0), 2)


def bottleneck_grid(dataset: Sequence[DatasetRecord], system: SymbolicSystem,
                    classes: Iterable[str] | None = None) -> BottleneckGrid:
    classes = sorted(set(classes) if classes is not None else {a for r in dataset for a in r.gt_activities})
    completed = complete_system(system, dataset)
    cells = {}
    for sym_label, perfect_symbols in (("perfect", True), ("imperfect", False)):
        for sys_label, sys_ in (("perfect", completed), ("imperfect", system)):
            cells[(sym_label, sys_label)] = _system_map(sys_, dataset, classes, perfect_symbols)
    return BottleneckGrid(cells)


# -- operation counts ------------------------------------------------------------


@dataclass
class OperationCount:
    naive: int
    reuse: int
    hierarchical: float | None = None
    per_image: dict[str, int] = field(default_factory=dict)
    direct: float | None = None  # pass-through baseline when supplied

    def to_dict(self) -> dict:
        return {
            "naive": self.naive,
            "reuse": self.reuse,
            "hierarchical": self.hierarchical,
            "per_image": dict(sorted(self.per_image.items())),
            "direct": self.direct,
        }


def activity_union(system: SymbolicSystem, activities: Iterable[str]) -> SymbolicSystem:
    subs = []
    for act in activities:
        cid = system.symbol_id(act)
        if cid is None:
            raise KeyError(f"activity {act!r} not in system")
        subs.append(decompose(system, cid))
    return merge_subsystems(subs)


def operation_count(
    system: SymbolicSystem,
    activities: Sequence[str],
    *,
    tree: SymbolTree | None = None,
    backend: ScoringBackend | None = None,
    images: Sequence[str] = (),
    direct: float | None = None,
) -> OperationCount:
    """Symbol measurements needed to score ``activities`` on one image.

    naive: every sub-system measures its own premises; reuse: each distinct
    symbol once; hierarchical: mean realized calls per image under pruning.
    """
    naive = 0
    for act in activities:
        cid = system.symbol_id(act)
        if cid is None:
            raise KeyError(f"activity {act!r} not in system")
        naive += len(decompose(system, cid).premise_symbols())
    union = activity_union(system, activities)
    reuse = len(union.premise_ids())
    result = OperationCount(naive, reuse, direct=direct)
    if tree is not None:
        if backend is None or not images:
            raise ValueError("hierarchical counting needs a scoring backend and images")
        for img in images:
            _, calls = ground_with_pruning(img, union, tree, GroundingCache(backend))
            result.per_image[img] = calls
        result.hierarchical = sum(result.per_image.values()) / len(result.per_image)
    return result


def render_table(report: Mapping) -> str:
    """Two-column text rendering of a flat report."""
    rows = [(str(k), v) for k, v in report.items() if not isinstance(v, (list, dict))]
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
