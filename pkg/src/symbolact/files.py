"""JSON file formats shared by the CLI: byte-stable writers and the system file."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .graph import Rule, Symbol, SymbolicSystem

SYSTEM_FILE_VERSION = 1


def dumps(obj: Any) -> str:
    """Deterministic JSON text (two-space indent, trailing newline)."""
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def system_to_dict(system: SymbolicSystem) -> dict:
    symbols = [
        {"id": s.id, "text": s.text, "raw_text": s.raw_text, "is_conclusion": s.is_conclusion}
        for s in sorted(system.symbols.values(), key=lambda s: s.id)
    ]
    rules = []
    for r in sorted(system.rules.values(), key=lambda r: r.id):
        entry: dict[str, Any] = {
            "id": r.id,
            "premises": sorted(r.premise_ids),
            "conclusion": r.conclusion_id,
            "entailment_score": r.entailment_score,
            "round": r.round_index,
            "trace": list(r.trace),
        }
        if r.flagged_unknown:
            entry["flagged_unknown"] = True
        if r.merged_scores:
            entry["merged_scores"] = list(r.merged_scores)
        rules.append(entry)
    return {"version": SYSTEM_FILE_VERSION, "symbols": symbols, "rules": rules}


def system_from_dict(doc: dict) -> SymbolicSystem:
    """Rebuild a system; HAKE-style imports may omit scores, rounds and traces."""
    if doc.get("version", SYSTEM_FILE_VERSION) != SYSTEM_FILE_VERSION:
        raise ValueError(f"unsupported system file version {doc.get('version')!r}")
    symbols = [
        Symbol(int(s["id"]), s["text"], s.get("raw_text", s["text"]), bool(s.get("is_conclusion", False)))
        for s in doc.get("symbols", [])
    ]
    rules = []
    for r in doc.get("rules", []):
        premises = [int(i) for i in r["premises"]]
        trace = tuple(int(i) for i in r.get("trace") or premises)
        score = r.get("entailment_score")
        rules.append(
            Rule(
                id=int(r["id"]),
                premise_ids=frozenset(premises),
                conclusion_id=int(r["conclusion"]),
                entailment_score=None if score is None else float(score),
                round_index=int(r.get("round", 1)),
                trace=trace,
                flagged_unknown=bool(r.get("flagged_unknown", False)),
                merged_scores=tuple(r.get("merged_scores", ())),
            )
        )
    return SymbolicSystem.from_parts(symbols, rules)


def dump_system(system: SymbolicSystem) -> str:
    return dumps(system_to_dict(system))


def save_system(path: str | Path, system: SymbolicSystem) -> None:
    Path(path).write_text(dump_system(system), encoding="utf-8")


def load_system(path: str | Path) -> SymbolicSystem:
    return system_from_dict(read_json(path))
