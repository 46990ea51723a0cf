"""Author the scripted oracle trace for "board an airplane".

The trace is described as a plan of candidate paths (seed symbol followed by
the premises its extensions produce) with the entailment letters given to
each prefix.  A planner backend answers the loop from that plan while a
replay cache records every exchange; the recording is the shipped trace.

    python3 scripts/author_airplane_trace.py [--out PATH]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from symbolact.files import dump_system
from symbolact.instantiate import LoopConfig, instantiate_subsystem
from symbolact.oracle import OracleRequest, PromptKind, ReplayBackend, ReplayCache, prompt_digest
from symbolact.oracle.prompts import conclusion_prompts, render_entailment, render_rule_extension, render_symbol_init

CONCLUSION = "board an airplane"
OBJECT = "airplane"
DATA = Path(__file__).resolve().parents[1] / "src" / "symbolact" / "data"

INIT_ANSWER = (
    "1. Hands holding a boarding pass. 2. Hands placing luggage in overhead compartment. "
    "3. Hands adjusting seatbelt. 4. Hands waving goodbye to loved ones. 5. Hands gripping a luggage handle."
)

# symbol number -> (canonical text, how the oracle phrases it as a condition)
SYMBOLS = {
    1: ("hold a boarding pass", "The person is holding a boarding pass"),
    2: ("place luggage in overhead compartment", "The person is placing luggage in overhead compartment"),
    3: ("adjust seatbelt", "The person is adjusting seatbelt"),
    4: ("wave goodbye to loved ones", "The person is waving goodbye to loved ones"),
    5: ("grip a luggage handle", "The person is gripping a luggage handle"),
    6: ("walk towards the boarding gate", "The person is walking towards the boarding gate"),
    7: ("luggage visible beside him", "luggage visible beside him"),
    8: ("boarding pass is scanned by airport staff", "Boarding pass is scanned by airport staff"),
    9: ("stand on the jet bridge", "The person is standing on the jet bridge"),
    10: ("luggage is loaded onto the plane", "Luggage is loaded onto the plane"),
    11: ("reach for the airplane door handle", "The person is reaching for the airplane door handle"),
    12: ("stand in line with carry-on luggage", "The person is standing in line with carry-on luggage"),
    13: ("hold the carry-on luggage", "The person is holding the carry-on luggage"),
    14: ("open the airplane door", "The person is opening the airplane door"),
    15: ("move forward in the line", "The person is moving forward in the line"),
    16: ("move towards the airplane door", "The person is moving towards the airplane door"),
    17: ("airline staff checking the boarding pass", "Airline staff checking the boarding pass"),
    # premises of abandoned candidates; they never enter the system
    101: ("look at the departure board", "The person is looking at the departure board"),
    102: ("sit in a waiting area chair", "The person is sitting in a waiting area chair"),
    103: ("hug a family member", "The person is hugging a family member"),
    104: ("wipe tears from the eyes", "The person is wiping tears from the eyes"),
    105: ("pull a rolling suitcase", "The person is pulling a rolling suitcase"),
    106: ("check a wristwatch", "The person is checking a wristwatch"),
    107: ("carry a backpack on the shoulders", "The person is carrying a backpack on the shoulders"),
    108: ("put on a jacket", "The person is putting on a jacket"),
    109: ("drink from a water bottle", "The person is drinking from a water bottle"),
    110: ("read a travel magazine", "The person is reading a travel magazine"),
    111: ("push a luggage cart", "The person is pushing a luggage cart"),
    112: ("tie a shoelace", "The person is tying a shoelace"),
    113: ("glance at a phone screen", "The person is glancing at a phone screen"),
    114: ("stretch the arms", "The person is stretching the arms"),
    115: ("sign a customs form", "The person is signing a customs form"),
    116: ("hold a passport", "The person is holding a passport"),
    117: ("point at a gate sign", "The person is pointing at a gate sign"),
    118: ("wear a face mask", "The person is wearing a face mask"),
    119: ("lean against a pillar", "The person is leaning against a pillar"),
    120: ("scan a barcode", "The person is scanning a barcode"),
    121: ("lift a child", "The person is lifting a child"),
    122: ("queue at a coffee stand", "The person is queueing at a coffee stand"),
    123: ("fold a newspaper", "The person is folding a newspaper"),
}

DROP = ("bbbbb", "abbbb", "aabbb")  # 0.5, 0.42, 0.34
CAP = ("aaaaa", "aaaab", "aaabb", "aabbb", "abbbb", "bbbbb")  # rising but never 0.9

# (path of symbol numbers, letters per prefix); listed per seed in branch order
PLAN: list[tuple[tuple[int, ...], tuple[str, ...]]] = [
    # round 2
    ((1, 6, 7, 8), ("aaaae", "ddddc", "dddce", "eeedd")),  # 0.27, 0.86, 0.87, 0.93
    ((1, 9), ("aaaae", "ddddd")),
    ((2, 3), ("bbbbb", "ddddd")),
    ((2, 10), ("bbbbb", "dddde")),
    ((3, 2), ("bbbbb", "ddddd")),  # duplicate of {2, 3}
    ((3, 7), ("bbbbb", "ddddd")),
    ((4, 10, 6), ("bbbbb", "bbbbc", "ddddd")),
    ((4, 101, 102), DROP),
    ((5, 8), ("bbbbb", "ddddd")),
    ((5, 103, 104), DROP),
    # round 3
    ((6, 1, 7, 8), ("bbbbb", "bbbbc", "bcccc", "ddddd")),  # duplicate of R1
    ((6, 11), ("bbbbb", "ddddd")),
    ((7, 12, 13), ("aaaaa", "ccccc", "dddde")),
    ((7, 105, 106, 107, 108, 109), CAP),
    ((8, 1, 6, 7), ("bbbbb", "bbbbc", "bcccc", "ddddd")),  # duplicate of R1
    ((8, 5), ("bbbbb", "ddddd")),  # duplicate of {5, 8}
    ((9, 1), ("bbbbb", "ddddd")),  # duplicate of {1, 9}
    ((9, 110, 111), DROP),
    ((10, 112, 113), DROP),
    ((10, 114, 115), DROP),
    # round 4
    ((11, 14), ("bbbbb", "ddddd")),
    ((11, 6), ("bbbbb", "ddddd")),  # duplicate of {6, 11}
    ((12, 15, 16), ("bbbbb", "bbbbc", "ddddd")),
    ((12, 7, 13), ("bbbbb", "bbbbc", "ddddd")),  # duplicate of {7, 12, 13}
    ((13, 7, 12), ("bbbbb", "bbbbc", "ddddd")),  # duplicate of {7, 12, 13}
    ((13, 116, 117), DROP),
    # round 5
    ((14, 118, 119), DROP),
    ((14, 120, 121), DROP),
    ((15, 17), ("bbbbb", "ddddd")),
    ((15, 12, 16), ("bbbbb", "bbbbc", "ddddd")),  # duplicate of {12, 15, 16}
]
# unused so far; kept for extending the plan
_SPARE = (122, 123)


class PlanConflict(RuntimeError):
    pass


class Planner:
    """Answers loop requests from PLAN by recognising the rendered prompts."""

    def __init__(self) -> None:
        self.activity, _ = conclusion_prompts(CONCLUSION, OBJECT)
        self.init_digest = prompt_digest(render_symbol_init(self.activity, OBJECT))
        self.extensions: dict[str, list[int]] = {}
        self.entailments: dict[str, str] = {}
        for path, letters in PLAN:
            if len(letters) != len(path):
                raise PlanConflict(f"path {path} needs {len(path)} letter groups")
            texts = [SYMBOLS[n][0] for n in path]
            for k in range(1, len(path) + 1):
                digest = prompt_digest(render_entailment(texts[:k], self.activity, OBJECT))
                old = self.entailments.setdefault(digest, letters[k - 1])
                if old != letters[k - 1]:
                    raise PlanConflict(f"prefix {path[:k]} scored both {old} and {letters[k - 1]}")
                if k < len(path):
                    digest = prompt_digest(render_rule_extension(texts[:k], self.activity, OBJECT))
                    nexts = self.extensions.setdefault(digest, [])
                    if path[k] not in nexts:
                        nexts.append(path[k])

    def complete(self, request: OracleRequest) -> str:
        digest = request.digest
        if request.kind is PromptKind.SYMBOL_INIT and digest == self.init_digest:
            return INIT_ANSWER
        if request.kind is PromptKind.ENTAILMENT_CHECK and digest in self.entailments:
            return self.entailments[digest][request.sample_index]
        if request.kind is PromptKind.RULE_EXTENSION and digest in self.extensions:
            options = self.extensions[digest]
            if request.sample_index >= len(options):
                raise PlanConflict(f"extension asked more often than planned: {request.rendered_prompt!r}")
            return f"[condition] is: [{SYMBOLS[options[request.sample_index]][1]}]."
        raise PlanConflict(f"unplanned request {request.kind.value}: {request.rendered_prompt!r}")


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=DATA / "airplane_trace.jsonl")
    args = ap.parse_args(argv)

    tmp = args.out.with_suffix(".tmp")
    tmp.unlink(missing_ok=True)
    backend = ReplayBackend(ReplayCache(tmp), fallback=Planner())
    result = instantiate_subsystem(CONCLUSION, backend, LoopConfig(), object_hint=OBJECT)
    if result.partial:
        tmp.unlink()
        raise SystemExit(f"trace incomplete: {result.error}")

    texts = {s.text for s in result.subsystem.premise_symbols()}
    expected = {SYMBOLS[n][0] for n in range(1, 18)}
    problems = []
    if texts != expected:
        problems.append(f"symbols differ: missing {expected - texts}, extra {texts - expected}")
    if len(result.subsystem.rules) != 12:
        problems.append(f"{len(result.subsystem.rules)} rules")
    if result.new_symbol_counts() != [5, 5, 3, 3, 1]:
        problems.append(f"per-round new symbols {result.new_symbol_counts()}")
    if problems:
        tmp.unlink()
        raise SystemExit("plan does not reproduce the target: " + "; ".join(problems))

    tmp.replace(args.out)
    (DATA / "airplane_activities.json").write_text(
        json.dumps([{"activity": CONCLUSION, "object": OBJECT}], indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {args.out} ({len(backend.cache)} exchanges, {result.ledger.total} queries)")
    print(dump_system(result.subsystem), end="", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
