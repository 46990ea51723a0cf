"""Build the orange-verb fixture used by the operation-count tests.

Nine verbs over one object, 31 distinct premise symbols grouped under ten
father symbols, and 38 images whose probability tables respect son <= father.
Per image the sub-systems hold 71 premise symbols in total; the images are
drawn so that hierarchical grounding averages exactly 23 calls.

    python3 scripts/build_orange_fixture.py [--out PATH] [--seed N]
"""

from __future__ import annotations

import argparse
import itertools
import random
from pathlib import Path

from symbolact.files import system_to_dict, write_json
from symbolact.graph import SymbolicSystem, add_rule

OUT = Path(__file__).resolve().parents[1] / "src" / "symbolact" / "data" / "orange_scenario.json"
THETA = 0.1
IMAGES = 38
TARGET_OPEN_SONS = IMAGES * 23 - IMAGES * 10  # ten fathers are always measured

M = {
    1: "talk with seller",
    2: "reach for an orange",
    3: "seller hand over orange",
    4: "stand in front of fruit stand",
    5: "place orange in a bag",
    6: "pick orange from a basket",
    7: "hold a bag of oranges",
    8: "reach for a wallet",
    9: "seller put the orange in bag",
    10: "give money to seller",
}
N = {
    1: "hold a knife",
    2: "place orange on cutting board",
    3: "slice orange into halves",
    4: "press knife into the peel",
    5: "bring orange slice to mouth",
    6: "bite into the orange",
    7: "chew the orange",
    8: "hold an orange slice",
    9: "dig thumb into the peel",
    10: "pull off the orange peel",
    11: "drop peel onto a plate",
    12: "squeeze orange over a glass",
    13: "press orange on a juicer",
    14: "juice drips into a cup",
    15: "hold orange under running water",
    16: "rub orange with both hands",
    17: "water splashes from the sink",
    18: "hold orange close to the eyes",
    19: "turn orange around in the hand",
    20: "look at orange closely",
    21: "smell the orange",
}

FATHERS = [
    ("interact with a seller", [M[1], M[3], M[10]]),
    ("interact with the oranges", [M[2]]),
    ("interact with a container", [M[5], M[6], M[7], M[9]]),
    ("payment process", [M[4], M[8]]),
    ("use a knife", [N[1], N[2], N[3], N[4]]),
    ("eat the fruit", [N[5], N[6], N[7], N[8]]),
    ("remove the peel", [N[9], N[10], N[11]]),
    ("extract juice", [N[12], N[13], N[14]]),
    ("clean the orange", [N[15], N[16], N[17]]),
    ("examine the orange", [N[18], N[19], N[20], N[21]]),
]

# verb -> rules (premise lists); every verb's premises are distinct symbols
VERBS = {
    "buy an orange": [[M[1], M[3], M[10]], [M[2], M[5], M[7]], [M[4], M[8], M[10]], [M[6], M[9]]],
    "cut an orange": [[N[1], N[2], N[3]], [N[4], M[2], N[19]], [N[8], N[1]]],
    "eat an orange": [[N[5], N[6], N[7]], [N[8], N[3], N[10]], [M[2], N[18], N[6]]],
    "hold an orange": [[M[2], M[7]], [N[19], N[8]], [M[6], N[16]]],
    "inspect an orange": [[N[18], N[19], N[20]], [N[21], M[2]], [M[6], M[4], N[20]]],
    "peel an orange": [[N[9], N[10], N[11]], [N[4], N[1], M[2]], [N[19], N[8], N[10]]],
    "pick an orange": [[M[6], M[2], M[5]], [M[7], M[9], M[4]], [N[19], N[20]]],
    "squeeze an orange": [[N[12], N[13], N[14]], [N[3], N[1], N[2]], [M[2], N[16], N[12]]],
    "wash an orange": [[N[15], N[16], N[17]], [M[2], M[6], N[19]], [N[2], N[20], N[18]]],
}


def build_system() -> SymbolicSystem:
    system = SymbolicSystem()
    for verb, rules in VERBS.items():
        for premises in rules:
            add_rule(system, premises, verb)
    return system


def draw_open_sets(rng: random.Random) -> list[tuple[int, ...]]:
    """Indices of fathers at or above theta per image, summing to TARGET_OPEN_SONS sons."""
    sizes = [len(sons) for _, sons in FATHERS]
    subsets = [
        s for r in range(len(FATHERS) + 1) for s in itertools.combinations(range(len(FATHERS)), r)
        if sum(sizes[i] for i in s) <= 21  # keeps each image under the reuse count
    ]
    by_total: dict[int, list[tuple[int, ...]]] = {}
    for s in subsets:
        by_total.setdefault(sum(sizes[i] for i in s), []).append(s)
    while True:
        chosen = [(1,)]  # the pruning illustration: only "interact with the oranges" is open
        chosen += [rng.choice(subsets) for _ in range(IMAGES - 2)]
        rest = TARGET_OPEN_SONS - sum(sizes[i] for s in chosen for i in s)
        if rest in by_total:
            chosen.append(rng.choice(by_total[rest]))
            return chosen


def draw_table(rng: random.Random, open_set: tuple[int, ...]) -> dict:
    row: dict[str, dict] = {}
    for idx, (father, sons) in enumerate(FATHERS):
        if idx in open_set:
            pf = round(rng.uniform(THETA, 0.95), 4)
        else:
            pf = round(rng.uniform(0.01, THETA - 0.001), 4)
        row[father] = {"p": pf}
        for son in sons:
            row[son] = {"p": min(pf, round(rng.uniform(0.005, pf), 4))}
    return row


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=OUT)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    system = build_system()
    images = {}
    for i, open_set in enumerate(draw_open_sets(rng), 1):
        images[f"orange-{i:02d}"] = draw_table(rng, open_set)
    doc = {
        "object": "orange",
        "activities": [{"activity": v, "object": "orange"} for v in VERBS],
        "system": system_to_dict(system),
        "tree": {"theta": THETA, "fathers": [{"text": f, "sons": sons} for f, sons in FATHERS]},
        "images": images,
        "illustration": {
            "image": "orange-01",
            "activity": "buy an orange",
            "fathers": [f for f, _ in FATHERS[:4]],
        },
    }
    write_json(args.out, doc)
    print(f"wrote {args.out}: {len(system.symbols)} symbols, {len(system.rules)} rules, {len(images)} images")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
