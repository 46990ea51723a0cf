"""Small, table-driven English morphology for symbol phrases.

Symbols are stored as short verb or noun phrases ("hold a boarding pass",
"hip seated in a boat", "luggage visible beside him").  Prompts and
yes/no questions need them as declarative sentences, and oracle answers
come back as sentences that must be turned into symbol phrases again.
Everything here is deterministic; nothing tries to be a general parser.
"""

from __future__ import annotations

import re

VOWELS = set("aeiou")

BODY_PARTS = {
    "hand", "hands", "arm", "arms", "hip", "hips", "leg", "legs", "foot", "feet",
    "head", "eye", "eyes", "mouth", "shoulder", "shoulders", "knee", "knees",
    "finger", "fingers", "torso", "body", "back", "face", "lips", "elbow", "elbows",
}
PLURAL_PARTS = {p for p in BODY_PARTS if p.endswith("s") and p not in {"lips"}} | {"feet", "lips"}

COPULAS = {"is", "are", "was", "were"}

# words that, right after the first word, mark that first word as a verb
FUNCTION_WORDS = {
    "a", "an", "the", "his", "her", "their", "its", "my", "some", "one", "two",
    "on", "in", "into", "onto", "to", "towards", "toward", "at", "with", "up",
    "down", "over", "out", "off", "from", "for", "by", "forward", "back", "away",
    "around", "through", "across", "along", "near", "beside", "behind", "under",
    "goodbye", "hands", "something", "someone", "it", "them", "him",
}

# common activity verbs, base form
VERBS = {
    "adjust", "board", "break", "bring", "buy", "carry", "catch", "check", "chop",
    "clean", "climb", "close", "control", "cook", "cut", "dig", "drag", "drink",
    "drive", "drop", "eat", "enter", "examine", "exit", "feed", "fill", "fly",
    "give", "grab", "grip", "hang", "hold", "hug", "inspect", "jump", "kick",
    "kneel", "launch", "lean", "lift", "load", "look", "move", "open", "operate",
    "paint", "park", "pay", "peel", "pet", "pick", "place", "play", "point",
    "pour", "pull", "push", "put", "race", "raise", "reach", "read", "repair",
    "ride", "row", "run", "scan", "serve", "shake", "show", "sign", "sit",
    "slice", "smell", "squeeze", "stand", "steer", "step", "stretch", "swing",
    "take", "talk", "throw", "tie", "touch", "turn", "type", "use", "walk",
    "wash", "watch", "wave", "wear", "wipe", "write", "hand", "grasp", "press",
    "sniff", "taste", "wait", "queue", "lick", "hit", "fix", "pedal", "brush",
    "groom", "lead", "train", "stack", "tap", "wrap", "zip", "shop", "stop",
}

# participles, adjectives and prepositions that can open a predicate as-is
PREDICATE_WORDS = {
    "visible", "seated", "close", "near", "on", "in", "at", "beside", "behind",
    "above", "below", "under", "next", "open", "closed", "ready", "full",
    "empty", "attached", "stretched", "bent", "raised", "lowered",
}

GERUND_EXCEPTIONS = {"be": "being", "see": "seeing", "flee": "fleeing", "lie": "lying",
                     "tie": "tying", "die": "dying", "dye": "dyeing", "age": "ageing"}
BASE_EXCEPTIONS = {v: k for k, v in GERUND_EXCEPTIONS.items()} | {
    "using": "use", "queueing": "queue", "creating": "create", "operating": "operate",
    "examining": "examine", "comparing": "compare", "arranging": "arrange",
    "changing": "change", "exchanging": "exchange", "preparing": "prepare",
    "purchasing": "purchase", "continuing": "continue", "hanging": "hang",
    "singing": "sing", "bringing": "bring", "swinging": "swing", "adding": "add",
}


def _is_cvc(word: str) -> bool:
    """Single-syllable consonant-vowel-consonant ending (grip, run, wav)."""
    if len(word) < 2:
        return False
    groups = re.findall(r"[aeiou]+", word)
    if len(groups) != 1:
        return False
    last, mid = word[-1], word[-2]
    before = word[-3] if len(word) >= 3 else ""
    return (
        last not in VOWELS
        and last not in "wxy"
        and mid in VOWELS
        and (before == "" or before not in VOWELS)
    )


def gerund(verb: str) -> str:
    verb = verb.lower()
    if verb in GERUND_EXCEPTIONS:
        return GERUND_EXCEPTIONS[verb]
    if verb.endswith("ie"):
        return verb[:-2] + "ying"
    if verb.endswith("e") and not verb.endswith(("ee", "ye", "oe")) and len(verb) > 2:
        return verb[:-1] + "ing"
    if _is_cvc(verb):
        return verb + verb[-1] + "ing"
    return verb + "ing"


def base_form(word: str) -> str:
    """Undo gerund formation: holding -> hold, placing -> place, gripping -> grip."""
    word = word.lower()
    if word in BASE_EXCEPTIONS:
        return BASE_EXCEPTIONS[word]
    if not word.endswith("ing") or len(word) <= 4:
        return word
    stem = word[:-3]
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in VOWELS and stem[-1] not in "lsz":
        if _is_cvc(stem[:-1]):
            return stem[:-1]
    if stem.endswith(("v", "c", "dg")) or (stem.endswith("z") and not stem.endswith("zz")):
        return stem + "e"
    if _is_cvc(stem):
        return stem + "e"
    return stem


def _looks_like_verb(word: str, following: str | None) -> bool:
    if word in VERBS:
        return True
    return following is not None and following in FUNCTION_WORDS and word not in BODY_PARTS


def _predicate(words: list[str]) -> str:
    if not words:
        return ""
    head = words[0].lower()
    if head in VERBS:
        return " ".join([gerund(head)] + words[1:])
    if head.endswith(("ing", "ed")) or head in PREDICATE_WORDS:
        return " ".join(words)
    following = words[1].lower() if len(words) > 1 else None
    if _looks_like_verb(head, following):
        return " ".join([gerund(head)] + words[1:])
    return " ".join(words)


def _sentence(text: str) -> str:
    text = text.strip()
    return text[:1].upper() + text[1:] + ("" if text.endswith(".") else ".")


def is_sentence(text: str) -> bool:
    text = text.strip()
    return bool(text) and text[0].isupper() and text.endswith(".")


def statement(symbol_text: str) -> str:
    """Render a symbol phrase as a declarative sentence about the person."""
    text = symbol_text.strip().rstrip(".")
    if is_sentence(symbol_text):
        return symbol_text.strip()
    words = text.split()
    lowered = [w.lower() for w in words]

    for i, w in enumerate(lowered):
        if w in COPULAS and i > 0:
            subject = " ".join(words[:i])
            if lowered[0] not in {"the", "a", "an", "his", "her", "their"}:
                subject = "the " + subject
            return _sentence(f"{subject} {' '.join(words[i:])}")

    if lowered[0] in BODY_PARTS:
        copula = "are" if lowered[0] in PLURAL_PARTS else "is"
        return _sentence(f"The person's {lowered[0]} {copula} {_predicate(words[1:])}")

    following = lowered[1] if len(lowered) > 1 else None
    if _looks_like_verb(lowered[0], following) or len(words) == 1:
        return _sentence(f"The person is {_predicate(words)}")

    # noun subject: the predicate starts at the first participle/adjective/verb
    for k in range(1, len(words)):
        w = lowered[k]
        nxt = lowered[k + 1] if k + 1 < len(lowered) else None
        if w.endswith(("ing", "ed")) or w in PREDICATE_WORDS or _looks_like_verb(w, nxt):
            subject = " ".join(words[:k])
            copula = "are" if lowered[k - 1].endswith("s") and not lowered[k - 1].endswith("ss") else "is"
            return _sentence(f"the {subject} {copula} {_predicate(words[k:])}")
    return _sentence(f"The person is {_predicate(words)}")


def yes_no_question(symbol_text: str) -> str:
    return f"{statement(symbol_text)} Yes/No?"


def phrase_to_symbol(phrase: str) -> str:
    """Turn an oracle answer phrase back into a symbol phrase.

    "Hands holding a boarding pass" -> "holding..." -> "hold a boarding pass";
    "The person is walking towards the gate" -> "walk towards the gate";
    "The person's hip is seated in a boat" -> "hip seated in a boat".
    The result is not canonicalized; callers do that.
    """
    s = phrase.strip().strip("[]").strip()
    s = re.sub(r"[\s.;:,!?]+$", "", s)

    m = re.match(r"(?i)^the person['’]s\s+(\w+)\s+(?:is|are)\s+(.*)$", s)
    if m:
        return f"{m.group(1).lower()} {_degerund_first(m.group(2))}"
    m = re.match(r"(?i)^(?:the person|he|she|they)\s+(?:is|are)\s+(.*)$", s)
    if m:
        return _degerund_first(m.group(1))
    m = re.match(r"(?i)^(?:(?:his|her|their|the person['’]s)\s+)?hands?\s+(\w+ing)\b(.*)$", s)
    if m:
        return base_form(m.group(1)) + m.group(2)
    return _leading_gerund_to_base(s)


def _leading_gerund_to_base(s: str) -> str:
    words = s.split()
    if len(words) < 2 or any(w.lower() in COPULAS for w in words):
        return s
    head = words[0].lower()
    if head.endswith("ing") and len(head) > 4:
        base = base_form(head)
        if base in VERBS or words[1].lower() in FUNCTION_WORDS:
            return " ".join([base] + words[1:])
    return s


def _degerund_first(rest: str) -> str:
    words = rest.split()
    if words and words[0].lower().endswith("ing") and len(words[0]) > 4:
        words[0] = base_form(words[0])
    return " ".join(words)


def activity_phrase(conclusion_text: str, object_hint: str | None = None, definite: bool = False) -> str:
    """'board an airplane' -> 'boarding an airplane' (or 'boarding the airplane')."""
    words = conclusion_text.strip().rstrip(".").split()
    if words and words[0].lower() in {"human", "person"}:
        words = words[1:]
    if not words:
        return conclusion_text
    words[0] = gerund(words[0])
    phrase = " ".join(words)
    if definite and object_hint:
        phrase = re.sub(rf"\b(?:a|an)\s+({re.escape(object_hint)})\b", r"the \1", phrase)
    return phrase


def indefinite(noun: str) -> str:
    return ("an " if noun[:1].lower() in VOWELS else "a ") + noun
