"""Binary symbol words over the alphabet {1, 2}.

Words encode itineraries of the return map (and template orbits).  The
ordering used to place template strands is the unimodal itinerary order:
lexicographic with the comparison flipped after an odd number of '2's,
matching a fold whose second branch reverses orientation.
"""

from __future__ import annotations

from functools import cmp_to_key

from .errors import WordError

__all__ = [
    "validate_word",
    "min_period",
    "is_primitive",
    "rotations",
    "canonical_necklace",
    "lyndon_words",
    "primitive_necklaces",
    "unimodal_cmp",
    "sort_unimodal",
]


def validate_word(word: str) -> str:
    if not word or any(ch not in "12" for ch in word):
        raise WordError(f"word must be a nonempty string over '1','2': {word!r}")
    return word


def min_period(word: str) -> int:
    validate_word(word)
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and all(word[i] == word[i % d] for i in range(n)):
            return d
    return n


def is_primitive(word: str) -> bool:
    return min_period(word) == len(word)


def rotations(word: str) -> list[str]:
    return [word[i:] + word[:i] for i in range(len(word))]


def canonical_necklace(word: str) -> str:
    return min(rotations(word))


def lyndon_words(max_len: int) -> list[str]:
    """All Lyndon words over '1' < '2' of length 1..max_len (Duval)."""
    out: list[str] = []
    w = "1"
    while w:
        if len(w) <= max_len:
            out.append(w)
        w = (w * (max_len // len(w) + 1))[:max_len]
        while w and w[-1] == "2":
            w = w[:-1]
        if w:
            w = w[:-1] + "2"
    return sorted(out, key=lambda s: (len(s), s))


def primitive_necklaces(length: int) -> list[str]:
    """Lexicographically minimal representatives of primitive necklaces."""
    return [w for w in lyndon_words(length) if len(w) == length]


def unimodal_cmp(s1: str, s2: str) -> int:
    """Itinerary order for a fold map: '1' branch preserves, '2' reverses."""
    n = min(len(s1), len(s2))
    twos = 0
    for i in range(n):
        if s1[i] != s2[i]:
            less = s1[i] < s2[i]
            if twos % 2 == 1:
                less = not less
            return -1 if less else 1
        if s1[i] == "2":
            twos += 1
    if len(s1) == len(s2):
        return 0
    raise WordError("cannot order a strict prefix against its extension")


def sort_unimodal(words: list[str]) -> list[str]:
    return sorted(words, key=cmp_to_key(unimodal_cmp))
