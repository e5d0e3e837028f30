"""Metaphone phonetic encoding.

A rule-based encoder in the style of Lawrence Philips' original Metaphone
(1990). Output codes use ``0`` for the "th" sound and ``X`` for "sh"/"ch".
Words in a phrase are encoded separately and concatenated, so word breaks
do not affect whether two phrases sound alike.
"""

from __future__ import annotations

import re

VOWELS = frozenset("AEIOU")
FRONT_VOWELS = frozenset("EIY")

_INITIAL_SILENT = ("AE", "GN", "KN", "PN", "WR")


def _encode_word(word: str) -> str:
    word = "".join(ch for ch in word.upper() if "A" <= ch <= "Z")
    if not word:
        return ""

    # collapse doubled letters, except C ("acceptable")
    deduped = [word[0]]
    for ch in word[1:]:
        if ch != deduped[-1] or ch == "C":
            deduped.append(ch)
    w = "".join(deduped)

    if w[:2] in _INITIAL_SILENT:
        w = w[1:]
    elif w[0] == "X":
        w = "S" + w[1:]
    elif w.startswith("WH"):
        w = "W" + w[2:]

    n = len(w)
    out: list[str] = []

    def at(i: int) -> str:
        return w[i] if 0 <= i < n else ""

    i = 0
    while i < n:
        ch = w[i]
        prev, nxt, nxt2 = at(i - 1), at(i + 1), at(i + 2)

        if ch in VOWELS:
            if i == 0:
                out.append(ch)
        elif ch == "B":
            if not (prev == "M" and i == n - 1):
                out.append("B")
        elif ch == "C":
            if nxt == "I" and nxt2 == "A":
                out.append("X")
            elif nxt == "H":
                out.append("K" if prev == "S" else "X")
                i += 1
            elif nxt in FRONT_VOWELS:
                if prev != "S":
                    out.append("S")
            else:
                out.append("K")
        elif ch == "D":
            if nxt == "G" and nxt2 in FRONT_VOWELS:
                out.append("J")
                i += 1
            else:
                out.append("T")
        elif ch == "G":
            if nxt == "H" and not (i + 2 >= n or nxt2 in VOWELS):
                pass  # "night", "bought"
            elif nxt == "N" and (i + 2 == n or w[i + 1:] == "NED"):
                pass  # "sign", "signed"
            elif nxt in FRONT_VOWELS and prev != "G":
                out.append("J")
            else:
                out.append("K")
        elif ch == "H":
            if prev in ("C", "S", "P", "T", "G"):
                pass
            elif prev in VOWELS and nxt not in VOWELS:
                pass
            else:
                out.append("H")
        elif ch == "K":
            if prev != "C":
                out.append("K")
        elif ch == "P":
            if nxt == "H":
                out.append("F")
                i += 1
            else:
                out.append("P")
        elif ch == "Q":
            out.append("K")
        elif ch == "S":
            if nxt == "H":
                out.append("X")
                i += 1
            elif nxt == "I" and nxt2 in ("O", "A"):
                out.append("X")
            else:
                out.append("S")
        elif ch == "T":
            if nxt == "I" and nxt2 in ("O", "A"):
                out.append("X")
            elif nxt == "H":
                out.append("0")
                i += 1
            elif nxt == "C" and nxt2 == "H":
                pass
            else:
                out.append("T")
        elif ch == "V":
            out.append("F")
        elif ch == "W":
            if nxt in VOWELS:
                out.append("W")
        elif ch == "X":
            out.append("KS")
        elif ch == "Y":
            if nxt in VOWELS:
                out.append("Y")
        elif ch == "Z":
            out.append("S")
        else:  # F, J, L, M, N, R
            out.append(ch)
        i += 1
    return "".join(out)


def metaphone(phrase: str) -> str:
    """Encode ``phrase`` word by word and concatenate the codes.

    >>> metaphone("pair"), metaphone("PARE")
    ('PR', 'PR')
    >>> metaphone("night") == metaphone("knight")
    True
    """
    return "".join(_encode_word(w) for w in re.split(r"[\s\-]+", phrase) if w)


ENCODERS = {"metaphone": metaphone}
