"""The five external check functions and the resources behind them.

Every check returns a :class:`CheckOutcome`. Failures carry structured
near-miss hints that the verifier turns into rewrite feedback.
"""

from __future__ import annotations

import enum
import itertools
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .phonetic import ENCODERS

log = logging.getLogger(__name__)


class Action(enum.Enum):
    ANAGRAM = 1
    REMOVE_FIRST = 2
    INITIALS = 3
    REMOVE_LAST = 4
    GOES_INSIDE = 5
    GOES_OUTSIDE = 6
    REVERSE = 7
    SUBSTRING = 8
    HOMOPHONE = 9

    def __str__(self) -> str:
        return f"Action.{self.name}"


class PatternError(ValueError):
    """An enumeration such as ``"4,2"`` could not be parsed."""


class OracleUnavailable(RuntimeError):
    pass


ARTICLES = ("a", "an", "the")

_PATTERN_RE = re.compile(r"^\s*(\(\s*)?(\d+(?:\s*[,\-]\s*\d+)*)\s*(?(1)\))\s*$")
_SEGMENT_SPLIT = re.compile(r"[\s\-]+")


def normalise_phrase(text: str) -> str:
    text = text.replace("’", "'").replace("‘", "'")
    return " ".join(text.lower().split())


def normalise_answer(text: str) -> str:
    return " ".join(text.upper().split())


def compact(text: str) -> str:
    """Letters only, uppercased; spaces and hyphens dropped."""
    return re.sub(r"[\s\-]+", "", text).upper()


def strip_article(phrase: str) -> str | None:
    words = phrase.split(" ")
    if len(words) > 1 and words[0] in ARTICLES:
        return " ".join(words[1:])
    return None


def _phrase_variants(phrase: str, strip_articles: bool) -> list[str]:
    p = normalise_phrase(phrase)
    out = [p]
    if strip_articles:
        stripped = strip_article(p)
        if stripped:
            out.append(stripped)
    return out


def parse_pattern(pattern: str) -> tuple[int, ...]:
    m = _PATTERN_RE.match(pattern)
    if not m:
        raise PatternError(f"malformed pattern {pattern!r}")
    nums = tuple(int(x) for x in re.split(r"\s*[,\-]\s*", m.group(2)))
    if any(x <= 0 for x in nums):
        raise PatternError(f"pattern {pattern!r} contains a non-positive length")
    return nums


def matches_pattern(word: str, pattern: str) -> bool:
    """Segment lengths of ``word`` equal the pattern's numbers, in order.

    Raises PatternError for a malformed pattern, which is distinct from a
    plain mismatch.
    """
    lengths = parse_pattern(pattern)
    segments = [s for s in _SEGMENT_SPLIT.split(word.strip()) if s]
    if not segments or not all(s.isalpha() for s in segments):
        return False
    return tuple(len(s) for s in segments) == lengths


def pattern_letter_count(pattern: str) -> int:
    return sum(parse_pattern(pattern))


@dataclass(frozen=True)
class NearMiss:
    kind: str
    matched_subphrase: str = ""
    suggestions: tuple[str, ...] = ()
    detail: str = ""


@dataclass(frozen=True)
class CheckOutcome:
    ok: bool
    near_misses: tuple[NearMiss, ...] = ()

    def __post_init__(self):
        if self.ok and self.near_misses:
            raise ValueError("a passing check carries no near misses")

    def __bool__(self) -> bool:
        return self.ok


PASS = CheckOutcome(True)


SynonymOracle = Callable[[str], str]


@dataclass(frozen=True)
class KnowledgeBase:
    """Read-only lexical resources used by the check functions.

    Phrases are stored lowercased and answers/abbreviations uppercased.
    ``expansions`` is the inverse of ``abbreviations`` but keeps the phrases'
    original spelling and file order, for display in hints.
    """

    wordlist: frozenset[str] = frozenset()
    abbreviations: Mapping[str, frozenset[str]] = field(default_factory=dict)
    expansions: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    indicators: Mapping[Action, frozenset[str]] = field(default_factory=dict)
    thesaurus: Mapping[str, frozenset[str]] = field(default_factory=dict)
    answer_pairs: frozenset[tuple[str, str]] = frozenset()
    synonym_oracle: SynonymOracle | None = None
    phonetic: str = "metaphone"
    strip_articles: bool = True
    fuzzy_indicators: bool = False

    @classmethod
    def build(
        cls,
        *,
        words: Iterable[str] = (),
        abbreviations: Iterable[tuple[str, str]] = (),
        indicators: Iterable[tuple[Action, str]] = (),
        thesaurus: Iterable[tuple[str, str]] = (),
        answer_pairs: Iterable[tuple[str, str]] = (),
        **options,
    ) -> KnowledgeBase:
        forward: dict[str, set[str]] = {}
        reverse: dict[str, dict[str, str]] = {}
        for phrase, abbr in abbreviations:
            key, a = normalise_phrase(phrase), normalise_answer(abbr)
            forward.setdefault(key, set()).add(a)
            reverse.setdefault(a, {}).setdefault(key, " ".join(phrase.split()))
        inds: dict[Action, set[str]] = {}
        for action, phrase in indicators:
            inds.setdefault(action, set()).add(normalise_phrase(phrase))
        thes: dict[str, set[str]] = {}
        for word, syn in thesaurus:
            thes.setdefault(normalise_phrase(word), set()).add(normalise_phrase(syn))
        return cls(
            wordlist=frozenset(compact(w) for w in words if w.strip()),
            abbreviations={k: frozenset(v) for k, v in forward.items()},
            expansions={k: tuple(v.values()) for k, v in reverse.items()},
            indicators={k: frozenset(v) for k, v in inds.items()},
            thesaurus={k: frozenset(v) for k, v in thes.items()},
            answer_pairs=frozenset(
                (normalise_phrase(d), compact(a)) for d, a in answer_pairs
            ),
            **options,
        )

    @classmethod
    def load(cls, directory: str | Path | None = None, **options) -> KnowledgeBase:
        """Load resource files from ``directory`` (default: the bundled fixtures).

        Missing files are treated as empty resources.
        """
        if directory is None:
            root = resources.files("crypticproof") / "resources" / "kb"
        else:
            root = Path(directory)

        def read(name: str) -> list[str]:
            path = root / name
            if not path.is_file():
                log.debug("resource %s not found; treating as empty", name)
                return []
            lines = path.read_text(encoding="utf-8").splitlines()
            return [ln for ln in lines if ln.strip() and not ln.startswith("#")]

        def pairs(name: str) -> list[tuple[str, str]]:
            out = []
            for lineno, line in enumerate(read(name), 1):
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                    raise ValueError(f"{name}: expected two tab-separated fields: {line!r}")
                out.append((parts[0].strip(), parts[1].strip()))
            return out

        indicators = []
        for name, phrase in pairs("indicators.tsv"):
            try:
                indicators.append((Action[name.strip().upper()], phrase))
            except KeyError:
                raise ValueError(f"indicators.tsv: unknown action {name!r}") from None

        return cls.build(
            words=read("wordlist.txt"),
            abbreviations=pairs("abbreviations.tsv"),
            indicators=indicators,
            thesaurus=pairs("thesaurus.tsv"),
            answer_pairs=pairs("answer_pairs.tsv"),
            **options,
        )

    # -- checks ----------------------------------------------------------

    def is_anagram(self, letters: str, word: str) -> CheckOutcome:
        have, want = Counter(compact(letters)), Counter(compact(word))
        if have == want:
            return PASS
        surplus = have - want
        deficit = want - have
        if sum(surplus.values()) <= 2 and sum(deficit.values()) <= 2:
            return CheckOutcome(False, (NearMiss(
                "anagram_letters",
                suggestions=("".join(sorted(surplus.elements())),
                             "".join(sorted(deficit.elements()))),
            ),))
        return CheckOutcome(False)

    def is_abbreviation(self, phrase: str, abbr: str) -> CheckOutcome:
        a = normalise_answer(abbr)
        for p in _phrase_variants(phrase, self.strip_articles):
            if a in self.abbreviations.get(p, ()):
                return PASS
        return CheckOutcome(False, (NearMiss(
            "abbreviation_expansions",
            matched_subphrase=a,
            suggestions=self.expansions.get(a, ()),
        ),))

    def _indicates(self, phrase: str, action: Action) -> bool:
        known = self.indicators.get(action, frozenset())
        if phrase in known:
            return True
        if self.fuzzy_indicators and " " not in phrase:
            return any(" " not in k and _within_one_edit(phrase, k) for k in known)
        return False

    def action_type(self, phrase: str, action: Action) -> CheckOutcome:
        p = normalise_phrase(phrase)
        if self._indicates(p, action):
            return PASS
        hints = []
        words = p.split(" ")
        subs = [
            " ".join(words[i:j])
            for i, j in itertools.combinations(range(len(words) + 1), 2)
            if j - i < len(words)
        ]
        found = [s for s in subs if self._indicates(s, action)]
        if found:
            hints.append(NearMiss("indicator_subphrase", matched_subphrase=found[0],
                                  suggestions=tuple(found)))
        others = tuple(str(a) for a in Action if a is not action and self._indicates(p, a))
        if others:
            hints.append(NearMiss("indicator_other_action", matched_subphrase=p,
                                  suggestions=others))
        return CheckOutcome(False, tuple(hints))

    def _thesaurus_match(self, phrase: str, candidate: str) -> bool:
        cand = normalise_phrase(candidate)
        return cand in self.thesaurus.get(phrase, ()) or phrase in self.thesaurus.get(cand, ())

    def _ask_oracle(self, question: str) -> bool:
        if self.synonym_oracle is None:
            raise OracleUnavailable("no synonym oracle configured")
        try:
            reply = self.synonym_oracle(question)
        except Exception as exc:  # gateway failures of any kind
            raise OracleUnavailable(str(exc)) from exc
        return reply.strip().upper().startswith("YES")

    def is_synonym(self, phrase: str, candidate: str, pattern: str = "") -> CheckOutcome:
        if pattern:
            try:
                fits = matches_pattern(candidate, pattern)
            except PatternError as exc:
                return CheckOutcome(False, (NearMiss("malformed_pattern", detail=str(exc)),))
            if not fits:
                return CheckOutcome(False, (NearMiss(
                    "pattern_mismatch", matched_subphrase=candidate, detail=pattern),))
        variants = _phrase_variants(phrase, self.strip_articles)
        if any(self._thesaurus_match(p, candidate) for p in variants):
            return PASS
        cand = compact(candidate)
        if any((p, cand) in self.answer_pairs for p in variants):
            return PASS
        rejected = ["thesaurus", "answer_pairs"]
        if self.synonym_oracle is not None:
            question = (f"Is '{phrase}' a reasonable crossword definition for "
                        f"'{normalise_answer(candidate)}'? Answer YES or NO.")
            try:
                if self._ask_oracle(question):
                    return PASS
                rejected.append("oracle")
            except OracleUnavailable as exc:
                return CheckOutcome(False, (NearMiss("oracle_unavailable", detail=str(exc)),))
        return CheckOutcome(False, (NearMiss(
            "synonym_rejected",
            matched_subphrase=normalise_phrase(phrase),
            suggestions=self._synonym_suggestions(variants, candidate),
            detail=",".join(rejected),
        ),))

    def _synonym_suggestions(self, variants: list[str], candidate: str) -> tuple[str, ...]:
        size = len(compact(candidate))
        found: set[str] = set()
        for p in variants:
            found.update(s for s in self.thesaurus.get(p, ()) if len(compact(s)) == size)
        return tuple(sorted(s.upper() for s in found))

    def encode(self, text: str) -> str:
        return ENCODERS[self.phonetic](text)

    def is_homophone(self, phrase: str, candidate: str) -> CheckOutcome:
        a, b = self.encode(phrase), self.encode(candidate)
        if a and a == b:
            return PASS
        if self.synonym_oracle is not None:
            question = (f"Does '{phrase}' sound like '{normalise_answer(candidate)}' "
                        f"when spoken aloud? Answer YES or NO.")
            try:
                if self._ask_oracle(question):
                    return PASS
            except OracleUnavailable as exc:
                return CheckOutcome(False, (NearMiss("oracle_unavailable", detail=str(exc)),))
        return CheckOutcome(False, (NearMiss(
            "phonetic_mismatch", matched_subphrase=phrase, suggestions=(a, b)),))

    def known_word(self, word: str) -> bool:
        key = compact(word)
        return bool(key) and key in self.wordlist

    def matches_pattern(self, word: str, pattern: str) -> bool:
        return matches_pattern(word, pattern)


def _within_one_edit(a: str, b: str) -> bool:
    if a == b:
        return True
    if abs(len(a) - len(b)) > 1:
        return False
    if len(a) == len(b):
        return sum(x != y for x, y in zip(a, b)) == 1
    if len(a) > len(b):
        a, b = b, a
    return any(b[:i] + b[i + 1:] == a for i in range(len(b)))
