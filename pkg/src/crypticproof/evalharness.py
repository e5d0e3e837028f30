"""Top-1 accuracy evaluation, partial-fill masks and the embedding fallback."""

from __future__ import annotations

import logging
import math
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .data import ClueRecord
from .knowledge import compact, matches_pattern
from .pipeline import CandidateSet

log = logging.getLogger(__name__)


def answers_match(predicted: str, gold: str) -> bool:
    """Whole-answer equality ignoring case, spaces and hyphens."""
    return bool(predicted) and compact(predicted) == compact(gold)


# -- accuracy ----------------------------------------------------------------------

@dataclass(frozen=True)
class ClueOutcome:
    id: str
    gold: str
    predicted: str
    proven: bool
    correct: bool
    quick: bool
    error: str | None = None


def _rate(num: int, den: int) -> float | None:
    return num / den if den else None


@dataclass(frozen=True)
class AccuracyReport:
    """Rates are ``None`` when their subset is empty."""

    samples: int
    seed: int
    per_clue: tuple[ClueOutcome, ...]
    overall: float | None = field(init=False)
    quick: float | None = field(init=False)
    hard: float | None = field(init=False)

    def __post_init__(self):
        quick = [c for c in self.per_clue if c.quick]
        hard = [c for c in self.per_clue if not c.quick]
        object.__setattr__(self, "overall", _rate(self.correct, self.samples))
        object.__setattr__(self, "quick", _rate(sum(c.correct for c in quick), len(quick)))
        object.__setattr__(self, "hard", _rate(sum(c.correct for c in hard), len(hard)))

    @property
    def correct(self) -> int:
        return sum(c.correct for c in self.per_clue)

    @property
    def quick_samples(self) -> int:
        return sum(c.quick for c in self.per_clue)

    @property
    def hard_samples(self) -> int:
        return self.samples - self.quick_samples

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "overall": self.overall,
            "quick": self.quick,
            "hard": self.hard,
            "quick_samples": self.quick_samples,
            "hard_samples": self.hard_samples,
            "per_clue": [asdict(c) for c in self.per_clue],
        }


Solver = Callable[[ClueRecord], object]


def _run_one(solver: Solver, record: ClueRecord) -> ClueOutcome:
    try:
        result = solver(record)
    except Exception as exc:  # noqa: BLE001 - solver failures score as incorrect
        log.warning("solver failed on %s: %s", record.id, exc)
        return ClueOutcome(record.id, record.answer, "", False, False, record.quick,
                           f"{type(exc).__name__}: {exc}")
    predicted = getattr(result, "answer", result)
    predicted = "" if predicted is None else str(predicted)
    proven = bool(getattr(result, "proven", False))
    return ClueOutcome(record.id, record.answer, predicted, proven,
                       answers_match(predicted, record.answer), record.quick)


def evaluate(records: Sequence[ClueRecord], solver: Solver, sample_size: int, seed: int,
             workers: int = 1) -> AccuracyReport:
    """Score ``solver`` on a seeded uniform sample drawn without replacement.

    ``solver`` returns either an answer string or an object with ``answer``
    (and optionally ``proven``). Exceptions mark that clue incorrect.
    """
    records = list(records)
    if not 0 <= sample_size <= len(records):
        raise ValueError(f"sample_size must be in [0, {len(records)}]")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    sample = random.Random(seed).sample(records, sample_size)
    if workers == 1:
        outcomes = [_run_one(solver, r) for r in sample]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda r: _run_one(solver, r), sample))
    outcomes.sort(key=lambda c: c.id)
    return AccuracyReport(sample_size, seed, tuple(outcomes))


# -- letter masks ------------------------------------------------------------------

@dataclass(frozen=True)
class LetterMask:
    """Known letters by position, counting letters only (no spaces or hyphens)."""

    length: int
    known: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be >= 0")
        for pos, letter in self.known.items():
            if not 0 <= pos < self.length:
                raise ValueError(f"mask position {pos} out of range for length {self.length}")
            if len(letter) != 1 or not letter.isalpha():
                raise ValueError(f"mask letter {letter!r} is not a single letter")
        object.__setattr__(self, "known", {p: self.known[p].upper() for p in sorted(self.known)})

    def admits(self, word: str) -> bool:
        letters = compact(word)
        return len(letters) == self.length and all(letters[p] == c for p, c in self.known.items())

    def render(self) -> str:
        return "".join(self.known.get(i, "?") for i in range(self.length))


def known_count(fraction: float, length: int) -> int:
    """``round(fraction * length)`` with halves rounded up."""
    exact = Decimal(str(fraction)) * length
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def make_mask(answer: str, fraction: float, seed: int | str) -> LetterMask:
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must be within [0, 1]")
    letters = compact(answer)
    k = known_count(fraction, len(letters))
    positions = random.Random(seed).sample(range(len(letters)), k)
    return LetterMask(len(letters), {p: letters[p] for p in positions})


def filter_by_mask(candidates, mask: LetterMask):
    """Keep the candidates that agree with every known letter.

    Accepts a :class:`CandidateSet` (counts are preserved) or any iterable of
    answers, returning the same kind.
    """
    if isinstance(candidates, CandidateSet):
        kept = {a: n for a, n in candidates.counts.items() if mask.admits(a)}
        return CandidateSet(kept, candidates.attempts)
    return [a for a in candidates if mask.admits(a)]


# -- embeddings --------------------------------------------------------------------

class EmptyCandidatePool(LookupError):
    pass


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class NgramHasher:
    """Out-of-vocabulary vectors from hashed character n-grams of ``<token>``."""

    min_n: int = 3
    max_n: int = 5
    buckets: int = 1 << 16
    seed: int = 0

    def ngrams(self, token: str) -> list[str]:
        padded = f"<{token}>"
        return [padded[i:i + n] for n in range(self.min_n, self.max_n + 1)
                for i in range(len(padded) - n + 1)]

    def bucket_vector(self, bucket: int, dimension: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, bucket])
        return rng.standard_normal(dimension) / math.sqrt(dimension)

    def vector(self, token: str, dimension: int) -> np.ndarray:
        grams = self.ngrams(token)
        if not grams:
            return np.zeros(dimension)
        return np.mean([self.bucket_vector(fnv1a(g) % self.buckets, dimension) for g in grams], axis=0)


_TOKEN = re.compile(r"[a-z]+(?:'[a-z]+)?")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower().replace("’", "'"))


@dataclass(frozen=True)
class EmbeddingStore:
    dimension: int
    vectors: Mapping[str, np.ndarray]
    oov_hasher: NgramHasher = NgramHasher()

    def __post_init__(self):
        for token, vec in self.vectors.items():
            if vec.shape != (self.dimension,):
                raise ValueError(f"vector for {token!r} has shape {vec.shape}, expected ({self.dimension},)")
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"vector for {token!r} is not finite")

    @classmethod
    def load(cls, path: str | Path | None = None, hasher: NgramHasher | None = None) -> EmbeddingStore:
        """Read ``token<TAB>floats`` lines; a fastText ``count dim`` header is skipped.

        Without a path the bundled toy store is loaded.
        """
        if path is None:
            text = (resources.files("crypticproof") / "resources" / "embeddings"
                    / "toy.tsv").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        vectors: dict[str, np.ndarray] = {}
        dimension = None
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" in line:
                token, _, rest = line.partition("\t")
            else:
                token, _, rest = line.partition(" ")
            fields = rest.split()
            if lineno == 1 and len(fields) == 1 and token.isdigit():
                continue
            try:
                vec = np.array([float(x) for x in fields])
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric vector component") from None
            if dimension is None:
                dimension = len(vec)
            elif len(vec) != dimension:
                raise ValueError(f"line {lineno}: expected {dimension} components, got {len(vec)}")
            vectors[token.lower()] = vec
        if dimension is None:
            raise ValueError("embedding file holds no vectors")
        return cls(dimension, vectors, hasher or NgramHasher())

    def token_vector(self, token: str) -> np.ndarray:
        vec = self.vectors.get(token.lower())
        if vec is None:
            return self.oov_hasher.vector(token.lower(), self.dimension)
        return vec

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        if not tokens:
            return np.zeros(self.dimension)
        return np.mean([self.token_vector(t) for t in tokens], axis=0)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def knn_answer(clue: str, store: EmbeddingStore, wordlist: Iterable[str], pattern: str,
               mask: LetterMask | None = None) -> str:
    """Single nearest neighbour (k=1) of the clue among admissible words.

    The clue's trailing enumeration is ignored. Ties go to the
    lexicographically smaller word.
    """
    words = list(wordlist)
    if not words:
        raise ValueError("wordlist is empty")
    pool = sorted({w.upper() for w in words
                   if matches_pattern(w, pattern) and (mask is None or mask.admits(w))})
    if not pool:
        raise EmptyCandidatePool(f"no wordlist entry fits pattern {pattern!r}"
                                 + (f" and mask {mask.render()}" if mask else ""))
    query = store.embed(re.sub(r"\(\s*[\d,\-\s]+\)\s*$", "", clue))
    scored = [(-cosine(query, store.embed(w)), w) for w in pool]
    return min(scored)[1]


# -- partial fill ------------------------------------------------------------------

def mask_for(record: ClueRecord, fraction: float, seed: int) -> LetterMask:
    return make_mask(record.answer, fraction, f"{seed}:{record.id}")


def partial_fill(records: Sequence[ClueRecord], fraction: float, sample_size: int, seed: int,
                 solver: Callable[[ClueRecord, LetterMask], object], method: str,
                 workers: int = 1) -> dict:
    """Accuracy when a seeded fraction of each answer's letters is revealed."""
    report = evaluate(records, lambda r: solver(r, mask_for(r, fraction, seed)),
                      sample_size, seed, workers)
    return {"method": method, "fraction": fraction, **report.to_dict()}


def knn_solver(store: EmbeddingStore, wordlist: Iterable[str]) -> Callable[[ClueRecord, LetterMask | None], str]:
    words = list(wordlist)

    def solve(record: ClueRecord, mask: LetterMask | None = None) -> str:
        return knn_answer(record.clue, store, words, record.enumeration, mask)

    return solve


__all__ = [
    "AccuracyReport", "ClueOutcome", "EmbeddingStore", "EmptyCandidatePool", "LetterMask",
    "NgramHasher", "answers_match", "cosine", "evaluate", "filter_by_mask", "knn_answer",
    "knn_solver", "make_mask", "mask_for", "partial_fill",
]
