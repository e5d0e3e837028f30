"""Loaders for Cryptonite clue files and Wordplay annotation files."""

from __future__ import annotations

import datetime as dt
import enum
import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

import yaml

from .knowledge import PatternError, matches_pattern, normalise_answer

log = logging.getLogger(__name__)


class SchemaError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ":".join(str(p) for p in (path, line) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.path = path


class MarkupError(SchemaError):
    pass


class Orientation(str, enum.Enum):
    ACROSS = "A"
    DOWN = "D"

    @classmethod
    def parse(cls, value) -> Orientation:
        text = str(value).strip().lower()
        if text in ("a", "across", "ac"):
            return cls.ACROSS
        if text in ("d", "down", "dn"):
            return cls.DOWN
        raise ValueError(f"unknown orientation {value!r}")


def normalise_enumeration(text: str) -> str:
    """``"(4, 2)"`` -> ``"4,2"``; hyphens are kept."""
    return re.sub(r"\s+", "", str(text)).strip("()")


@dataclass(frozen=True)
class ClueRecord:
    clue: str
    answer: str
    enumeration: str
    orientation: Orientation
    quick: bool
    publisher: str = ""
    date: dt.date | None = None
    id: str = ""
    raw_answer: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["orientation"] = self.orientation.value
        d["date"] = self.date.isoformat() if self.date else None
        return d


DEFAULT_KEYS = {
    "clue": "clue",
    "answer": "answer",
    "enumeration": "enumeration",
    "quick": "quick",
    "publisher": "publisher",
    "date": "date",
    "orientation": "orientation",
    "id": "id",
}

_TRUE = {"true", "1", "yes", "y", "t"}
_FALSE = {"false", "0", "no", "n", "f", ""}


def _coerce_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if value is None:
        return False
    if isinstance(value, (int, float)) and value in (0, 1):
        return bool(value)
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"cannot interpret {value!r} as a quick flag")


def _coerce_date(value) -> dt.date | None:
    if value in (None, ""):
        return None
    if isinstance(value, (int, float)):
        # Cryptonite mirrors store epoch milliseconds
        return dt.datetime.fromtimestamp(value / 1000, dt.timezone.utc).date()
    return dt.date.fromisoformat(str(value)[:10])


def parse_clue_record(obj: dict, keys: dict[str, str] | None = None,
                      default_id: str = "") -> ClueRecord:
    keys = {**DEFAULT_KEYS, **(keys or {})}
    try:
        clue = str(obj[keys["clue"]]).strip()
        raw_answer = str(obj[keys["answer"]])
        enumeration = normalise_enumeration(obj[keys["enumeration"]])
    except KeyError as exc:
        raise SchemaError(f"missing field {exc.args[0]!r}") from None
    if not clue:
        raise SchemaError("empty clue")
    answer = normalise_answer(raw_answer)
    try:
        if not matches_pattern(answer, enumeration):
            raise SchemaError(f"answer {answer!r} does not fit enumeration {enumeration!r}")
    except PatternError as exc:
        raise SchemaError(str(exc)) from None
    try:
        orientation = Orientation.parse(obj.get(keys["orientation"], "across"))
        quick = _coerce_bool(obj.get(keys["quick"], False))
        date = _coerce_date(obj.get(keys["date"]))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    return ClueRecord(
        clue=clue,
        answer=answer,
        enumeration=enumeration,
        orientation=orientation,
        quick=quick,
        publisher=str(obj.get(keys["publisher"], "") or ""),
        date=date,
        id=str(obj.get(keys["id"], "") or default_id),
        raw_answer=str(obj.get("raw_answer") or raw_answer),
    )


SPLITS = ("train", "val", "test")


def load_cryptonite(path: str | Path, split: str, *, keys: dict[str, str] | None = None,
                    errors: list[SchemaError] | None = None) -> Iterator[ClueRecord]:
    """Yield validated clue records from a JSON-lines file.

    ``path`` may be the split's file or a directory holding
    ``cryptonite-{split}.jsonl``. Bad lines are logged and appended to
    ``errors`` rather than stopping the load.
    """
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}")
    path = Path(path)
    if path.is_dir():
        path = path / f"cryptonite-{split}.jsonl"
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise SchemaError("expected a JSON object")
                yield parse_clue_record(obj, keys, default_id=f"{split}-{lineno}")
            except (json.JSONDecodeError, SchemaError) as exc:
                err = SchemaError(str(exc.args[0] if isinstance(exc, SchemaError) else exc),
                                  lineno, str(path))
                log.warning("skipping %s", err)
                if errors is not None:
                    errors.append(err)


# -- Wordplay dataset ------------------------------------------------------------

@dataclass(frozen=True)
class WordplayRecord:
    publication: str
    setter: str
    author: str
    num: int
    ad: Orientation
    pattern: str
    clue_markup: str
    wordplay: str
    answer: str

    @property
    def clue(self) -> str:
        return strip_markup(self.clue_markup)[0]

    @property
    def definitions(self) -> list[str]:
        clue, spans = strip_markup(self.clue_markup)
        return [clue[a:b] for a, b in spans]

    def to_dict(self) -> dict:
        """Flat record in the dataset's own key names."""
        d = asdict(self)
        d["ad"] = self.ad.value
        d["clue"] = d.pop("clue_markup")
        return d


def strip_markup(clue_markup: str) -> tuple[str, list[tuple[int, int]]]:
    """Remove definition braces; spans index into the stripped text."""
    out: list[str] = []
    spans: list[tuple[int, int]] = []
    start = None
    for i, ch in enumerate(clue_markup):
        if ch == "{":
            if start is not None:
                raise MarkupError(f"nested '{{' at offset {i} in {clue_markup!r}")
            start = len(out)
        elif ch == "}":
            if start is None:
                raise MarkupError(f"unmatched '}}' at offset {i} in {clue_markup!r}")
            spans.append((start, len(out)))
            start = None
        else:
            out.append(ch)
    if start is not None:
        raise MarkupError(f"unclosed '{{' in {clue_markup!r}")
    return "".join(out), spans


_TITLE = re.compile(r"^(?P<pub>.*?)\s+[\d,]+\s+by\s+(?P<setter>.+?)\s*$", re.I)


def _wordplay_record(entry: dict, doc: dict, index: int) -> WordplayRecord:
    try:
        clue = str(entry["clue"])
        answer = normalise_answer(str(entry["answer"]))
        pattern = normalise_enumeration(entry["pattern"])
        wordplay = str(entry.get("wordplay", ""))
    except KeyError as exc:
        raise SchemaError(f"clue {index}: missing field {exc.args[0]!r}") from None
    strip_markup(clue)
    try:
        if not matches_pattern(answer, pattern):
            raise SchemaError(f"clue {index}: answer {answer!r} does not fit pattern {pattern!r}")
    except PatternError as exc:
        raise SchemaError(f"clue {index}: {exc}") from None
    title = _TITLE.match(str(doc.get("title", "")))
    return WordplayRecord(
        publication=str(entry.get("publication") or doc.get("publication")
                        or (title.group("pub") if title else "")),
        setter=str(entry.get("setter") or doc.get("setter")
                   or (title.group("setter") if title else "")).lower(),
        author=str(entry.get("author") or doc.get("author") or ""),
        num=int(entry.get("num", index)),
        ad=Orientation.parse(entry.get("ad", "A")),
        pattern=pattern,
        clue_markup=clue,
        wordplay=wordplay,
        answer=answer,
    )


def load_wordplay(path: str | Path) -> Iterator[WordplayRecord]:
    """Yield records from a Wordplay YAML file.

    Accepts puzzle documents (``title``/``url``/``author``/``clues``, possibly
    several per file) or a bare list of flat records.
    """
    path = Path(path)
    try:
        docs = list(yaml.safe_load_all(path.read_text(encoding="utf-8")))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"YAML error: {exc}", mark.line + 1 if mark else None, str(path)) from None
    for doc in docs:
        if doc is None:
            continue
        if isinstance(doc, list):
            entries, meta = doc, {}
        elif isinstance(doc, dict):
            entries, meta = doc.get("clues") or [], doc
        else:
            raise SchemaError("expected a mapping or a list", path=str(path))
        for i, entry in enumerate(entries, 1):
            if not isinstance(entry, dict):
                raise SchemaError(f"clue {i}: expected a mapping", path=str(path))
            try:
                yield _wordplay_record(entry, meta, i)
            except SchemaError as exc:
                raise SchemaError(str(exc), path=str(path)) from None


def dump_wordplay(records: list[WordplayRecord]) -> str:
    return yaml.safe_dump([r.to_dict() for r in records], sort_keys=False, allow_unicode=True)


@dataclass
class LoadStats:
    loaded: int = 0
    errors: list[SchemaError] = field(default_factory=list)
