"""Chat-completion backends and prompt assembly.

Two backends share one interface, ``backend.chat(messages, temperature=...)``:

* :class:`HTTPBackend` speaks the OpenAI-compatible ``/chat/completions``
  JSON protocol, with retries and a bound on in-flight requests.
* :class:`ScriptedBackend` replays canned responses from a fixture file,
  matched either by request fingerprint or by call order.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import re
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import httpx

log = logging.getLogger(__name__)

Message = tuple[str, str]  # (role, content)


class GatewayError(RuntimeError):
    def __init__(self, message: str, fingerprint: str = ""):
        super().__init__(f"{message} [request {fingerprint[:12]}]" if fingerprint else message)
        self.fingerprint = fingerprint


class Timeout(GatewayError):
    pass


class RateLimited(GatewayError):
    pass


class FixtureMiss(GatewayError):
    pass


class MalformedResponse(GatewayError):
    pass


class ConfigError(ValueError):
    pass


def fingerprint(messages: Sequence[Message]) -> str:
    """Stable hash of the role/content sequence of a request."""
    h = hashlib.sha256()
    for role, content in messages:
        h.update(role.encode("utf-8") + b"\x00" + content.encode("utf-8") + b"\x01")
    return h.hexdigest()


class ChatBackend(Protocol):
    def chat(self, messages: Sequence[Message], *, temperature: float | None = None) -> str: ...


# -- HTTP backend -------------------------------------------------------------

@dataclass
class ModelEndpoint:
    base_url: str
    model_name: str
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 1.0
    max_tokens: int = 512
    request_timeout: float = 60.0
    max_retries: int = 3
    backoff: float = 1.0
    max_in_flight: int = 4

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")


_TRANSIENT = {408, 409, 425, 500, 502, 503, 504}


class HTTPBackend:
    def __init__(self, endpoint: ModelEndpoint, client: httpx.Client | None = None):
        self.endpoint = endpoint
        self._client = client or httpx.Client(timeout=endpoint.request_timeout)
        self._slots = threading.BoundedSemaphore(endpoint.max_in_flight)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.endpoint.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def chat(self, messages: Sequence[Message], *, temperature: float | None = None) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        ep = self.endpoint
        fp = fingerprint(messages)
        payload = {
            "model": ep.model_name,
            "messages": [{"role": r, "content": c} for r, c in messages],
            "temperature": ep.temperature if temperature is None else temperature,
            "max_tokens": ep.max_tokens,
        }
        url = ep.base_url.rstrip("/") + "/chat/completions"
        last: GatewayError | None = None
        for attempt in range(ep.max_retries + 1):
            if attempt:
                time.sleep(ep.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    resp = self._client.post(url, json=payload, headers=self._headers(),
                                             timeout=ep.request_timeout)
            except httpx.TimeoutException as exc:
                last = Timeout(f"request timed out: {exc}", fp)
                continue
            except httpx.TransportError as exc:
                last = GatewayError(f"transport error: {exc}", fp)
                continue
            if resp.status_code == 429:
                last = RateLimited("rate limited (HTTP 429)", fp)
                continue
            if resp.status_code in _TRANSIENT:
                last = GatewayError(f"HTTP {resp.status_code}", fp)
                continue
            if resp.status_code >= 400:
                raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}", fp)
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise MalformedResponse(f"unexpected response body: {exc}", fp) from None
        log.warning("giving up after %d attempts: %s", ep.max_retries + 1, last)
        assert last is not None
        raise last


# -- scripted backend ---------------------------------------------------------

class FixtureMode(str, enum.Enum):
    BY_HASH = "ByHash"
    BY_SEQUENCE = "BySequence"


class ScriptedBackend:
    """Replay canned responses.

    In ``ByHash`` mode several entries may share a fingerprint; they are
    returned in file order, one per matching request.
    """

    def __init__(self, entries: Sequence[tuple[str | int, str]], mode: FixtureMode | None = None):
        if mode is None:
            mode = (FixtureMode.BY_SEQUENCE if entries and all(isinstance(m, int) for m, _ in entries)
                    else FixtureMode.BY_HASH)
        self.mode = mode
        self._lock = threading.Lock()
        self.calls: list[tuple[Message, ...]] = []
        if mode is FixtureMode.BY_SEQUENCE:
            self._sequence = [resp for _, resp in sorted(entries, key=lambda e: int(e[0]))]
            self._cursor = 0
        else:
            self._by_hash: dict[str, deque[str]] = {}
            for match, resp in entries:
                self._by_hash.setdefault(str(match), deque()).append(resp)

    @classmethod
    def from_responses(cls, responses: Sequence[str]) -> ScriptedBackend:
        return cls(list(enumerate(responses)), FixtureMode.BY_SEQUENCE)

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedBackend:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ConfigError(f"{path}: fixture file must hold a JSON array")
        entries = []
        for i, item in enumerate(data):
            try:
                entries.append((item["match"], item["response"]))
            except (KeyError, TypeError):
                raise ConfigError(f"{path}: entry {i} needs 'match' and 'response'") from None
        return cls(entries)

    def chat(self, messages: Sequence[Message], *, temperature: float | None = None) -> str:
        if not messages:
            raise ValueError("messages must be non-empty")
        fp = fingerprint(messages)
        with self._lock:
            self.calls.append(tuple(messages))
            if self.mode is FixtureMode.BY_SEQUENCE:
                if self._cursor >= len(self._sequence):
                    raise FixtureMiss(f"fixture exhausted after {self._cursor} responses", fp)
                self._cursor += 1
                return self._sequence[self._cursor - 1]
            queue = self._by_hash.get(fp)
            if not queue:
                raise FixtureMiss("no fixture registered for this request", fp)
            return queue.popleft()


class RecordingBackend:
    """Wrap a backend and keep every exchange, for writing ByHash fixtures."""

    def __init__(self, inner: ChatBackend):
        self.inner = inner
        self.records: list[dict] = []
        self._lock = threading.Lock()

    def chat(self, messages: Sequence[Message], *, temperature: float | None = None) -> str:
        reply = self.inner.chat(messages, temperature=temperature)
        with self._lock:
            self.records.append({"match": fingerprint(messages), "response": reply})
        return reply

    def dump(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.records, indent=1, ensure_ascii=False), encoding="utf-8")
        return path


# -- prompts ------------------------------------------------------------------

@dataclass(frozen=True)
class PromptBundle:
    rubric: str
    wordplay_shots: tuple[str, ...]
    dsl_rubric: str
    formalisation_shots: tuple[str, ...]
    instruction: str
    rewrite_instruction: str = ""
    wordplay_intro: str = "For example:"
    formalisation_intro: str = ("The following are examples of simple functions that prove "
                                "that each puzzle solution is correct:")

    @classmethod
    def load(cls, directory: str | Path | None = None) -> PromptBundle:
        """Read a bundle directory (default: the bundled prompts).

        Layout: ``rubric.txt``, ``dsl.txt``, ``instruction.txt``, ``rewrite.txt``
        and ``shots/wordplay_*.txt`` / ``shots/proof_*.txt``.
        """
        root = (resources.files("crypticproof") / "resources" / "prompts"
                if directory is None else Path(directory))

        def text(name: str, default: str = "") -> str:
            path = root / name
            return path.read_text(encoding="utf-8").strip() if path.is_file() else default

        shots = root / "shots"
        names = sorted(p.name for p in shots.iterdir()) if shots.is_dir() else []
        wordplay = tuple((shots / n).read_text(encoding="utf-8").strip()
                         for n in names if n.startswith("wordplay_") and n.endswith(".txt"))
        proofs = tuple((shots / n).read_text(encoding="utf-8").strip()
                       for n in names if n.startswith("proof_") and n.endswith(".txt"))
        kwargs = {}
        for key, name in (("wordplay_intro", "wordplay_intro.txt"),
                          ("formalisation_intro", "formalise_intro.txt")):
            value = text(name)
            if value:
                kwargs[key] = value
        return cls(
            rubric=text("rubric.txt"),
            wordplay_shots=wordplay,
            dsl_rubric=text("dsl.txt"),
            formalisation_shots=proofs,
            instruction=text("instruction.txt"),
            rewrite_instruction=text("rewrite.txt"),
            **kwargs,
        )

    def check(self, rewrite: bool = False):
        missing = [name for name in ("rubric", "wordplay_shots", "dsl_rubric",
                                     "formalisation_shots", "instruction")
                   if not getattr(self, name)]
        if rewrite and not self.rewrite_instruction:
            missing.append("rewrite_instruction")
        if missing:
            raise ConfigError("prompt bundle is missing: " + ", ".join(missing))

    @property
    def shot_counts(self) -> dict[str, int]:
        return {"wordplay": len(self.wordplay_shots), "formalisation": len(self.formalisation_shots)}

    def context(self) -> str:
        """Everything that precedes the problem statement."""
        wordplay = "\n---\n".join(self.wordplay_shots)
        return "\n\n".join([
            self.rubric,
            f"{self.wordplay_intro}\n---\n{wordplay}\n---",
            self.dsl_rubric,
            self.formalisation_intro + "\n\n" + "\n\n".join(self.formalisation_shots),
        ])


HANDOVER = "```python\ndef proof(answer="

ANSWER_INSTRUCTION = ("Cryptic clue answer generation : Given the clue, its letter pattern "
                      "and orientation, return the answer")
WORDPLAY_INSTRUCTION = ("Cryptic clue wordplay generation : Given the clue and the answer, "
                        "return expert definition and wordplay annotations")

_ENUMERATION = re.compile(r"\s*\(\s*\d+(?:\s*[,\-]\s*\d+)*\s*\)\s*$")


def clue_text(clue: str) -> str:
    """The clue without a trailing ``(5)``-style enumeration."""
    return _ENUMERATION.sub("", clue).strip()


def answer_messages(clue: str, pattern: str, ad: str) -> list[Message]:
    orientation = {"A": "across", "D": "down"}.get(ad.upper()[:1], ad)
    return [
        ("system", ANSWER_INSTRUCTION),
        ("user", f'clue: "{clue_text(clue)}"\npattern: {pattern}\nad: {orientation}'),
    ]


def wordplay_messages(clue: str, answer: str) -> list[Message]:
    return [
        ("system", WORDPLAY_INSTRUCTION),
        ("user", f'clue: "{clue_text(clue)}"\nanswer: {answer.upper()} ~ {answer.lower()}'),
    ]


def _problem_statement(clue: str, answer: str, definition: str, wordplay: str) -> str:
    return (f'clue: "{clue_text(clue)}"\ndefinition: {definition}\n'
            f"answer: {answer.upper()}\nwordplay: {wordplay}")


def formalise_messages(clue: str, answer: str, definition: str, wordplay: str,
                       bundle: PromptBundle) -> list[Message]:
    bundle.check()
    prompt = "\n\n".join([
        bundle.context(),
        _problem_statement(clue, answer, definition, wordplay),
        bundle.instruction,
        HANDOVER,
    ])
    return [("user", prompt)]


def rewrite_messages(previous_source: str, feedback: str, bundle: PromptBundle) -> list[Message]:
    bundle.check(rewrite=True)
    parts = [
        bundle.context(),
        f"# SOLUTION:\n```python\n{extract_code(previous_source)}\n```",
        feedback.rstrip(),
    ]
    if bundle.rewrite_instruction not in feedback:
        parts += [bundle.rewrite_instruction, HANDOVER]
    return [("user", "\n\n".join(parts))]


def extract_code(text: str) -> str:
    """Pull the proof function out of a completion.

    Completions often continue the handover stub, so a bare ``"X", clue=...``
    fragment is re-attached to ``def proof(answer=``.
    """
    m = re.search(r"```(?:python|py)?[ \t]*\n(.*?)(?:```|$)", text, re.S)
    body = m.group(1) if m else text
    body = body.strip("\n")
    if "def " not in body.split("\n", 1)[0] and not re.search(r"^\s*def\s", body, re.M):
        body = "def proof(answer=" + body.lstrip()
    return body.rstrip() + "\n"


# -- generation operations ------------------------------------------------------

def _parse_answer(text: str) -> str:
    line = next((ln for ln in text.strip().splitlines() if ln.strip()), "")
    line = re.sub(r"^\s*answer\s*:\s*", "", line, flags=re.I)
    line = line.split("~", 1)[0]
    return " ".join(line.strip().strip("\"'`.").upper().split())


def generate_answers(clue: str, pattern: str, ad: str, n: int, backend: ChatBackend,
                     temperature: float | None = 1.0) -> list[str]:
    if n < 1:
        raise ValueError("n must be at least 1")
    messages = answer_messages(clue, pattern, ad)
    return [_parse_answer(backend.chat(messages, temperature=temperature)) for _ in range(n)]


@dataclass(frozen=True)
class WordplaySuggestion:
    definition: str
    wordplay: str


def parse_wordplay(text: str) -> WordplaySuggestion | None:
    definition = wordplay = None
    for line in text.strip().splitlines():
        s = line.strip()
        if definition is None and s.lower().startswith("definition:"):
            definition = s.split(":", 1)[1].strip()
        elif wordplay is None and s.lower().startswith("wordplay:"):
            wordplay = s.split(":", 1)[1].strip()
    if not definition or not wordplay:
        return None
    return WordplaySuggestion(definition, wordplay)


def generate_wordplays(clue: str, answer: str, k: int, backend: ChatBackend,
                       temperature: float | None = 1.0,
                       retry_budget: int | None = None) -> list[WordplaySuggestion]:
    """Sample ``k`` definition/wordplay pairs.

    Malformed completions are re-sampled, at most ``retry_budget`` times
    (default ``k``). Returns what was collected; raises MalformedResponse only
    if nothing usable came back.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    budget = k if retry_budget is None else retry_budget
    messages = wordplay_messages(clue, answer)
    out: list[WordplaySuggestion] = []
    failures = 0
    while len(out) < k:
        parsed = parse_wordplay(backend.chat(messages, temperature=temperature))
        if parsed is not None:
            out.append(parsed)
            continue
        failures += 1
        if failures > budget:
            break
    if not out:
        raise MalformedResponse(f"no parsable wordplay after {failures} attempts",
                                fingerprint(messages))
    return out


def formalise(clue: str, answer: str, definition: str, wordplay: str, bundle: PromptBundle,
              backend: ChatBackend, temperature: float | None = 0.2) -> str:
    if not wordplay.strip():
        raise ValueError("wordplay must be non-empty")
    return backend.chat(formalise_messages(clue, answer, definition, wordplay, bundle),
                        temperature=temperature)


def rewrite(previous_source: str, feedback: str, bundle: PromptBundle, backend: ChatBackend,
            temperature: float | None = 0.2) -> str:
    return backend.chat(rewrite_messages(previous_source, feedback, bundle), temperature=temperature)


@dataclass
class Gateway:
    """A backend plus the prompt bundle and per-task temperatures."""

    backend: ChatBackend
    bundle: PromptBundle = field(default_factory=PromptBundle.load)
    answer_temperature: float = 1.0
    wordplay_temperature: float = 1.0
    formalise_temperature: float = 0.2

    def answers(self, clue: str, pattern: str, ad: str, n: int,
                temperature: float | None = None) -> list[str]:
        t = self.answer_temperature if temperature is None else temperature
        return generate_answers(clue, pattern, ad, n, self.backend, t)

    def wordplays(self, clue: str, answer: str, k: int) -> list[WordplaySuggestion]:
        return generate_wordplays(clue, answer, k, self.backend, self.wordplay_temperature)

    def formalise(self, clue: str, answer: str, definition: str, wordplay: str) -> str:
        return formalise(clue, answer, definition, wordplay, self.bundle, self.backend,
                         self.formalise_temperature)

    def rewrite(self, previous_source: str, feedback: str) -> str:
        return rewrite(previous_source, feedback, self.bundle, self.backend,
                       self.formalise_temperature)

    def synonym_oracle(self, question: str) -> str:
        return self.backend.chat([("user", question)], temperature=0.0)
