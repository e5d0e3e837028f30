"""Build fingerprint-keyed fixtures for the scripted backend."""

from __future__ import annotations

import json
from pathlib import Path

from crypticproof.gateway import (
    PromptBundle,
    ScriptedBackend,
    answer_messages,
    extract_code,
    fingerprint,
    formalise_messages,
    rewrite_messages,
    wordplay_messages,
)
from crypticproof.knowledge import KnowledgeBase
from crypticproof.verifier import REWRITE_INSTRUCTION, render_feedback, verify_source

FIXTURES = Path(__file__).parent / "fixtures"


def golden(name: str) -> str:
    return (FIXTURES / "proofs" / f"{name}.proof").read_text(encoding="utf-8")


class FixtureBook:
    """Collects ``{match, response}`` entries keyed by request fingerprint.

    Rewrite entries are keyed on the exact feedback the verifier will produce
    for the previous attempt, so the book needs the same KB and prompts as
    the run it scripts.
    """

    def __init__(self, kb: KnowledgeBase, bundle: PromptBundle | None = None):
        self.kb = kb
        self.bundle = bundle or PromptBundle.load()
        self.entries: list[dict] = []

    def add(self, messages, response: str, tag: str = "") -> None:
        self.entries.append({"match": fingerprint(messages), "response": response, "tag": tag})

    def answers(self, clue, pattern, ad, responses):
        for r in responses:
            self.add(answer_messages(clue, pattern, ad), r, "answer")

    def wordplays(self, clue, answer, pairs):
        for d, w in pairs:
            self.add(wordplay_messages(clue, answer), f"definition: {d}\nwordplay: {w}", "wordplay")

    def formalise(self, clue, answer, definition, wordplay, response, tag="formalise"):
        self.add(formalise_messages(clue, answer, definition, wordplay, self.bundle), response, tag)

    def rewrite(self, previous: str, answer: str, response: str, tag="rewrite"):
        _, report = verify_source(extract_code(previous), self.kb, expected_answer=answer)
        assert not report.success, "rewrites only follow failed attempts"
        feedback = render_feedback(report, self.bundle.rewrite_instruction or REWRITE_INSTRUCTION)
        self.add(rewrite_messages(previous, feedback, self.bundle), response, tag)

    def without(self, tag: str) -> FixtureBook:
        other = FixtureBook(self.kb, self.bundle)
        other.entries = [e for e in self.entries if e["tag"] != tag]
        return other

    def backend(self) -> ScriptedBackend:
        return ScriptedBackend([(e["match"], e["response"]) for e in self.entries])

    def dump(self, path: Path) -> Path:
        path.write_text(json.dumps(self.entries, indent=1), encoding="utf-8")
        return path


HERON_CLUE = "wader woman has on (5)"

HERON_PROOF = '''```python
def proof(answer="HERON", clue="wader woman has on", pattern='5'):
  """
  definition: {wader} woman has on
  wordplay: woman (HER) has on (ON)
  """
  assert is_synonym("woman", "HER")
  assert "HER"+"ON"=="HERON"
  assert is_synonym("wader", "HERON", pattern='5')
proof()
```'''

EGRET_PROOF_A = '''```python
def proof(answer="EGRET", clue="wader woman has on", pattern='5'):
  """
  definition: {wader} woman has on
  wordplay: (GREET)* (has on = anagram)
  """
  assert action_type("has on", Action.ANAGRAM)
  assert is_anagram("GREET", "EGRET")
  assert is_synonym("wader", "EGRET", pattern='5')
proof()
```'''

EGRET_PROOF_B = '''```python
def proof(answer="EGRET", clue="wader woman has on", pattern='5'):
  """
  definition: {wader} woman has on
  wordplay: E (woman) + GRET (has on)
  """
  assert is_abbreviation("woman", "E")
  assert "E"+"GRET"=="EGRET"
  assert is_synonym("wader", "EGRET", pattern='5')
proof()
```'''

EGRET_WORDPLAYS = [
    ("{wader} woman has on", "(GREET)* (has on = anagram)"),
    ("{wader} woman has on", "E (woman) + GRET (has on)"),
]
HERON_WORDPLAYS = [("{wader} woman has on", "woman (HER) has on (ON)")]
OTHERS = ["STORK", "CRANE", "SNIPE", "RAVEN", "REGAL"]


def heron_book(kb: KnowledgeBase, bundle: PromptBundle | None = None) -> FixtureBook:
    """EGRET 9/20, HERON 6/20, five singletons; only HERON has a passing proof."""
    book = FixtureBook(kb, bundle)
    book.answers(HERON_CLUE, "5", "A", ["EGRET"] * 9 + ["HERON"] * 6 + OTHERS)
    # ten samples per candidate, with repeats that the pipeline deduplicates
    book.wordplays(HERON_CLUE, "EGRET", EGRET_WORDPLAYS * 5)
    book.wordplays(HERON_CLUE, "HERON", HERON_WORDPLAYS * 10)
    for (d, w), bad in zip(EGRET_WORDPLAYS, (EGRET_PROOF_A, EGRET_PROOF_B)):
        book.formalise(HERON_CLUE, "EGRET", d, w, bad)
        book.rewrite(bad, "EGRET", bad)
        book.rewrite(bad, "EGRET", bad)
    d, w = HERON_WORDPLAYS[0]
    book.formalise(HERON_CLUE, "HERON", d, w, HERON_PROOF, tag="heron-pass")
    return book
