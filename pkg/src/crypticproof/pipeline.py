"""Solve one clue: candidates, wordplay, formalisation, verification, rewrites."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING

from .dsl import ProofScript
from .gateway import Gateway, GatewayError, extract_code
from .knowledge import KnowledgeBase, matches_pattern, normalise_answer
from .verifier import REWRITE_INSTRUCTION, render_feedback, verify_source

if TYPE_CHECKING:
    from .evalharness import LetterMask

log = logging.getLogger(__name__)


class EmptyCandidateSet(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    num_answer_candidates: int = 20
    wordplays_per_candidate: int = 10
    max_rewrites: int = 2
    answer_temperature: float = 1.0
    regeneration_budget: int | None = None
    candidate_order: str = "ByFrequencyDesc"

    def __post_init__(self):
        if self.regeneration_budget is None:
            self.regeneration_budget = 3 * self.num_answer_candidates
        if self.num_answer_candidates < 1 or self.wordplays_per_candidate < 1:
            raise ValueError("candidate and wordplay counts must be >= 1")
        if self.regeneration_budget < 0 or self.max_rewrites < 0:
            raise ValueError("max_rewrites and regeneration_budget must be >= 0")
        if self.candidate_order != "ByFrequencyDesc":
            raise ValueError(f"unsupported candidate_order {self.candidate_order!r}")


@dataclass(frozen=True)
class CandidateSet:
    counts: dict[str, int]
    attempts: int = 0

    @property
    def order(self) -> list[str]:
        return sorted(self.counts, key=lambda a: (-self.counts[a], a))

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, answer: str) -> bool:
        return answer in self.counts


def select_fallback(candidates: CandidateSet) -> str:
    """Most frequent candidate; ties go to the alphabetically first."""
    if not candidates.counts:
        raise EmptyCandidateSet("no candidates to fall back on")
    return candidates.order[0]


def build_candidates(clue: str, pattern: str, ad: str, cfg: PipelineConfig,
                     kb: KnowledgeBase, gateway: Gateway) -> CandidateSet:
    """Sample answers, resampling pattern misfits and dropping non-words."""
    target = cfg.num_answer_candidates
    cap = target + cfg.regeneration_budget
    counts: Counter[str] = Counter()
    valid = attempts = 0
    while valid < target and attempts < cap:
        batch = min(target - valid, cap - attempts)
        for raw in gateway.answers(clue, pattern, ad, batch, cfg.answer_temperature):
            attempts += 1
            answer = normalise_answer(raw)
            if not matches_pattern(answer, pattern):
                continue
            valid += 1
            if kb.known_word(answer):
                counts[answer] += 1
    if not counts:
        raise EmptyCandidateSet(f"no dictionary-valid candidates for {clue!r}")
    return CandidateSet(dict(counts), attempts)


@dataclass
class TraceRecord:
    candidate: str
    definition: str | None = None
    wordplay: str | None = None
    attempt: int | None = None  # 0 = first formalisation, n = n-th rewrite
    verdict: str | None = None
    hints: list[str] = field(default_factory=list)
    error: str | None = None


@dataclass
class SolveResult:
    answer: str
    proven: bool
    proof: ProofScript | None = None
    proof_source: str | None = None
    trace: list[TraceRecord] = field(default_factory=list)
    candidates: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.proven and self.proof is None:
            raise ValueError("a proven result needs its proof")

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r), ensure_ascii=False, sort_keys=True) + "\n"
                       for r in self.trace)

    def to_dict(self) -> dict:
        return {
            "answer": self.answer,
            "proven": self.proven,
            "proof": self.proof_source,
            "candidates": self.candidates,
            "trace": [asdict(r) for r in self.trace],
        }


def _hints(report) -> list[str]:
    out = []
    if report.parse_error:
        out.append(report.parse_error)
    out += [f"{v.code}: {v.message}" for v in report.lint_violations]
    out += [f"line {o.line}: {o.hint}" for o in report.outcomes if o.hint]
    return out


def prove_wordplay(clue: str, candidate: str, definition: str, wordplay: str,
                   cfg: PipelineConfig, kb: KnowledgeBase, gateway: Gateway,
                   trace: list[TraceRecord]) -> tuple[ProofScript, str] | None:
    """Formalise one wordplay and run the verify/rewrite loop.

    At most ``1 + cfg.max_rewrites`` formalisations are requested.
    """
    record = dict(candidate=candidate, definition=definition, wordplay=wordplay)
    source = None
    for attempt in range(cfg.max_rewrites + 1):
        try:
            if attempt == 0:
                source = gateway.formalise(clue, candidate, definition, wordplay)
            else:
                source = gateway.rewrite(source, feedback)
        except GatewayError as exc:
            trace.append(TraceRecord(**record, attempt=attempt, error=f"{type(exc).__name__}: {exc}"))
            return None
        code = extract_code(source)
        script, report = verify_source(code, kb, expected_answer=candidate)
        trace.append(TraceRecord(**record, attempt=attempt, verdict=report.verdict.value,
                                 hints=_hints(report)))
        if report.success:
            return script, code
        feedback = render_feedback(report, gateway.bundle.rewrite_instruction or REWRITE_INSTRUCTION)
    return None


def solve_clue(clue: str, pattern: str, ad: str, cfg: PipelineConfig, kb: KnowledgeBase,
               gateway: Gateway, mask: LetterMask | None = None) -> SolveResult:
    """Return the first proven candidate in frequency order, else the fallback.

    With a ``mask``, candidates inconsistent with the known letters are
    dropped first; if none survive, the unfiltered fallback is returned.
    """
    candidates = build_candidates(clue, pattern, ad, cfg, kb, gateway)
    trace: list[TraceRecord] = []
    pool = candidates
    if mask is not None:
        from .evalharness import filter_by_mask

        pool = filter_by_mask(candidates, mask)
        if not pool.counts:
            trace.append(TraceRecord(candidate="", error="mask rejected every candidate"))
            return SolveResult(select_fallback(candidates), False, trace=trace,
                               candidates=candidates.counts)

    for candidate in pool.order:
        try:
            suggestions = gateway.wordplays(clue, candidate, cfg.wordplays_per_candidate)
        except GatewayError as exc:
            trace.append(TraceRecord(candidate, error=f"{type(exc).__name__}: {exc}"))
            continue
        seen = set()
        for s in suggestions:
            if (s.definition, s.wordplay) in seen:
                continue
            seen.add((s.definition, s.wordplay))
            proved = prove_wordplay(clue, candidate, s.definition, s.wordplay, cfg, kb, gateway, trace)
            if proved is not None:
                script, code = proved
                return SolveResult(candidate, True, script, code, trace, candidates.counts)
    return SolveResult(select_fallback(pool), False, trace=trace, candidates=candidates.counts)


def proof_holds(result: SolveResult, kb: KnowledgeBase) -> bool:
    """Re-verify a returned proof from its source."""
    if not result.proven or result.proof_source is None:
        return False
    _, report = verify_source(result.proof_source, kb, expected_answer=result.answer)
    return report.success
