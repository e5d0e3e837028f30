"""Line-by-line proof verification with hints."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .dsl import (
    CallRecord,
    Compare,
    EvalError,
    LintViolation,
    ParseError,
    ProofScript,
    eval_expr,
    lint_proof,
    parse_proof,
    render_expr,
)
from .knowledge import CheckOutcome, KnowledgeBase, NearMiss, compact

REWRITE_INSTRUCTION = (
    "# Please re-implement the SOLUTION above (altering both the docstring and the "
    "python code as required), taking care to fix each of the problems identified, "
    "and return the whole function:"
)
HANDOVER = "```python\ndef proof(answer="


class Status(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    ERROR = "Error"


class Verdict(str, enum.Enum):
    SUCCESS = "Success"
    FAILED = "Failed"


@dataclass(frozen=True)
class AssertionOutcome:
    line: int
    source: str
    status: Status
    hint: str | None = None
    expression: str = ""

    def __post_init__(self):
        if self.status is Status.PASS and self.hint:
            raise ValueError("passing assertions carry no hint")


@dataclass(frozen=True)
class VerificationReport:
    outcomes: tuple[AssertionOutcome, ...]
    lint_violations: tuple[LintViolation, ...] = ()
    parse_error: str | None = None
    verdict: Verdict = field(init=False)

    def __post_init__(self):
        ok = (self.parse_error is None and not self.lint_violations
              and all(o.status is Status.PASS for o in self.outcomes))
        object.__setattr__(self, "verdict", Verdict.SUCCESS if ok else Verdict.FAILED)

    @property
    def success(self) -> bool:
        return self.verdict is Verdict.SUCCESS

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "parse_error": self.parse_error,
            "lint_violations": [
                {"code": v.code, "line": v.line, "message": v.message} for v in self.lint_violations
            ],
            "outcomes": [
                {"line": o.line, "source": o.source, "status": o.status.value, "hint": o.hint}
                for o in self.outcomes
            ],
        }


def _q(text: str) -> str:
    return repr(text)


def _describe_near_miss(record: CallRecord, nm: NearMiss) -> str:
    args = record.args
    if nm.kind == "abbreviation_expansions":
        text = f"{_q(args[0])} does not have a valid abbreviation;"
        if nm.suggestions:
            text += f"\n  {_q(nm.matched_subphrase)} is an abbreviation for : " + ", ".join(nm.suggestions)
        else:
            text += f"\n  {_q(nm.matched_subphrase)} is not a known abbreviation"
        return text
    if nm.kind == "indicator_subphrase":
        return f"{_q(args[0])} does not suggest {args[1]}, but {_q(nm.matched_subphrase)} does"
    if nm.kind == "indicator_other_action":
        return f"{_q(args[0])} does not suggest {args[1]}, but may be " + " or ".join(nm.suggestions)
    if nm.kind == "pattern_mismatch":
        return f"{_q(nm.matched_subphrase)} does not match the pattern {_q(nm.detail)}"
    if nm.kind == "malformed_pattern":
        return nm.detail
    if nm.kind == "synonym_rejected":
        text = f"{_q(args[1])} is not a recognised synonym for {_q(args[0])}"
        if nm.suggestions:
            text += "; same-length synonyms include : " + ", ".join(nm.suggestions)
        return text
    if nm.kind == "oracle_unavailable":
        return f"synonym judgement unavailable ({nm.detail})"
    if nm.kind == "phonetic_mismatch":
        a, b = nm.suggestions
        return f"{_q(args[1])} does not sound like {_q(args[0])} (codes {a} vs {b})"
    if nm.kind == "anagram_letters":
        extra, missing = nm.suggestions
        parts = []
        if extra:
            parts.append(f"has extra letters {extra}")
        if missing:
            parts.append(f"is missing letters {missing}")
        return f"{_q(args[0])} " + " and ".join(parts) + f" to make {_q(args[1])}"
    return nm.kind


def _describe_failure(record: CallRecord) -> str:
    outcome: CheckOutcome = record.outcome
    if outcome.near_misses:
        return "\n  ".join(_describe_near_miss(record, nm) for nm in outcome.near_misses)
    fn, args = record.call.function, record.args
    if fn == "action_type":
        return f"{_q(args[0])} does not suggest {args[1]}"
    if fn == "is_anagram":
        return f"{_q(args[1])} cannot be formed from the letters of {_q(args[0])}"
    if fn == "is_homophone":
        return f"{_q(args[1])} does not sound like {_q(args[0])}"
    return f"{fn}({', '.join(_q(a) if isinstance(a, str) else str(a) for a in args)}) is False"


def _comparison_hints(expr, env, kb) -> list[str]:
    """Explain false ==/!= comparisons by showing both sides."""
    hints = []
    if isinstance(expr, Compare):
        if expr.op == "and":
            hints += _comparison_hints(expr.left, env, kb)
            hints += _comparison_hints(expr.right, env, kb)
        else:
            try:
                left = eval_expr(expr.left, env, kb)
                right = eval_expr(expr.right, env, kb)
            except EvalError:
                return hints
            if (left == right) != (expr.op == "eq"):
                rel = "!=" if expr.op == "eq" else "=="
                hints.append(f"{render_expr(expr.left)} gives {_q(left)}, "
                             f"which {rel} {_q(right)}")
    return hints


def verify(script: ProofScript, kb: KnowledgeBase,
           expected_answer: str | None = None) -> VerificationReport:
    """Evaluate every assert of ``script`` and apply the structural lints.

    No assert short-circuits another: each one is evaluated and reported.
    When ``expected_answer`` is given the proof must be about that answer.
    """
    lints = list(lint_proof(script))
    if expected_answer is not None and compact(script.answer) != compact(expected_answer):
        lints.append(LintViolation(
            "AnswerMismatch", script.line,
            f"the proof is for answer={script.answer!r} but should be for {expected_answer!r}"))
    env = {"answer": script.answer, "clue": script.clue, "pattern": script.pattern}
    outcomes = []
    for stmt in script.asserts:
        expression = render_expr(stmt.expr)
        calls: list[CallRecord] = []
        try:
            value = eval_expr(stmt.expr, env, kb, calls)
        except EvalError as exc:
            outcomes.append(AssertionOutcome(
                stmt.line, stmt.source, Status.ERROR,
                f"line {stmt.line}: {exc.message}", expression))
            continue
        if not isinstance(value, bool):
            outcomes.append(AssertionOutcome(
                stmt.line, stmt.source, Status.ERROR,
                f"line {stmt.line}: the assert evaluates to {type(value).__name__} "
                f"{value!s}, not a boolean claim", expression))
            continue
        if value:
            outcomes.append(AssertionOutcome(stmt.line, stmt.source, Status.PASS, None, expression))
            continue
        hints = [_describe_failure(c) for c in calls if not c.outcome.ok]
        hints += _comparison_hints(stmt.expr, env, kb)
        outcomes.append(AssertionOutcome(
            stmt.line, stmt.source, Status.FAIL,
            "\n  ".join(hints) if hints else f"{expression} is False", expression))
    return VerificationReport(tuple(outcomes), tuple(lints))


def verify_source(source: str, kb: KnowledgeBase,
                  expected_answer: str | None = None) -> tuple[ProofScript | None, VerificationReport]:
    """Parse then verify; parse failures become a Failed report."""
    try:
        script = parse_proof(source)
    except ParseError as exc:
        lints = ()
        if exc.code in ("NoProofFunction", "ControlFlow"):
            lints = (LintViolation(exc.code, exc.line, exc.message),)
        return None, VerificationReport((), lints, parse_error=str(exc))
    return script, verify(script, kb, expected_answer)


def render_feedback(report: VerificationReport, instruction: str = REWRITE_INSTRUCTION) -> str:
    """Render failures as ``AssertionError`` blocks followed by the rewrite request."""
    blocks = []
    if report.parse_error and not report.lint_violations:
        blocks.append(f"SyntaxError: {report.parse_error}")
    for v in report.lint_violations:
        where = f"line {v.line}: " if v.line else ""
        blocks.append(f"LintError: {v.code}: {where}{v.message}")
    for o in report.outcomes:
        if o.status is Status.PASS:
            continue
        blocks.append(f"AssertionError: assert {o.expression or o.source} :\n  {o.hint}")
    return "\n".join(blocks) + f"\n\n{instruction}\n\n{HANDOVER}"


__all__ = [
    "AssertionOutcome", "Status", "Verdict", "VerificationReport",
    "render_feedback", "verify", "verify_source",
]
