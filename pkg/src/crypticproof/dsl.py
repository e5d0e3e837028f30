"""Parser, linter, evaluator and renderer for assert-based proof scripts.

A proof script is a single Python-style function::

    def proof(answer="DECIMAL", clue="the point of medical treatment", pattern='7'):
      \"\"\"
      definition: {the point} of medical treatment
      wordplay: (MEDICAL)* (*treatment = anagram)
      \"\"\"
      assert is_synonym("the point", "DECIMAL", pattern='7')
      assert action_type("treatment", Action.ANAGRAM)
      assert is_anagram("MEDICAL", "DECIMAL")
    proof()

Only a closed subset of Python is accepted: string/int/bool literals, ``+``
on strings, slicing, ``==``/``!=``, ``and``, calls to the check functions,
``Action`` members and the three proof parameters. Tokenising is done by the
standard :mod:`tokenize` module; everything above the token level is parsed
here so that unsupported constructs are rejected rather than executed.
"""

from __future__ import annotations

import ast
import inspect
import io
import re
import token
import tokenize
import warnings
from dataclasses import dataclass, field
from typing import Union

from .knowledge import Action, CheckOutcome, KnowledgeBase, normalise_answer

CHECK_FUNCTIONS = ("is_synonym", "is_abbreviation", "action_type", "is_anagram", "is_homophone")
PARAMETERS = ("answer", "clue", "pattern")

_CONTROL_KEYWORDS = {"if", "elif", "else", "for", "while", "try", "except", "finally",
                     "with", "match", "case", "async", "await"}
_UNSUPPORTED_KEYWORDS = {"return", "def", "class", "lambda", "yield", "raise", "global",
                         "nonlocal", "del", "or", "not", "in", "is", "None", "break", "continue"}


# -- expression tree ------------------------------------------------------

@dataclass(frozen=True)
class StrLit:
    text: str


@dataclass(frozen=True)
class IntLit:
    n: int


@dataclass(frozen=True)
class BoolLit:
    b: bool


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class EnumRef:
    action: Action


@dataclass(frozen=True)
class Call:
    function: str
    args: tuple[Expr, ...] = ()
    kwargs: tuple[tuple[str, Expr], ...] = ()


@dataclass(frozen=True)
class Concat:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Slice:
    target: Expr
    lo: int | None = None
    hi: int | None = None
    step: int | None = None


@dataclass(frozen=True)
class Compare:
    op: str  # "eq" | "neq" | "and"
    left: Expr
    right: Expr


Expr = Union[StrLit, IntLit, BoolLit, Ident, EnumRef, Call, Concat, Slice, Compare]
Value = Union[str, int, bool, Action]


@dataclass(frozen=True)
class Statement:
    kind: str  # "assert" | "call"
    expr: Expr
    line: int = field(default=0, compare=False)
    source: str = field(default="", compare=False)


@dataclass(frozen=True)
class ProofScript:
    answer: str
    clue: str
    pattern: str
    definition_annotation: str = ""
    wordplay_annotation: str = ""
    statements: tuple[Statement, ...] = ()
    line: int = field(default=1, compare=False)
    name: str = field(default="proof", compare=False)

    @property
    def asserts(self) -> tuple[Statement, ...]:
        return tuple(s for s in self.statements if s.kind == "assert")


class ParseError(Exception):
    """Malformed or out-of-grammar proof source.

    ``code`` is ``"NoProofFunction"`` or ``"ControlFlow"`` when the problem
    corresponds to a lint rule, otherwise ``"Syntax"``.
    """

    def __init__(self, message: str, line: int = 0, col: int = 0, code: str = "Syntax"):
        super().__init__(f"line {line}:{col}: {message}" if line else message)
        self.message = message
        self.line = line
        self.col = col
        self.code = code


class EvalError(Exception):
    def __init__(self, message: str, line: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line


# -- lexing -----------------------------------------------------------------

_FENCE = re.compile(r"^\s*```")
_SKIP = {tokenize.COMMENT, tokenize.NL, tokenize.ENCODING}


def _strip_fences(source: str) -> str:
    # keep line numbering stable by blanking fence lines rather than removing them
    return "\n".join("" if _FENCE.match(ln) else ln for ln in source.split("\n"))


def _tokens(source: str) -> list[tokenize.TokenInfo]:
    try:
        toks = list(tokenize.generate_tokens(io.StringIO(source).readline))
    except tokenize.TokenError as exc:
        msg, (line, col) = exc.args
        raise ParseError(msg, line, col) from None
    except IndentationError as exc:
        raise ParseError(exc.msg, exc.lineno or 0, exc.offset or 0) from None
    out = []
    for tok in toks:
        if tok.type in _SKIP:
            continue
        if tok.type == tokenize.ERRORTOKEN and not tok.string.isspace():
            raise ParseError(f"unexpected character {tok.string!r}", *tok.start)
        if tok.type == tokenize.ERRORTOKEN:
            continue
        out.append(tok)
    return out


def _string_value(tok: tokenize.TokenInfo) -> str:
    prefix = re.match(r"[A-Za-z]*", tok.string).group(0).lower()
    if "b" in prefix or "f" in prefix:
        raise ParseError(f"unsupported string prefix {prefix!r}", *tok.start)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return ast.literal_eval(tok.string)
        except (SyntaxError, ValueError) as exc:
            raise ParseError(f"bad string literal: {exc}", *tok.start) from None


# -- parsing ----------------------------------------------------------------

class _Parser:
    def __init__(self, toks: list[tokenize.TokenInfo], lines: list[str]):
        self.toks = toks
        self.lines = lines
        self.i = 0

    @property
    def tok(self) -> tokenize.TokenInfo:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> tokenize.TokenInfo:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, string: str) -> bool:
        return self.tok.string == string and self.tok.type in (token.OP, token.NAME)

    def advance(self) -> tokenize.TokenInfo:
        tok = self.tok
        self.i += 1
        return tok

    def fail(self, message: str, tok: tokenize.TokenInfo | None = None, code: str = "Syntax"):
        tok = tok or self.tok
        raise ParseError(message, tok.start[0], tok.start[1], code)

    def expect(self, string: str) -> tokenize.TokenInfo:
        if not self.at(string):
            self.fail(f"expected {string!r}, found {self.tok.string or token.tok_name[self.tok.type]!r}")
        return self.advance()

    def expect_type(self, type_: int) -> tokenize.TokenInfo:
        if self.tok.type != type_:
            self.fail(f"expected {token.tok_name[type_]}, found {self.tok.string!r}")
        return self.advance()

    # module level

    def parse_module(self) -> ProofScript:
        script = None
        while self.tok.type != token.ENDMARKER:
            if self.tok.type == token.NEWLINE:
                self.advance()
            elif self.at("def") and script is None:
                script = self.parse_function()
            elif script is not None and self.tok.type == token.NAME and self.tok.string == script.name:
                self.parse_trailing_call(script.name)
            elif self.tok.type == token.NAME and self.tok.string in ("import", "from"):
                self.fail("imports are not allowed")
            elif script is None:
                self.fail("no proof function found", code="NoProofFunction")
            else:
                self.fail(f"unexpected {self.tok.string!r} after the proof function")
        if script is None:
            raise ParseError("no proof function found", code="NoProofFunction")
        return script

    def parse_trailing_call(self, name: str):
        self.advance()
        self.expect("(")
        self.expect(")")
        if self.tok.type not in (token.NEWLINE, token.ENDMARKER):
            self.fail("unexpected tokens after trailing call")

    def parse_function(self) -> ProofScript:
        def_tok = self.expect("def")
        name = self.expect_type(token.NAME).string
        self.expect("(")
        params: dict[str, str] = {}
        while not self.at(")"):
            pname_tok = self.expect_type(token.NAME)
            if self.at(":"):
                self.advance()
                self.expect_type(token.NAME)
            if not self.at("="):
                self.fail(f"parameter {pname_tok.string!r} needs a default value",
                          pname_tok, code="NoProofFunction")
            self.advance()
            value_tok = self.tok
            if value_tok.type == token.STRING:
                params[pname_tok.string] = _string_value(self.advance())
            elif value_tok.type == token.NUMBER and pname_tok.string == "pattern":
                params[pname_tok.string] = self.advance().string
            else:
                self.fail(f"the default for {pname_tok.string!r} must be a string literal", value_tok)
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        if self.at("->"):
            self.advance()
            self.expect_type(token.NAME)
        self.expect(":")
        missing = [p for p in PARAMETERS if p not in params]
        if missing:
            self.fail(f"proof function lacks keyword defaults for {', '.join(missing)}",
                      def_tok, code="NoProofFunction")
        extra = [p for p in params if p not in PARAMETERS]
        if extra:
            self.fail(f"unexpected parameters {', '.join(extra)}", def_tok)

        answer = normalise_answer(params["answer"])
        if not answer or not re.fullmatch(r"[A-Z][A-Z \-]*", answer):
            self.fail(f"answer {params['answer']!r} must consist of letters, spaces and hyphens",
                      def_tok)

        docstring, statements = self.parse_body()
        definition, wordplay = _split_docstring(docstring)
        return ProofScript(
            answer=answer,
            clue=params["clue"].lower(),
            pattern=params["pattern"],
            definition_annotation=definition,
            wordplay_annotation=wordplay,
            statements=tuple(statements),
            line=def_tok.start[0],
            name=name,
        )

    def parse_body(self) -> tuple[str, list[Statement]]:
        docstring = ""
        statements: list[Statement] = []
        if self.tok.type != token.NEWLINE:
            # one-line body: def proof(...): assert x
            self.parse_statement(statements, first=False)
            return docstring, statements
        self.advance()
        if self.tok.type != token.INDENT:
            return docstring, statements  # empty body, e.g. only comments
        self.advance()
        first = True
        while self.tok.type not in (token.DEDENT, token.ENDMARKER):
            if self.tok.type == token.NEWLINE:
                self.advance()
                continue
            if first and self.tok.type == token.STRING and self.peek().type == token.NEWLINE:
                docstring = _string_value(self.advance())
            else:
                self.parse_statement(statements, first)
            first = False
        if self.tok.type == token.DEDENT:
            self.advance()
        return docstring, statements

    def parse_statement(self, statements: list[Statement], first: bool):
        start = self.tok
        word = start.string if start.type == token.NAME else ""
        if word in _CONTROL_KEYWORDS:
            self.fail(f"control flow ('{word}') is not allowed in a proof", code="ControlFlow")
        if word in ("import", "from"):
            self.fail("imports are not allowed in a proof")
        if word == "pass":
            self.advance()
        elif word == "assert":
            self.advance()
            expr = self.parse_expr()
            if self.at(","):  # assertion message, ignored
                self.advance()
                self.parse_expr()
            statements.append(self._statement("assert", expr, start))
        elif self.tok.type == token.STRING and self.peek().type == token.NEWLINE:
            self.advance()  # stray string literal, treated like a comment
        else:
            if word in _UNSUPPORTED_KEYWORDS:
                self.fail(f"'{word}' is not allowed in a proof")
            if start.type == token.NAME and self.peek().string in ("=", "+=", "-=", ":"):
                self.fail("assignments are not allowed in a proof")
            expr = self.parse_expr()
            if self.at("=") or (self.tok.type == token.OP and self.tok.string.endswith("=")
                                and self.tok.string not in ("==", "!=")):
                self.fail("assignments are not allowed in a proof")
            if not isinstance(expr, Call):
                self.fail("only assert statements and function calls are allowed", start)
            statements.append(self._statement("call", expr, start))
        if self.at(";"):
            self.fail("';' statement separators are not supported")
        if self.tok.type not in (token.NEWLINE, token.ENDMARKER, token.DEDENT):
            self.fail(f"unexpected {self.tok.string!r}")

    def _statement(self, kind: str, expr: Expr, start: tokenize.TokenInfo) -> Statement:
        end_line = self.toks[self.i - 1].end[0]
        text = "\n".join(ln.rstrip() for ln in self.lines[start.start[0] - 1:end_line])
        return Statement(kind, expr, start.start[0], _dedent(text))

    # expressions, lowest precedence first

    def parse_expr(self) -> Expr:
        left = self.parse_comparison()
        while self.at("and"):
            self.advance()
            left = Compare("and", left, self.parse_comparison())
        if self.tok.type == token.NAME and self.tok.string in ("or", "if", "in", "is", "not"):
            self.fail(f"'{self.tok.string}' is not supported in proof expressions")
        return left

    def parse_comparison(self) -> Expr:
        if self.at("not"):
            self.fail("'not' is not supported in proof expressions")
        left = self.parse_sum()
        if self.at("==") or self.at("!="):
            op = "eq" if self.advance().string == "==" else "neq"
            left = Compare(op, left, self.parse_sum())
            if self.at("==") or self.at("!="):
                self.fail("chained comparisons are not supported")
        elif self.tok.type == token.OP and self.tok.string in ("<", ">", "<=", ">="):
            self.fail(f"operator {self.tok.string!r} is not supported")
        return left

    def parse_sum(self) -> Expr:
        left = self.parse_postfix()
        while self.at("+"):
            self.advance()
            left = Concat(left, self.parse_postfix())
        if self.tok.type == token.OP and self.tok.string in ("-", "*", "/", "//", "%", "**", "|", "&"):
            self.fail(f"operator {self.tok.string!r} is not supported")
        return left

    def parse_postfix(self) -> Expr:
        expr = self.parse_atom()
        while True:
            if self.at("["):
                expr = self.parse_subscript(expr)
            elif self.at("(") and isinstance(expr, Ident):
                expr = self.parse_call(expr.name)
            elif self.at(".") or self.at("("):
                self.fail("attribute access and method calls are not supported")
            else:
                return expr

    def parse_subscript(self, target: Expr) -> Slice:
        open_tok = self.expect("[")
        bounds: list[int | None] = [None]
        colons = 0
        while not self.at("]"):
            if self.at(":"):
                self.advance()
                colons += 1
                bounds.append(None)
                if colons > 2:
                    self.fail("too many ':' in slice")
            else:
                if bounds[-1] is not None:
                    self.fail("malformed slice")
                bounds[-1] = self.parse_signed_int()
        self.expect("]")
        if colons == 0:
            self.fail("indexing is not supported; use a slice such as [i:i+1]", open_tok)
        lo, hi, *rest = bounds
        step = rest[0] if rest else None
        if step == 0:
            self.fail("slice step cannot be zero", open_tok)
        return Slice(target, lo, hi, step)

    def parse_signed_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        tok = self.tok
        if tok.type != token.NUMBER or not tok.string.isdigit():
            self.fail("slice bounds must be integer literals")
        self.advance()
        return sign * int(tok.string)

    def parse_call(self, name: str) -> Call:
        self.expect("(")
        args: list[Expr] = []
        kwargs: list[tuple[str, Expr]] = []
        while not self.at(")"):
            if self.tok.type == token.NAME and self.peek().string == "=":
                key = self.advance().string
                self.advance()
                kwargs.append((key, self.parse_expr()))
            else:
                if kwargs:
                    self.fail("positional argument follows keyword argument")
                args.append(self.parse_expr())
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return Call(name, tuple(args), tuple(kwargs))

    def parse_atom(self) -> Expr:
        tok = self.tok
        if tok.type == token.STRING:
            text = _string_value(self.advance())
            while self.tok.type == token.STRING:  # implicit concatenation
                text += _string_value(self.advance())
            return StrLit(text)
        if tok.type == token.NUMBER:
            if not tok.string.isdigit():
                self.fail(f"unsupported number {tok.string!r}")
            self.advance()
            return IntLit(int(tok.string))
        if tok.type == token.NAME:
            if tok.string in ("True", "False"):
                self.advance()
                return BoolLit(tok.string == "True")
            if tok.string == "Action":
                self.advance()
                self.expect(".")
                member = self.expect_type(token.NAME)
                try:
                    return EnumRef(Action[member.string])
                except KeyError:
                    self.fail(f"unknown Action member {member.string!r}; expected one of "
                              + ", ".join(a.name for a in Action), member)
            if tok.string in _CONTROL_KEYWORDS or tok.string in _UNSUPPORTED_KEYWORDS:
                self.fail(f"'{tok.string}' is not supported in proof expressions")
            self.advance()
            return Ident(tok.string)
        if self.at("("):
            self.advance()
            inner = self.parse_expr()
            if self.at(","):
                self.fail("tuples are not supported")
            self.expect(")")
            return inner
        if self.at("-"):
            self.fail("negative numbers are only allowed as slice bounds")
        self.fail(f"unexpected {tok.string or token.tok_name[tok.type]!r}")


def _dedent(text: str) -> str:
    lines = text.split("\n")
    indents = [len(ln) - len(ln.lstrip()) for ln in lines if ln.strip()]
    cut = min(indents) if indents else 0
    return "\n".join(ln[cut:] for ln in lines).strip()


def _split_docstring(doc: str) -> tuple[str, str]:
    definition = wordplay = ""
    for line in doc.splitlines():
        s = line.strip()
        if not definition and s.lower().startswith("definition:"):
            definition = s[len("definition:"):].strip()
        elif not wordplay and s.lower().startswith("wordplay:"):
            wordplay = s[len("wordplay:"):].strip()
    return definition, wordplay


def parse_proof(source: str) -> ProofScript:
    """Parse proof source text, tolerating code fences and a trailing call."""
    text = _strip_fences(source.replace("\r\n", "\n"))
    if not text.strip():
        raise ParseError("no proof function found", code="NoProofFunction")
    if not text.endswith("\n"):
        text += "\n"
    return _Parser(_tokens(text), text.split("\n")).parse_module()


# -- lints ------------------------------------------------------------------

LINT_CODES = ("TooFewAsserts", "ControlFlow", "BooleanLiteralComparison",
              "UnknownFunction", "NoProofFunction")
MIN_ASSERTS = 2


@dataclass(frozen=True)
class LintViolation:
    code: str
    line: int
    message: str


def walk(expr: Expr):
    yield expr
    if isinstance(expr, Call):
        for a in expr.args:
            yield from walk(a)
        for _, a in expr.kwargs:
            yield from walk(a)
    elif isinstance(expr, (Concat, Compare)):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Slice):
        yield from walk(expr.target)


def lint_proof(script: ProofScript) -> list[LintViolation]:
    """Return every structural violation in ``script`` (empty when clean)."""
    violations = []
    n = len(script.asserts)
    if n < MIN_ASSERTS:
        violations.append(LintViolation(
            "TooFewAsserts", script.line,
            f"the proof has {n} assert statement{'s' * (n != 1)}; at least {MIN_ASSERTS} are required"))
    for stmt in script.statements:
        for node in walk(stmt.expr):
            if (isinstance(node, Compare) and node.op in ("eq", "neq")
                    and (isinstance(node.left, BoolLit) or isinstance(node.right, BoolLit))):
                violations.append(LintViolation(
                    "BooleanLiteralComparison", stmt.line,
                    "comparing against True/False does not prove anything; "
                    "assert the claim itself"))
            elif isinstance(node, Call) and node.function not in CHECK_FUNCTIONS:
                violations.append(LintViolation(
                    "UnknownFunction", stmt.line,
                    f"'{node.function}' is not an available function; use one of "
                    + ", ".join(CHECK_FUNCTIONS)))
    return violations


# -- evaluation -------------------------------------------------------------

def _check_is_synonym(phrase, test_synonym, pattern=""): ...
def _check_is_abbreviation(phrase, test_abbreviation): ...
def _check_action_type(phrase, action): ...
def _check_is_anagram(letters, word): ...
def _check_is_homophone(phrase, test_homophone): ...


_SIGNATURES = {
    "is_synonym": _check_is_synonym,
    "is_abbreviation": _check_is_abbreviation,
    "action_type": _check_action_type,
    "is_anagram": _check_is_anagram,
    "is_homophone": _check_is_homophone,
}


@dataclass(frozen=True)
class CallRecord:
    call: Call
    args: tuple[Value, ...]
    outcome: CheckOutcome


def _type_name(v: Value) -> str:
    return "Action" if isinstance(v, Action) else type(v).__name__


def eval_expr(expr: Expr, env: dict[str, str], kb: KnowledgeBase,
              calls: list[CallRecord] | None = None) -> Value:
    """Evaluate ``expr``; check-function calls are appended to ``calls``.

    Both sides of ``and`` are always evaluated so that every failing check
    in an assert is reported.
    """
    if isinstance(expr, (StrLit, IntLit, BoolLit)):
        return expr.text if isinstance(expr, StrLit) else expr.n if isinstance(expr, IntLit) else expr.b
    if isinstance(expr, Ident):
        if expr.name not in PARAMETERS or expr.name not in env:
            raise EvalError(f"unknown identifier '{expr.name}'")
        return env[expr.name]
    if isinstance(expr, EnumRef):
        return expr.action
    if isinstance(expr, Concat):
        left = eval_expr(expr.left, env, kb, calls)
        right = eval_expr(expr.right, env, kb, calls)
        if not (isinstance(left, str) and isinstance(right, str)):
            raise EvalError(f"'+' needs two strings, got {_type_name(left)} and {_type_name(right)}")
        return left + right
    if isinstance(expr, Slice):
        target = eval_expr(expr.target, env, kb, calls)
        if not isinstance(target, str):
            raise EvalError(f"only strings can be sliced, got {_type_name(target)}")
        for bound in (expr.lo, expr.hi):
            if bound is not None and abs(bound) > len(target):
                raise EvalError(f"slice bound {bound} is out of range for {target!r}")
        return target[expr.lo:expr.hi:expr.step]
    if isinstance(expr, Compare):
        left = eval_expr(expr.left, env, kb, calls)
        right = eval_expr(expr.right, env, kb, calls)
        if expr.op == "and":
            if not (isinstance(left, bool) and isinstance(right, bool)):
                raise EvalError("'and' needs boolean operands")
            return left and right
        # bool == bool would let check results be compared rather than asserted
        if isinstance(left, (bool, Action)) or type(left) is not type(right):
            raise EvalError(f"cannot compare {_type_name(left)} with {_type_name(right)}")
        return (left == right) if expr.op == "eq" else (left != right)
    if isinstance(expr, Call):
        return _eval_call(expr, env, kb, calls)
    raise EvalError(f"unsupported expression {expr!r}")


def _eval_call(expr: Call, env, kb: KnowledgeBase, calls) -> bool:
    if expr.function not in _SIGNATURES:
        raise EvalError(f"unknown function '{expr.function}'")
    args = tuple(eval_expr(a, env, kb, calls) for a in expr.args)
    kwargs = {k: eval_expr(v, env, kb, calls) for k, v in expr.kwargs}
    try:
        bound = inspect.signature(_SIGNATURES[expr.function]).bind(*args, **kwargs)
    except TypeError as exc:
        raise EvalError(f"{expr.function}(): {exc}") from None
    values = list(bound.arguments.values())
    for name, v in bound.arguments.items():
        want = Action if name == "action" else str
        if not isinstance(v, want) or isinstance(v, bool):
            raise EvalError(f"{expr.function}(): '{name}' must be {want.__name__}, got {_type_name(v)}")
        if want is str and name != "pattern" and not v.strip():
            raise EvalError(f"{expr.function}(): '{name}' must not be empty")
    outcome: CheckOutcome = getattr(kb, expr.function)(*values)
    if calls is not None:
        calls.append(CallRecord(expr, tuple(values), outcome))
    return outcome.ok


# -- rendering --------------------------------------------------------------

_PRECEDENCE = {"and": 1, "eq": 2, "neq": 2}


def render_expr(expr: Expr, parent: int = 0) -> str:
    """Canonical source for ``expr``; strings use repr() quoting."""
    if isinstance(expr, StrLit):
        return repr(expr.text)
    if isinstance(expr, IntLit):
        return str(expr.n)
    if isinstance(expr, BoolLit):
        return str(expr.b)
    if isinstance(expr, Ident):
        return expr.name
    if isinstance(expr, EnumRef):
        return str(expr.action)
    if isinstance(expr, Call):
        parts = [render_expr(a) for a in expr.args]
        parts += [f"{k}={render_expr(v)}" for k, v in expr.kwargs]
        return f"{expr.function}({', '.join(parts)})"
    if isinstance(expr, Concat):
        text = f"{render_expr(expr.left, 3)}+{render_expr(expr.right, 4)}"
        return f"({text})" if parent > 3 else text
    if isinstance(expr, Slice):
        bounds = ["" if b is None else str(b) for b in (expr.lo, expr.hi)]
        if expr.step is not None:
            bounds.append(str(expr.step))
        return f"{render_expr(expr.target, 5)}[{':'.join(bounds)}]"
    if isinstance(expr, Compare):
        prec = _PRECEDENCE[expr.op]
        sym = {"and": " and ", "eq": "==", "neq": "!="}[expr.op]
        # comparisons do not chain, so both operands of ==/!= bind tighter
        text = render_expr(expr.left, prec if expr.op == "and" else prec + 1) + sym \
            + render_expr(expr.right, prec + 1)
        return f"({text})" if parent > prec else text
    raise TypeError(f"cannot render {expr!r}")


def _doc_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"""', '\\"\\"\\"')


def render_proof(script: ProofScript) -> str:
    lines = [
        f"def {script.name}(answer={script.answer!r}, clue={script.clue!r}, "
        f"pattern={script.pattern!r}):",
        '  """',
        f"  definition: {_doc_escape(script.definition_annotation)}",
        f"  wordplay: {_doc_escape(script.wordplay_annotation)}",
        '  """',
    ]
    for stmt in script.statements:
        prefix = "assert " if stmt.kind == "assert" else ""
        lines.append(f"  {prefix}{render_expr(stmt.expr)}")
    lines.append(f"{script.name}()")
    return "\n".join(lines) + "\n"
