"""Concrete DSL for domains (.ak), plans (.plan) and triples/queries (.q).

Grammar summary (whitespace and ``//`` line comments are insignificant):

    domain   :=  statement*
    statement := "initially" literal "."
               | NAME "causes" literal ("if" literals)? "."
               | "executable" NAME ("if" literals)? "."
               | NAME "determines" NAME "."
    plan     :=  step (";" step)*
    step     :=  "[" "]"  |  NAME  |  "case" branch+ "endcase"
    branch   :=  literals "->" plan "."
    triple   :=  set plan set
    set      :=  "{" literals? "}"  |  "{" "KW" literal "}"   (goal position)
    query    :=  "knows" set "after" plan  |  "kwhether" literal "after" plan
    literals :=  literal ("," literal)*
    literal  :=  "~"? NAME            NAME = [a-z][a-zA-Z0-9_]*

Parsing is total: every failure raises ParseError with a SourceSpan, never
anything else. Parsers return canonical values (literal sets ordered, plans
normalized), so parse(serialize(v)) == v for every valid value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .core import (
    Act,
    Case,
    CaseBranch,
    ConditionalPlan,
    Determines,
    Effect,
    Empty,
    Executable,
    FluentLiteral,
    Initially,
    Judgment,
    KnowsQuery,
    KWTriple,
    KwhetherQuery,
    LiteralSet,
    Proposition,
    Query,
    RESERVED,
    Seq,
    Triple,
    canonical_domain_text,
    normalize_plan,
    plan_to_text,
    valid_name,
)

MAX_NESTING = 200


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, code: str = "Syntax"):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span
        self.code = code


_PUNCT = {
    "{": "LBRACE", "}": "RBRACE", "[": "LBRACK", "]": "RBRACK",
    "~": "TILDE", ",": "COMMA", ".": "DOT", ";": "SEMI",
}

_KEYWORDS = RESERVED


@dataclass(frozen=True)
class _Token:
    kind: str  # punctuation kind, keyword text, "NAME" or "EOF"
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r\f\v":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = SourceSpan(line, col, 1)
        if text.startswith("->", i):
            tokens.append(_Token("ARROW", "->", SourceSpan(line, col, 2)))
            i, col = i + 2, col + 2
            continue
        if ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, span))
            i, col = i + 1, col + 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            span = SourceSpan(line, col, len(word))
            if word in _KEYWORDS:
                tokens.append(_Token(word, word, span))
            elif valid_name(word):
                tokens.append(_Token("NAME", word, span))
            else:
                raise ParseError(
                    f"invalid identifier {word!r}", span, code="InvalidIdentifier"
                )
            i, col = j, col + len(word)
            continue
        raise ParseError(f"unexpected character {ch!r}", span)
    tokens.append(_Token("EOF", "", SourceSpan(line, col, 0)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.depth = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def accept(self, kind: str) -> _Token | None:
        if self.peek().kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"expected {what}, found {tok.text!r}" if tok.text
                else f"expected {what}, found end of input",
                tok.span,
            )
        return self.advance()

    def expect_eof(self) -> None:
        tok = self.peek()
        if tok.kind != "EOF":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.span)

    # -- shared pieces ------------------------------------------------------

    def name(self, what: str) -> str:
        return self.expect("NAME", what).text

    def literal(self) -> FluentLiteral:
        if self.accept("TILDE"):
            return FluentLiteral(self.name("fluent name after '~'"), False)
        return FluentLiteral(self.name("fluent literal"))

    def literal_list(self, what: str) -> list[FluentLiteral]:
        literals = [self.literal()]
        while self.accept("COMMA"):
            literals.append(self.literal())
        return literals

    def literal_set(self) -> tuple[LiteralSet, SourceSpan]:
        opening = self.expect("LBRACE", "'{'")
        if self.accept("RBRACE"):
            return LiteralSet(), opening.span
        literals = self.literal_list("literal")
        self.expect("RBRACE", "'}'")
        return LiteralSet(tuple(literals)), opening.span

    def consistent_set(self, what: str) -> LiteralSet:
        lits, span = self.literal_set()
        if not lits.is_consistent():
            raise ParseError(
                f"inconsistent {what} {lits}", span, code="InconsistentSet"
            )
        return lits

    # -- domains ------------------------------------------------------------

    def domain(self) -> list[Proposition]:
        props: list[Proposition] = []
        while self.peek().kind != "EOF":
            props.append(self.statement())
        return props

    def statement(self) -> Proposition:
        tok = self.peek()
        if tok.kind == "initially":
            self.advance()
            prop: Proposition = Initially(self.literal())
        elif tok.kind == "executable":
            self.advance()
            action = self.name("action name")
            precond = self.if_preconditions()
            prop = Executable(action, precond)
        elif tok.kind == "NAME":
            action = self.advance().text
            verb = self.peek()
            if verb.kind == "causes":
                self.advance()
                effect = self.literal()
                precond = self.if_preconditions()
                prop = Effect(action, effect, precond)
            elif verb.kind == "determines":
                self.advance()
                prop = Determines(action, self.name("fluent name"))
            else:
                raise ParseError(
                    f"expected 'causes' or 'determines', found {verb.text!r}",
                    verb.span, code="UnknownKeyword",
                )
        else:
            raise ParseError(
                f"expected a proposition, found {tok.text!r}" if tok.text
                else "expected a proposition, found end of input",
                tok.span, code="UnknownKeyword" if tok.kind == "NAME" else "Syntax",
            )
        self.expect("DOT", "'.' after proposition")
        return prop

    def if_preconditions(self) -> LiteralSet:
        if not self.accept("if"):
            return LiteralSet()
        tok = self.peek()
        if tok.kind in ("DOT", "EOF"):
            raise ParseError(
                "empty precondition list after 'if'", tok.span,
                code="EmptyPreconditions",
            )
        return LiteralSet(tuple(self.literal_list("precondition literal")))

    # -- plans --------------------------------------------------------------

    def plan(self) -> ConditionalPlan:
        self.depth += 1
        if self.depth > MAX_NESTING:
            raise ParseError(
                "plan nesting too deep", self.peek().span, code="TooDeep"
            )
        try:
            steps = [self.step()]
            while self.accept("SEMI"):
                steps.append(self.step())
        finally:
            self.depth -= 1
        result: ConditionalPlan = steps[-1]
        for step in reversed(steps[:-1]):
            result = Seq(step, result)
        return result

    def step(self) -> ConditionalPlan:
        tok = self.peek()
        if tok.kind == "LBRACK":
            self.advance()
            self.expect("RBRACK", "']'")
            return Empty()
        if tok.kind == "NAME":
            return Act(self.advance().text)
        if tok.kind == "case":
            return self.case_plan()
        raise ParseError(
            f"expected a plan step, found {tok.text!r}" if tok.text
            else "expected a plan step, found end of input",
            tok.span,
        )

    def case_plan(self) -> ConditionalPlan:
        opening = self.expect("case", "'case'")
        branches: list[CaseBranch] = []
        while not self.accept("endcase"):
            if self.peek().kind == "EOF":
                raise ParseError("unterminated case plan", self.peek().span)
            guard_span = self.peek().span
            guard = LiteralSet(tuple(self.literal_list("guard literal")))
            if not guard.is_consistent():
                raise ParseError(
                    f"inconsistent guard {guard}", guard_span,
                    code="InconsistentGuard",
                )
            self.expect("ARROW", "'->'")
            body = self.plan()
            self.expect("DOT", "'.' after case branch")
            branches.append(CaseBranch(guard, body))
        if not branches:
            raise ParseError(
                "case plan has no branches", opening.span, code="EmptyCase"
            )
        return Case(tuple(branches))

    # -- triples and queries -------------------------------------------------

    def triple(self) -> Judgment:
        pre = self.consistent_set("precondition set")
        plan = normalize_plan(self.plan())
        opening = self.expect("LBRACE", "'{'")
        if self.accept("KW"):
            lit = self.literal()
            self.expect("RBRACE", "'}'")
            return KWTriple(pre, plan, lit)
        if self.accept("RBRACE"):
            return Triple(pre, plan, LiteralSet())
        literals = LiteralSet(tuple(self.literal_list("literal")))
        self.expect("RBRACE", "'}'")
        if not literals.is_consistent():
            raise ParseError(
                f"inconsistent postcondition set {literals}", opening.span,
                code="InconsistentSet",
            )
        return Triple(pre, plan, literals)

    def query(self) -> Query:
        tok = self.peek()
        if self.accept("knows"):
            goal = self.consistent_set("goal set")
            self.expect("after", "'after'")
            return KnowsQuery(goal, normalize_plan(self.plan()))
        if self.accept("kwhether"):
            lit = self.literal()
            self.expect("after", "'after'")
            return KwhetherQuery(lit, normalize_plan(self.plan()))
        raise ParseError(
            f"expected 'knows' or 'kwhether', found {tok.text!r}", tok.span
        )


# ---------------------------------------------------------------------------
# Public entry points


def parse_domain(text: str) -> list[Proposition]:
    """Parse a domain description into its proposition list (unvalidated)."""
    p = _Parser(text)
    props = p.domain()
    p.expect_eof()
    return props


def parse_plan(text: str) -> ConditionalPlan:
    """Parse a conditional plan; the result is normalized."""
    p = _Parser(text)
    plan = p.plan()
    p.expect_eof()
    return normalize_plan(plan)


def parse_triple(text: str) -> Judgment:
    """Parse ``{X} plan {Y}`` or ``{X} plan {KW p}``."""
    p = _Parser(text)
    triple = p.triple()
    p.expect_eof()
    return triple


def parse_query(text: str) -> Query:
    """Parse ``knows {X} after plan`` or ``kwhether p after plan``."""
    p = _Parser(text)
    q = p.query()
    p.expect_eof()
    return q


def parse_literal(text: str) -> FluentLiteral:
    p = _Parser(text)
    lit = p.literal()
    p.expect_eof()
    return lit


def parse_literal_set(text: str) -> LiteralSet:
    """Parse a literal list, braces optional; handy for CLI flags."""
    stripped = text.strip()
    p = _Parser(stripped)
    if p.peek().kind == "LBRACE":
        lits, _ = p.literal_set()
    elif p.peek().kind == "EOF":
        lits = LiteralSet()
    else:
        lits = LiteralSet(tuple(p.literal_list("literal")))
    p.expect_eof()
    return lits


def serialize_domain(propositions: Iterable[Proposition]) -> str:
    """One statement per line, order preserved."""
    return "\n".join(f"{p}." for p in propositions)


def serialize_plan(plan: ConditionalPlan) -> str:
    return plan_to_text(plan)


def serialize_triple(judgment: Judgment) -> str:
    return str(judgment)


def serialize_query(query: Query) -> str:
    return str(query)


__all__ = [
    "SourceSpan", "ParseError", "MAX_NESTING",
    "parse_domain", "parse_plan", "parse_triple", "parse_query",
    "parse_literal", "parse_literal_set",
    "serialize_domain", "serialize_plan", "serialize_triple",
    "serialize_query", "canonical_domain_text",
]
