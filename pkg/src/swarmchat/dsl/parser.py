"""Total parser for the controller language.

parse_program never raises on bad input: it returns either a valid
ControllerProgram or a non-empty list of Diagnostics. `#` starts a line
comment. Diagnostic message prefixes are stable per error class:

    expected ...            syntax errors
    unexpected character    lexer errors
    duplicate state ...     repeated state names
    unknown state ...       transitions to undeclared states
    invalid guard ...       out-of-range guard values
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (AfterGuard, AtTargetGuard, ControllerProgram, Diagnostic,
                  Goto, RandomWalk, StateDef, Stop, Transition)

KEYWORDS = frozenset({"state", "random_walk", "goto", "stop", "after", "ticks", "at_target"})

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r]+)
    | (?P<comment>\#[^\n]*)
    | (?P<newline>\n)
    | (?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<arrow>->)
    | (?P<lbrace>\{)
    | (?P<rbrace>\})
    | (?P<lparen>\()
    | (?P<rparen>\))
    | (?P<comma>,)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


class _Abort(Exception):
    """Internal: stop parsing with a single syntax diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def _tokenize(source: str) -> tuple[list[_Token], list[Diagnostic]]:
    tokens: list[_Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            return tokens, [Diagnostic(line, col, f"unexpected character {source[pos]!r}")]
        kind = match.lastgroup or ""
        text = match.group()
        if kind == "newline":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind, text, line, col))
            col += len(text)
        pos = match.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens, []


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.soft_diags: list[Diagnostic] = []

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.cur
        raise _Abort(Diagnostic(tok.line, tok.col, message))

    def expect(self, kind: str, what: str) -> _Token:
        if self.cur.kind != kind:
            self.fail(f"expected {what}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.cur.kind == "ident" and self.cur.text == word

    def parse_program(self) -> list[StateDef]:
        states = []
        while self.cur.kind != "eof":
            states.append(self.parse_state())
        if not states:
            self.fail("expected 'state'")
        return states

    def parse_state(self) -> StateDef:
        if not self.at_keyword("state"):
            self.fail("expected 'state'")
        head = self.advance()
        name_tok = self.cur
        if name_tok.kind != "ident" or name_tok.text in KEYWORDS:
            self.fail("expected state name")
        self.advance()
        self.expect("lbrace", "'{'")
        action = self.parse_action()
        transitions = []
        while self.at_keyword("after") or self.at_keyword("at_target"):
            transitions.append(self.parse_transition())
        self.expect("rbrace", "'}'")
        return StateDef(name_tok.text, action, tuple(transitions), line=head.line, col=head.col)

    def parse_action(self):
        tok = self.cur
        if self.at_keyword("random_walk"):
            self.advance()
            return RandomWalk()
        if self.at_keyword("stop"):
            self.advance()
            return Stop()
        if self.at_keyword("goto"):
            self.advance()
            self.expect("lparen", "'(' after 'goto'")
            x = self.parse_number("goto x coordinate")
            self.expect("comma", "','")
            y = self.parse_number("goto y coordinate")
            self.expect("rparen", "')'")
            return Goto(x, y)
        self.fail("expected an action: random_walk, goto(x, y) or stop", tok)

    def parse_transition(self) -> Transition:
        head = self.advance()
        if head.text == "after":
            count_tok = self.cur
            value = self.parse_number("tick count after 'after'")
            if "." in count_tok.text or "e" in count_tok.text or "E" in count_tok.text:
                self.soft_diags.append(Diagnostic(
                    count_tok.line, count_tok.col,
                    "invalid guard: 'after' count must be a whole number of ticks"))
                value = 1
            elif value < 1:
                self.soft_diags.append(Diagnostic(
                    count_tok.line, count_tok.col,
                    "invalid guard: 'after' count must be at least 1"))
                value = 1
            if not self.at_keyword("ticks"):
                self.fail("expected 'ticks'")
            self.advance()
            guard = AfterGuard(int(value))
        else:  # at_target
            self.expect("lparen", "'(' after 'at_target'")
            tol_tok = self.cur
            tolerance = self.parse_number("at_target tolerance")
            if tolerance <= 0:
                self.soft_diags.append(Diagnostic(
                    tol_tok.line, tol_tok.col,
                    "invalid guard: at_target tolerance must be positive"))
                tolerance = 1e-9
            self.expect("rparen", "')'")
            guard = AtTargetGuard(tolerance)
        self.expect("arrow", "'->'")
        target_tok = self.cur
        if target_tok.kind != "ident" or target_tok.text in KEYWORDS:
            self.fail("expected target state name")
        self.advance()
        return Transition(guard, target_tok.text, line=head.line, col=head.col)

    def parse_number(self, what: str) -> float:
        if self.cur.kind != "number":
            self.fail(f"expected {what}")
        return float(self.advance().text)


def _validate(states: list[StateDef]) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for state in states:
        if state.name in seen:
            diags.append(Diagnostic(state.line, state.col, f"duplicate state '{state.name}'"))
        seen.add(state.name)
    names = {s.name for s in states}
    for state in states:
        for tr in state.transitions:
            if tr.target not in names:
                diags.append(Diagnostic(tr.line, tr.col, f"unknown state '{tr.target}'"))
    return diags


def parse_program(source: str) -> ControllerProgram | list[Diagnostic]:
    """Parse source into a program, or return one or more diagnostics."""
    tokens, lex_diags = _tokenize(source)
    if lex_diags:
        return lex_diags
    parser = _Parser(tokens)
    try:
        states = parser.parse_program()
    except _Abort as abort:
        return [abort.diagnostic]
    diags = parser.soft_diags + _validate(states)
    if diags:
        return sorted(diags, key=lambda d: (d.line, d.column))
    return ControllerProgram(tuple(states))
