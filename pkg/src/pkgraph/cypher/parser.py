"""Recursive-descent parser for the supported Cypher subset.

Grammar (EBNF in docs/query-grammar.md): MATCH / OPTIONAL MATCH with
directed patterns and variable-length relationships, WITH projections,
WHERE, UNWIND, and a final RETURN. Keywords are case-insensitive;
backtick-quoted identifiers are allowed wherever an identifier may
appear. Only right-pointing relationship arrows are supported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .ast import (
    Binary,
    Func,
    Literal,
    MatchClause,
    NodePattern,
    Not,
    Pattern,
    Prop,
    Query,
    RelPattern,
    ReturnClause,
    UnwindClause,
    Var,
    WhereClause,
    WithClause,
)

KEYWORDS = {"MATCH", "OPTIONAL", "WITH", "WHERE", "UNWIND", "RETURN", "AS", "AND", "OR", "NOT"}
FUNCTIONS = {"COLLECT", "COUNT", "SIZE"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<num>[0-9]+(?:\.[0-9]+)?)
  | (?P<str>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<backtick>`[^`]*`)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct><>|<=|>=|\.\.|->|[=<>(){}\[\]:,.*\-])
    """,
    re.VERBOSE,
)

_ESCAPES = {"\\": "\\", '"': '"', "'": "'", "n": "\n", "t": "\t", "r": "\r"}


class QuerySyntaxError(Exception):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | str | backtick | id | punct | eof
    text: str
    line: int
    column: int


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            out.append(_ESCAPES.get(body[i + 1], "\\" + body[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _lex(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise QuerySyntaxError(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            for i in range(m.start(), m.end()):
                if text[i] == "\n":
                    line += 1
                    line_start = i + 1
        else:
            tokens.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(_Tok("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.pos = 0

    # -- cursor helpers ----------------------------------------------------

    @property
    def cur(self) -> _Tok:
        return self.tokens[self.pos]

    def error(self, expected: str) -> QuerySyntaxError:
        tok = self.cur
        found = tok.text or "end of input"
        return QuerySyntaxError(tok.line, tok.column, f"expected {expected}, found {found!r}")

    def at_keyword(self, *words: str) -> bool:
        return self.cur.kind == "id" and self.cur.text.upper() in words

    def take_keyword(self, word: str) -> None:
        if not self.at_keyword(word):
            raise self.error(word)
        self.pos += 1

    def at_punct(self, text: str) -> bool:
        return self.cur.kind == "punct" and self.cur.text == text

    def take_punct(self, text: str) -> None:
        if not self.at_punct(text):
            raise self.error(repr(text))
        self.pos += 1

    def take_name(self, what: str = "identifier") -> str:
        tok = self.cur
        if tok.kind == "backtick":
            self.pos += 1
            return tok.text[1:-1]
        if tok.kind == "id" and tok.text.upper() not in KEYWORDS:
            self.pos += 1
            return tok.text
        raise self.error(what)

    # -- entry point -------------------------------------------------------

    def parse(self) -> Query:
        clauses = []
        while self.cur.kind != "eof":
            if self.at_keyword("MATCH", "OPTIONAL"):
                clauses.append(self.match_clause())
            elif self.at_keyword("WITH"):
                clauses.append(self.with_clause())
            elif self.at_keyword("WHERE"):
                self.pos += 1
                clauses.append(WhereClause(self.expression()))
            elif self.at_keyword("UNWIND"):
                self.pos += 1
                expr = self.expression()
                self.take_keyword("AS")
                clauses.append(UnwindClause(expr, self.take_name()))
            elif self.at_keyword("RETURN"):
                clauses.append(self.return_clause())
            else:
                raise self.error("a clause keyword")
        if not clauses or not isinstance(clauses[-1], ReturnClause):
            tok = self.cur
            raise QuerySyntaxError(tok.line, tok.column, "query must end with RETURN")
        if sum(isinstance(c, ReturnClause) for c in clauses) > 1:
            tok = self.cur
            raise QuerySyntaxError(tok.line, tok.column, "only one RETURN clause is allowed")
        return Query(tuple(clauses))

    # -- clauses -----------------------------------------------------------

    def match_clause(self) -> MatchClause:
        optional = False
        if self.at_keyword("OPTIONAL"):
            optional = True
            self.pos += 1
        self.take_keyword("MATCH")
        return MatchClause(self.pattern(), optional)

    def with_clause(self) -> WithClause:
        self.take_keyword("WITH")
        items = []
        while True:
            expr = self.expression()
            if self.at_keyword("AS"):
                self.pos += 1
                alias = self.take_name()
            elif isinstance(expr, Var):
                alias = expr.name  # bare variable carries its own name
            else:
                raise self.error("AS")
            items.append((expr, alias))
            if not self.at_punct(","):
                break
            self.pos += 1
        return WithClause(tuple(items))

    def return_clause(self) -> ReturnClause:
        self.take_keyword("RETURN")
        items = []
        while True:
            expr = self.expression()
            alias = None
            if self.at_keyword("AS"):
                self.pos += 1
                alias = self.take_name()
            items.append((expr, alias))
            if not self.at_punct(","):
                break
            self.pos += 1
        return ReturnClause(tuple(items))

    # -- patterns ----------------------------------------------------------

    def pattern(self) -> Pattern:
        path_var = None
        if (
            self.cur.kind in ("id", "backtick")
            and not self.at_keyword(*KEYWORDS)
            and self.tokens[self.pos + 1].kind == "punct"
            and self.tokens[self.pos + 1].text == "="
        ):
            path_var = self.take_name()
            self.take_punct("=")
        nodes = [self.node_pattern()]
        rels = []
        while self.at_punct("-"):
            rels.append(self.rel_pattern())
            nodes.append(self.node_pattern())
        return Pattern(path_var, tuple(nodes), tuple(rels))

    def node_pattern(self) -> NodePattern:
        self.take_punct("(")
        var = None
        label = None
        props = ()
        if self.cur.kind in ("id", "backtick") and not self.at_punct(")"):
            var = self.take_name()
        if self.at_punct(":"):
            self.pos += 1
            label = self.take_name("label")
        if self.at_punct("{"):
            props = self.property_map()
        self.take_punct(")")
        return NodePattern(var, label, props)

    def property_map(self) -> tuple:
        self.take_punct("{")
        entries = []
        if not self.at_punct("}"):
            while True:
                key = self.take_name("property key")
                self.take_punct(":")
                entries.append((key, self.expression()))
                if not self.at_punct(","):
                    break
                self.pos += 1
        self.take_punct("}")
        return tuple(entries)

    def rel_pattern(self) -> RelPattern:
        self.take_punct("-")
        self.take_punct("[")
        rel_type = None
        var_length = None
        if self.at_punct(":"):
            self.pos += 1
            rel_type = self.take_name("relationship type")
        if self.at_punct("*"):
            self.pos += 1
            lo, hi = 1, None
            if self.cur.kind == "num":
                lo = int(self.cur.text)
                self.pos += 1
                if self.at_punct(".."):
                    self.pos += 1
                    if self.cur.kind == "num":
                        hi = int(self.cur.text)
                        self.pos += 1
                else:
                    hi = lo
            var_length = (lo, hi)
        self.take_punct("]")
        if not self.at_punct("->"):
            raise self.error("'->' (only directed right patterns are supported)")
        self.pos += 1
        return RelPattern(rel_type, var_length)

    # -- expressions -------------------------------------------------------

    def expression(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.at_keyword("OR"):
            self.pos += 1
            left = Binary("OR", left, self.and_expr())
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.at_keyword("AND"):
            self.pos += 1
            left = Binary("AND", left, self.not_expr())
        return left

    def not_expr(self):
        if self.at_keyword("NOT"):
            self.pos += 1
            return Not(self.not_expr())
        return self.comparison()

    def comparison(self):
        left = self.atom()
        while self.cur.kind == "punct" and self.cur.text in ("=", "<>", "<", "<=", ">", ">="):
            op = self.cur.text
            self.pos += 1
            left = Binary(op, left, self.atom())
        return left

    def atom(self):
        tok = self.cur
        if tok.kind == "num":
            self.pos += 1
            value = float(tok.text) if "." in tok.text else int(tok.text)
            return Literal(value)
        if tok.kind == "str":
            self.pos += 1
            return Literal(_unescape(tok.text[1:-1]))
        if self.at_punct("("):
            self.pos += 1
            expr = self.expression()
            self.take_punct(")")
            return expr
        if tok.kind == "id" and tok.text.upper() in FUNCTIONS:
            name = tok.text.upper()
            self.pos += 1
            self.take_punct("(")
            arg = self.expression()
            self.take_punct(")")
            return self.postfix(Func(name, arg))
        if tok.kind in ("id", "backtick"):
            return self.postfix(Var(self.take_name()))
        raise self.error("an expression")

    def postfix(self, expr):
        while self.at_punct("."):
            self.pos += 1
            key = self.take_name("property name")
            if not isinstance(expr, Var):
                tok = self.cur
                raise QuerySyntaxError(
                    tok.line, tok.column, "property access is only supported on variables"
                )
            expr = Prop(expr.name, key)
        return expr


def parse_query(text: str) -> Query:
    """Parse query text, raising QuerySyntaxError with 1-based line:column
    positions on malformed input."""
    return _Parser(text).parse()
