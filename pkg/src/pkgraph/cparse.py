"""Call-graph extraction from a C subset.

Recognizes top-level function definitions and records every call
expression inside their bodies, in evaluation order, with a textual
rendering of each argument. The result feeds a property graph whose
nodes carry ExecOrder / Name / ArgumentN, connected by CALLS edges.

Deliberately not a C parser: no preprocessor, no typedef resolution, no
control-flow. Calls under if/while/for are recorded unconditionally in
textual order. See docs/c-subset.md for the recognized grammar.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .graph import PropertyGraph

log = logging.getLogger(__name__)

# Keywords that look like calls but are statements/operators we descend
# into rather than record. sizeof is intentionally absent: it must be a
# queryable node because weakness catalogs list it as a program event.
_CONTROL_KEYWORDS = {"if", "while", "for", "switch", "return", "do", "else"}

_TYPE_WORDS = {
    "void", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "size_t", "ssize_t", "FILE", "struct",
    "union", "const", "static", "auto", "register", "bool",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>(?:0[xX][0-9a-fA-F]+|[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)[uUlLfF]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<char>'(?:[^'\\\n]|\\.)*')
  | (?P<punct>::|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^~!<>=?:;,.(){}\[\]\\\#])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int  # offset into the (comment-blanked) source
    end: int
    line: int
    column: int


@dataclass
class CallSite:
    exec_order: int
    name: str
    arguments: list


@dataclass
class FunctionDef:
    name: str
    exec_order: int
    call_sites: list = field(default_factory=list)
    pointer_locals: set = field(default_factory=set)

    @property
    def max_exec_order(self) -> int:
        return self.call_sites[-1].exec_order if self.call_sites else self.exec_order


@dataclass
class TranslationUnit:
    functions: list = field(default_factory=list)
    defined_names: set = field(default_factory=set)

    def enclosing_function(self, exec_order: int):
        """The function whose entry/call-site range covers exec_order."""
        for fn in self.functions:
            if fn.exec_order <= exec_order <= fn.max_exec_order:
                return fn
        return None


# ---------------------------------------------------------------------------
# Tokenizing
# ---------------------------------------------------------------------------

def _blank_comments(source: str) -> str:
    """Replace comments and preprocessor lines with spaces, preserving
    offsets and newlines so token positions stay source-accurate."""
    out = list(source)
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                out[i] = " "
                i += 1
        elif c == "/" and i + 1 < n and source[i + 1] == "*":
            end = source.find("*/", i + 2)
            stop = n if end < 0 else end + 2
            for j in range(i, stop):
                if out[j] != "\n":
                    out[j] = " "
            i = stop
        elif c in "\"'":
            quote = c
            i += 1
            while i < n and source[i] != quote:
                i += 2 if source[i] == "\\" else 1
            i += 1
        elif c == "#":
            # only at line start (modulo whitespace)
            line_start = source.rfind("\n", 0, i) + 1
            if source[line_start:i].strip() == "":
                while i < n and source[i] != "\n":
                    if source[i] == "\\" and i + 1 < n and source[i + 1] == "\n":
                        out[i] = " "
                        i += 2
                        continue
                    out[i] = " "
                    i += 1
            else:
                i += 1
        else:
            i += 1
    return "".join(out)


def _tokenize(blanked: str) -> list:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    n = len(blanked)
    while pos < n:
        c = blanked[pos]
        if c == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if c.isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(blanked, pos)
        if not m:
            if c in "\"'":
                raise ParseError(line, pos - line_start + 1, "unterminated literal")
            raise ParseError(line, pos - line_start + 1, f"unexpected character {c!r}")
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(), m.start(), m.end(), line, m.start() - line_start + 1))
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

def _match_forward(tokens: list, i: int, open_: str, close: str) -> int:
    """Index of the token closing the bracket at tokens[i]."""
    depth = 0
    for j in range(i, len(tokens)):
        text = tokens[j].text
        if text == open_:
            depth += 1
        elif text == close:
            depth -= 1
            if depth == 0:
                return j
    tok = tokens[i]
    raise ParseError(tok.line, tok.column, f"unbalanced {open_!r}")


def _skip_template_args(tokens: list, i: int) -> int:
    """If tokens[i] opens a template-argument list made only of simple
    tokens (ids, '*', ',', '::', numbers, nested <>), return the index
    after the closing '>'. Otherwise return i. Lets C++ spellings like
    auto_ptr<char>(p) register a call named auto_ptr."""
    if i >= len(tokens) or tokens[i].text != "<":
        return i
    depth = 0
    j = i
    while j < len(tokens):
        text = tokens[j].text
        if text == "<":
            depth += 1
        elif text == ">":
            depth -= 1
            if depth == 0:
                return j + 1
        elif tokens[j].kind not in ("id", "num") and text not in ("*", ",", "::"):
            return i
        j += 1
    return i


def _render_argument(tokens: list, lo: int, hi: int, blanked: str) -> str:
    span = tokens[lo:hi]
    if len(span) == 1:
        tok = span[0]
        if tok.kind == "str":
            return tok.text[1:-1]  # inner text, escapes kept as written
        if tok.kind in ("num", "id", "char"):
            return tok.text
    slice_ = blanked[span[0].start : span[-1].end]
    return re.sub(r"\s+", " ", slice_).strip()


def _split_arguments(tokens: list, lo: int, hi: int, blanked: str) -> list:
    if lo >= hi:
        return []
    args = []
    depth = 0
    start = lo
    for j in range(lo, hi):
        text = tokens[j].text
        if text in "([{":
            depth += 1
        elif text in ")]}":
            depth -= 1
        elif text == "," and depth == 0:
            args.append(_render_argument(tokens, start, j, blanked))
            start = j + 1
    args.append(_render_argument(tokens, start, hi, blanked))
    return args


def _scan_calls(tokens: list, lo: int, hi: int, blanked: str, out: list) -> None:
    """Record calls in tokens[lo:hi] in evaluation order: arguments are
    scanned before the enclosing call is appended."""
    i = lo
    while i < hi:
        tok = tokens[i]
        if tok.kind == "id" and tok.text not in _CONTROL_KEYWORDS:
            after = _skip_template_args(tokens, i + 1)
            if after < hi and tokens[after].text == "(":
                close = _match_forward(tokens, after, "(", ")")
                _scan_calls(tokens, after + 1, close, blanked, out)
                out.append((tok.text, _split_arguments(tokens, after + 1, close, blanked)))
                i = close + 1
                continue
        i += 1


def _pointer_decls(tokens: list, lo: int, hi: int) -> set:
    """Identifiers declared with pointer type in tokens[lo:hi]. A
    declarator is recognized as <type word(s)> '*'+ <name> followed by a
    declarator terminator; multiplication never matches because the
    left operand is preceded by an operator, not a statement boundary."""
    names = set()
    i = lo
    while i + 2 < hi:
        tok = tokens[i]
        if tok.kind == "id" and tokens[i + 1].text == "*":
            j = i + 1
            while j < hi and tokens[j].text == "*":
                j += 1
            if (
                j < hi
                and tokens[j].kind == "id"
                and j + 1 <= hi
                and (j + 1 == hi or tokens[j + 1].text in ("=", ";", ",", ")", "["))
            ):
                prev = tokens[i - 1].text if i > lo else ";"
                if tok.text in _TYPE_WORDS or prev in (";", "{", "}", "(", ","):
                    names.add(tokens[j].text)
            i = j
        else:
            i += 1
    return names


def extract_translation_unit(source: str) -> TranslationUnit:
    """Extract function definitions and their call sites.

    exec_order is assigned by one global counter over function entries
    and call sites in textual order. Unparseable top-level items are
    skipped with a warning; unbalanced brackets raise ParseError.
    """
    blanked = _blank_comments(source)
    tokens = _tokenize(blanked)
    tu = TranslationUnit()
    counter = 0
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.kind == "id" and i + 1 < n and tokens[i + 1].text == "(":
            close = _match_forward(tokens, i + 1, "(", ")")
            if close + 1 < n and tokens[close + 1].text == "{":
                body_close = _match_forward(tokens, close + 1, "{", "}")
                name = tok.text
                if name in tu.defined_names:
                    raise ParseError(tok.line, tok.column, f"duplicate definition of {name!r}")
                counter += 1
                fn = FunctionDef(name=name, exec_order=counter)
                fn.pointer_locals = _pointer_decls(tokens, i + 2, close) | _pointer_decls(
                    tokens, close + 2, body_close
                )
                calls = []
                _scan_calls(tokens, close + 2, body_close, blanked, calls)
                for callee, args in calls:
                    counter += 1
                    fn.call_sites.append(CallSite(counter, callee, args))
                tu.functions.append(fn)
                tu.defined_names.add(name)
                i = body_close + 1
                continue
            # declaration/prototype: skip past the terminating ';'
            j = close + 1
            while j < n and tokens[j].text != ";":
                j += 1
            i = j + 1
            continue
        if tok.text == "{":
            # stray top-level block (e.g. struct body we don't model)
            i = _match_forward(tokens, i, "{", "}") + 1
            continue
        if tok.text == ";":
            i += 1
            continue
        # anything else: advance; warn once per skipped run of tokens.
        # A run ending at `name (` is the return type of a definition we
        # are about to recognize, not an unparseable item.
        run_start = i
        while i < n and tokens[i].text not in (";", "{") and not (
            tokens[i].kind == "id" and i + 1 < n and tokens[i + 1].text == "("
        ):
            i += 1
        if i == run_start:
            i += 1
        elif not (i < n and tokens[i].kind == "id"):
            log.warning(
                "skipping unparseable top-level item at %d:%d",
                tokens[run_start].line,
                tokens[run_start].column,
            )
    return tu


def build_call_graph(tu: TranslationUnit, graph: PropertyGraph) -> dict:
    """Materialize a translation unit as CallGraph nodes and CALLS edges.

    One node per function entry ({ExecOrder, Name}) and per call site
    ({ExecOrder, Name, Argument1..N}); an edge from each entry to its
    call sites, plus an interprocedural edge from any call site whose
    callee is defined in this unit to that callee's entry node.

    Returns a map from function name to entry node id.
    """
    entries = {}
    site_nodes = []  # (node_id, callee name)
    for fn in tu.functions:
        entry = graph.add_node("CallGraph", {"ExecOrder": fn.exec_order, "Name": fn.name})
        entries[fn.name] = entry
        for site in fn.call_sites:
            props = {"ExecOrder": site.exec_order, "Name": site.name}
            for k, arg in enumerate(site.arguments, start=1):
                props[f"Argument{k}"] = arg
            node = graph.add_node("CallGraph", props)
            graph.add_edge(entry, node, "CALLS")
            site_nodes.append((node, site.name))
    for node, callee in site_nodes:
        if callee in tu.defined_names:
            graph.add_edge(node, entries[callee], "CALLS")
    return entries
