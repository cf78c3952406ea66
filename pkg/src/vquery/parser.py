"""Recursive-descent parser for the supported query-language subset.

Grammar (keywords case-insensitive):

    query    := SELECT [DISTINCT] projection WHERE group
                [GROUP BY ?var] [LIMIT n]
    projection := '*' | var+ | aggregate+
    aggregate  := (COUNT '(' ('*' | [DISTINCT] var) ')'
                  | (MIN|MAX|SUM|AVG) '(' var ')') [AS var]
    group    := '{' (triple | FILTER '(' condition ')'
                     | group (UNION group)+ )* '}'
    triple   := term term term '.'?
    condition := (var|literal) op (var|literal) | ['!'] BOUND '(' var ')'

Terms are variables (?name), IRIs in angle brackets, prefixed names over
a fixed prefix table, `a` for rdf:type, or N-Triples-style literals
(bare integers read as xsd:integer). Recognized-but-out-of-subset SPARQL
keywords raise UnsupportedFeature instead of ParseError so the two
failure modes stay distinguishable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import ParseError, UnsupportedFeature
from .terms import RDF_TYPE, Term, XSD_INTEGER, iri

PREFIXES = {
    "": "http://example.org/",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "foaf": "http://xmlns.com/foaf/0.1/",
}

UNSUPPORTED_KEYWORDS = {
    "OPTIONAL", "MINUS", "SERVICE", "GRAPH", "BIND", "VALUES", "EXISTS",
    "ORDER", "OFFSET", "ASK", "CONSTRUCT", "DESCRIBE", "HAVING", "REGEX",
}

KEYWORDS = {"SELECT", "DISTINCT", "WHERE", "FILTER", "UNION", "GROUP",
            "BY", "LIMIT", "AS", "COUNT", "MIN", "MAX", "SUM", "AVG",
            "BOUND", "A"} | UNSUPPORTED_KEYWORDS

AGG_KEYWORDS = {"COUNT", "MIN", "MAX", "SUM", "AVG"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*"(?:@[A-Za-z0-9-]+|\^\^<[^<>\s]*>)?)
  | (?P<number>[+-]?[0-9]+(?:\.[0-9]+)?)
  | (?P<pname>[A-Za-z_][A-Za-z0-9_-]*)?:(?P<local>[A-Za-z0-9_.-]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|=|<|>|[{}().*,/|^!;])
""", re.VERBOSE)

_STRING_RE = re.compile(
    r'^"(?P<body>(?:[^"\\]|\\.)*)"(?:@(?P<lang>[A-Za-z0-9-]+)'
    r'|\^\^<(?P<dt>[^<>\s]*)>)?$')
_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class Token:
    kind: str  # iri | var | string | number | pname | word | op | eof
    text: str
    line: int
    col: int


def tokenize(text: str):
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group(0)
        if kind == "local":  # pname with empty prefix part matched via local
            kind = "pname"
        if kind not in ("ws", "comment"):
            if kind == "word" and tok.upper() in KEYWORDS:
                tokens.append(Token("word", tok, line, col))
            elif kind == "word":
                tokens.append(Token("word", tok, line, col))
            else:
                tokens.append(Token(kind, tok, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass(frozen=True)
class Aggregate:
    kind: str  # count | min | max | sum | avg
    var: Optional[str]  # None for COUNT(*)
    distinct: bool = False
    alias: Optional[str] = None


@dataclass(frozen=True)
class FilterComparison:
    op: str
    left: object  # var name (str) or Term
    right: object


@dataclass(frozen=True)
class FilterBound:
    var: str
    negated: bool = False


@dataclass
class Query:
    """Parsed query; pattern slots are variable names (str) or Terms."""

    select_vars: list = field(default_factory=list)
    select_all: bool = False
    aggregates: list = field(default_factory=list)
    distinct: bool = False
    patterns: list = field(default_factory=list)
    filters: list = field(default_factory=list)
    unions: list = field(default_factory=list)  # list of branch pattern lists
    group_by: Optional[str] = None
    limit: Optional[int] = None

    def variables(self):
        seen = []

        def add(slot):
            if isinstance(slot, str) and slot not in seen:
                seen.append(slot)

        for pat in self.patterns:
            for slot in pat:
                add(slot)
        for branch in self.unions:
            for pat in branch:
                for slot in pat:
                    add(slot)
        return seen


def _unescape(s: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), s)


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def error(self, expected: str):
        t = self.cur
        got = t.text if t.kind != "eof" else "end of input"
        raise ParseError(f"expected {expected}, got {got!r}", t.line, t.col)

    def advance(self) -> Token:
        t = self.cur
        self.i += 1
        return t

    def is_word(self, *words) -> bool:
        t = self.cur
        return t.kind == "word" and t.text.upper() in words

    def expect_word(self, word: str):
        if not self.is_word(word):
            self.error(word)
        return self.advance()

    def expect_op(self, op: str):
        t = self.cur
        if t.kind != "op" or t.text != op:
            self.error(f"'{op}'")
        return self.advance()

    def check_unsupported(self):
        t = self.cur
        if t.kind == "word" and t.text.upper() in UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(
                f"{t.text.upper()} is outside the supported query subset "
                f"(line {t.line}, column {t.col})")

    # -- terms ---------------------------------------------------------------

    def term(self, allow_var=True):
        """One pattern slot: a variable name or a Term constant."""
        self.check_unsupported()
        t = self.cur
        if t.kind == "var":
            if not allow_var:
                self.error("a constant term")
            self.advance()
            return t.text[1:]
        if t.kind == "iri":
            self.advance()
            return iri(t.text[1:-1])
        if t.kind == "pname":
            self.advance()
            prefix, _, local = t.text.partition(":")
            base = PREFIXES.get(prefix)
            if base is None:
                raise ParseError(f"unknown prefix {prefix!r}:", t.line, t.col)
            return iri(base + local)
        if t.kind == "word" and t.text == "a":
            self.advance()
            return iri(RDF_TYPE)
        if t.kind == "string":
            self.advance()
            m = _STRING_RE.match(t.text)
            return Term("literal", _unescape(m.group("body")),
                        datatype=m.group("dt"), langtag=m.group("lang"))
        if t.kind == "number":
            self.advance()
            if "." in t.text:
                raise UnsupportedFeature(
                    "decimal literals are outside the supported subset")
            return Term("literal", t.text, datatype=XSD_INTEGER)
        self.error("a term")

    def variable(self) -> str:
        t = self.cur
        if t.kind != "var":
            self.error("a variable")
        self.advance()
        return t.text[1:]

    # -- query structure -----------------------------------------------------

    def parse(self) -> Query:
        self.check_unsupported()
        q = Query()
        self.expect_word("SELECT")
        if self.is_word("DISTINCT"):
            self.advance()
            q.distinct = True
        self.projection(q)
        if self.is_word("WHERE"):
            self.advance()
        self.group_graph_pattern(q, q.patterns)
        if self.is_word("GROUP"):
            self.advance()
            self.expect_word("BY")
            q.group_by = self.variable()
        if self.is_word("LIMIT"):
            self.advance()
            t = self.cur
            if t.kind != "number" or "." in t.text or int(t.text) < 0:
                self.error("a non-negative integer")
            self.advance()
            q.limit = int(t.text)
        if self.cur.kind != "eof":
            self.check_unsupported()
            self.error("end of query")
        return q

    def projection(self, q: Query):
        t = self.cur
        if t.kind == "op" and t.text == "*":
            self.advance()
            q.select_all = True
            return
        while True:
            t = self.cur
            if t.kind == "var":
                q.select_vars.append(self.variable())
            elif self.is_word(*AGG_KEYWORDS):
                q.aggregates.append(self.aggregate())
            else:
                break
        if not q.select_vars and not q.aggregates:
            self.error("'*', a variable, or an aggregate")

    def aggregate(self) -> Aggregate:
        kw = self.advance().text.upper()
        self.expect_op("(")
        distinct = False
        var = None
        if kw == "COUNT" and self.cur.kind == "op" and self.cur.text == "*":
            self.advance()
        else:
            if self.is_word("DISTINCT"):
                if kw != "COUNT":
                    raise UnsupportedFeature(
                        f"DISTINCT inside {kw} is outside the supported subset")
                self.advance()
                distinct = True
            var = self.variable()
        self.expect_op(")")
        alias = None
        if self.is_word("AS"):
            self.advance()
            alias = self.variable()
        return Aggregate(kw.lower(), var, distinct, alias)

    def group_graph_pattern(self, q: Query, patterns: list):
        self.expect_op("{")
        while True:
            self.check_unsupported()
            t = self.cur
            if t.kind == "op" and t.text == "}":
                self.advance()
                return
            if t.kind == "eof":
                self.error("'}'")
            if self.is_word("FILTER"):
                self.advance()
                q.filters.append(self.condition())
                continue
            if t.kind == "op" and t.text == "{":
                self.union_block(q)
                continue
            patterns.append(self.triple())
            if self.cur.kind == "op" and self.cur.text == ".":
                self.advance()

    def union_block(self, q: Query):
        if q.unions:
            raise UnsupportedFeature(
                "at most one UNION block per query is supported")
        branch: list = []
        self.group_graph_pattern(q, branch)
        branches = [branch]
        while self.is_word("UNION"):
            self.advance()
            branch = []
            self.group_graph_pattern(q, branch)
            branches.append(branch)
        if len(branches) < 2:
            self.error("UNION")
        q.unions = branches

    def _reject_path(self):
        # property-path connectives are recognizable SPARQL we
        # deliberately do not evaluate
        if self.cur.kind == "op" and self.cur.text in ("/", "|", "^", "*"):
            raise UnsupportedFeature(
                "property paths are outside the supported subset")

    def triple(self):
        s = self.term()
        self._reject_path()
        p = self.term()
        self._reject_path()
        o = self.term()
        self._reject_path()
        return (s, p, o)

    def condition(self):
        self.expect_op("(")
        negated = False
        if self.cur.kind == "op" and self.cur.text == "!":
            self.advance()
            negated = True
        if self.is_word("BOUND"):
            self.advance()
            self.expect_op("(")
            var = self.variable()
            self.expect_op(")")
            self.expect_op(")")
            return FilterBound(var, negated)
        if negated:
            self.error("BOUND")
        left = self.term()
        t = self.cur
        if t.kind != "op" or t.text not in ("=", "!=", "<", "<=", ">", ">="):
            self.error("a comparison operator")
        self.advance()
        right = self.term()
        self.expect_op(")")
        return FilterComparison(t.text, left, right)


def parse_query(text: str) -> Query:
    """Parse ``text``; raises ParseError (with line/column) on malformed
    input and UnsupportedFeature on recognized but unsupported SPARQL."""
    return _Parser(tokenize(text)).parse()
