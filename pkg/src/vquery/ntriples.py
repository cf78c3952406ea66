"""Line-oriented reader/writer for the N-Triples subset used by the loader.

Each non-blank, non-comment line is `subject predicate object .` where the
subject is an IRI or blank node, the predicate an IRI, and the object an
IRI, blank node, or literal (plain, language-tagged, or datatyped).
"""
from __future__ import annotations

import re

from .terms import Term, bnode, iri

_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", '"': '"', "\\": "\\"}
_UNESCAPE_RE = re.compile(r'\\(u[0-9a-fA-F]{4}|U[0-9a-fA-F]{8}|[tnr"\\])')
_ESCAPE_RE = re.compile(r'[\\"\n\r\t]')
_ESCAPE_OUT = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


class NTriplesError(SyntaxError):
    """Malformed line; ``lineno`` carries the 1-based line number."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _unescape(s: str, lineno: int) -> str:
    def repl(m):
        e = m.group(1)
        if e[0] in "uU":
            return chr(int(e[1:], 16))
        return _ESCAPES[e]

    try:
        return _UNESCAPE_RE.sub(repl, s)
    except (ValueError, OverflowError):
        raise NTriplesError("bad escape sequence", lineno)


class _LineParser:
    def __init__(self, line: str, lineno: int):
        self.s = line
        self.i = 0
        self.lineno = lineno

    def error(self, msg: str):
        raise NTriplesError(msg, self.lineno)

    def ws(self):
        while self.i < len(self.s) and self.s[self.i] in " \t":
            self.i += 1

    def term(self, *, as_predicate=False, as_subject=False) -> Term:
        self.ws()
        s, i = self.s, self.i
        if i >= len(s):
            self.error("unexpected end of line")
        c = s[i]
        if c == "<":
            j = s.find(">", i + 1)
            if j < 0:
                self.error("unterminated IRI")
            self.i = j + 1
            return iri(_unescape(s[i + 1:j], self.lineno))
        if c == "_" and not as_predicate:
            if not s.startswith("_:", i):
                self.error("expected '_:' blank node")
            j = i + 2
            while j < len(s) and (s[j].isalnum() or s[j] in "_-."):
                j += 1
            if j == i + 2:
                self.error("empty blank node label")
            self.i = j
            return bnode(s[i + 2:j])
        if c == '"' and not (as_predicate or as_subject):
            return self._literal()
        self.error(f"unexpected character {c!r}")

    def _literal(self) -> Term:
        s, i = self.s, self.i
        j = i + 1
        while j < len(s):
            if s[j] == "\\":
                j += 2
                continue
            if s[j] == '"':
                break
            j += 1
        if j >= len(s) or s[j] != '"':
            self.error("unterminated literal")
        lexical = _unescape(s[i + 1:j], self.lineno)
        self.i = j + 1
        if self.i < len(s) and s[self.i] == "@":
            k = self.i + 1
            while k < len(s) and (s[k].isalnum() or s[k] == "-"):
                k += 1
            if k == self.i + 1:
                self.error("empty language tag")
            tag = s[self.i + 1:k]
            self.i = k
            return Term("literal", lexical, langtag=tag)
        if s.startswith("^^", self.i):
            self.i += 2
            if self.i >= len(s) or s[self.i] != "<":
                self.error("datatype must be an IRI")
            dt = self.term()
            return Term("literal", lexical, datatype=dt.lexical)
        return Term("literal", lexical)

    def dot(self):
        self.ws()
        if self.i >= len(self.s) or self.s[self.i] != ".":
            self.error("expected terminating '.'")
        self.i += 1
        self.ws()
        if self.i < len(self.s) and self.s[self.i] != "#":
            self.error("trailing characters after '.'")


def parse(text: str):
    """All (subject, predicate, object) Term triples in ``text``.

    Raises NTriplesError on the first malformed line, so a failed parse
    yields nothing (partial input is never returned).
    """
    triples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        p = _LineParser(raw, lineno)
        s = p.term(as_subject=True)
        pr = p.term(as_predicate=True)
        o = p.term()
        p.dot()
        triples.append((s, pr, o))
    return triples


def _escape(s: str) -> str:
    return _ESCAPE_RE.sub(lambda m: _ESCAPE_OUT[m.group(0)], s)


def format_term(t: Term) -> str:
    if t.kind == "iri":
        return f"<{t.lexical}>"
    if t.kind == "bnode":
        return f"_:{t.lexical}"
    body = f'"{_escape(t.lexical)}"'
    if t.langtag:
        return f"{body}@{t.langtag}"
    if t.datatype:
        return f"{body}^^<{t.datatype}>"
    return body


def dump(triples) -> str:
    """Serialize Term triples back to N-Triples text (round-trips parse)."""
    lines = [f"{format_term(s)} {format_term(p)} {format_term(o)} ."
             for s, p, o in triples]
    return "\n".join(lines) + ("\n" if lines else "")
