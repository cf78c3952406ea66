"""RDF terms and the bidirectional term <-> id dictionary.

All query execution happens over dense 64-bit integer ids; terms are only
decoded for final results. Id 0 is reserved as the NULL (unbound) marker
and is never assigned to a term.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import FrozenStore, NullId, UnknownId

NULL_ID = 0

IRI = "iri"
LITERAL = "literal"
BLANK = "bnode"

XSD_INTEGER = "http://www.w3.org/2001/XMLSchema#integer"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


@dataclass(frozen=True)
class Term:
    """An IRI, literal, or blank node.

    Literals may carry at most one of datatype/langtag; IRIs and blank
    nodes carry neither.
    """

    kind: str
    lexical: str
    datatype: Optional[str] = None
    langtag: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (IRI, LITERAL, BLANK):
            raise ValueError(f"unknown term kind: {self.kind!r}")
        if self.kind != LITERAL and (self.datatype or self.langtag):
            raise ValueError("datatype/langtag only allowed on literals")
        if self.datatype and self.langtag:
            raise ValueError("a literal has at most one of datatype/langtag")
        if self.kind == IRI and not self.lexical:
            raise ValueError("IRI lexical form must be non-empty")


def iri(value: str) -> Term:
    return Term(IRI, value)


def literal(value: str, datatype: str = None, langtag: str = None) -> Term:
    return Term(LITERAL, value, datatype=datatype, langtag=langtag)


def bnode(label: str) -> Term:
    return Term(BLANK, label)


def integer_value(t: Term) -> Optional[int]:
    """Parsed integer value of a literal, or None.

    Recognizes xsd:integer typed literals and plain literals whose lexical
    form is a (signed) decimal integer. Equality stays lexical: "01" and
    "1" encode to different ids even though both parse to 1.
    """
    if t.kind != LITERAL or t.langtag:
        return None
    if t.datatype not in (None, XSD_INTEGER):
        return None
    lex = t.lexical
    body = lex[1:] if lex[:1] in ("+", "-") else lex
    # ascii check: unicode digit classes accepted by isdigit() are not
    # valid integer lexical forms
    if body and body.isascii() and body.isdigit():
        return int(lex)
    return None


class Dictionary:
    """Bidirectional Term <-> id mapping.

    Ids are assigned densely from 1 in first-encounter order. The
    dictionary is mutable during the load phase only; ``freeze()`` makes
    it immutable (and safely shareable) for the lifetime of execution.
    """

    def __init__(self):
        self._forward: dict[Term, int] = {}
        self._inverse: list[Term] = []
        self._numeric: dict[int, int] = {}
        self._frozen = False

    def __len__(self):
        return len(self._inverse)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self):
        self._frozen = True

    def encode(self, t: Term) -> int:
        """Return the id for ``t``, assigning the next dense id if new."""
        tid = self._forward.get(t)
        if tid is not None:
            return tid
        if self._frozen:
            raise FrozenStore("dictionary is frozen")
        tid = len(self._inverse) + 1
        self._forward[t] = tid
        self._inverse.append(t)
        num = integer_value(t)
        if num is not None:
            self._numeric[tid] = num
        return tid

    def lookup(self, t: Term) -> Optional[int]:
        """Id for ``t`` if present, else None (no assignment)."""
        return self._forward.get(t)

    def decode(self, tid: int) -> Term:
        if tid == NULL_ID:
            raise NullId("id 0 is the reserved NULL marker")
        if not 1 <= tid <= len(self._inverse):
            raise UnknownId(f"id {tid} was never assigned")
        return self._inverse[tid - 1]

    def numeric(self, tid: int) -> Optional[int]:
        """Integer value of the term behind ``tid``, or None."""
        return self._numeric.get(tid)

    def numeric_table(self) -> dict:
        """id -> integer value mapping for row-at-a-time comparisons."""
        return self._numeric

    def numeric_map(self):
        """Float array mapping id -> numeric value (NaN if none).

        Index 0 (the NULL marker) is NaN. Intended for vectorized filter
        kernels; only valid once the dictionary is frozen.
        """
        import numpy as np

        arr = np.full(len(self._inverse) + 1, np.nan, dtype=np.float64)
        for tid, val in self._numeric.items():
            arr[tid] = float(val)
        return arr
