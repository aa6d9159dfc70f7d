"""Spans, multispan-tuples, multiref-words and bags."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import MalformedRefWord, OverlappingSpans, ParseError, SpanOutOfRange

# Internal end-of-document sentinel.  Never allowed in user alphabets.
END = "\x00"
END_DISPLAY = "⊣"

VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, order=True)
class Open:
    var: str

    def __str__(self):
        return f"<{self.var}"

    def __repr__(self):
        return f"Open({self.var!r})"


@dataclass(frozen=True, order=True)
class Close:
    var: str

    def __str__(self):
        return f"{self.var}>"

    def __repr__(self):
        return f"Close({self.var!r})"


Symbol = Union[str, Open, Close]


def is_marker(sym) -> bool:
    return isinstance(sym, (Open, Close))


def markers_for(variables: Iterable[str]) -> list:
    out = []
    for x in sorted(variables):
        out.append(Open(x))
        out.append(Close(x))
    return out


def symbol_key(sym):
    """Total order on symbols, for deterministic listings."""
    if isinstance(sym, Open):
        return (1, sym.var, 0)
    if isinstance(sym, Close):
        return (1, sym.var, 1)
    return (0, sym, 0)


def show_symbol(sym) -> str:
    if sym == END:
        return END_DISPLAY
    return str(sym)


@dataclass(frozen=True, order=True)
class Span:
    """The span <start,end>, covering positions start..end-1 (1-based)."""

    start: int
    end: int

    def __post_init__(self):
        if not (1 <= self.start <= self.end):
            raise SpanOutOfRange(f"invalid span <{self.start},{self.end}>")

    def __str__(self):
        return f"[{self.start},{self.end})"

    def __repr__(self):
        return f"Span({self.start}, {self.end})"

    def of(self, document):
        return document[self.start - 1:self.end - 1]

    def fits(self, document) -> bool:
        return self.end <= len(document) + 1

    @classmethod
    def parse(cls, text: str) -> "Span":
        m = re.fullmatch(r"\s*\[(\d+),\s*(\d+)\)\s*", text)
        if not m:
            raise ParseError(f"bad span {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


def span_disjoint(s1: Span, s2: Span) -> bool:
    return s1.end <= s2.start or s2.end <= s1.start


class MultispanTuple(Mapping):
    """Immutable map variable -> frozenset of pairwise disjoint spans.

    Variables bound to the empty set are not stored, so two tuples are
    equal exactly when they agree on every variable.
    """

    __slots__ = ("_bindings", "_hash")

    def __init__(self, bindings=None, **kw):
        items = dict(bindings or {})
        items.update(kw)
        clean = {}
        for var, spans in items.items():
            spans = frozenset(s if isinstance(s, Span) else Span(*s) for s in spans)
            ordered = sorted(spans)
            for i, a in enumerate(ordered):
                for b in ordered[i + 1:]:
                    if not span_disjoint(a, b):
                        raise OverlappingSpans(f"{var}: {a} and {b} overlap")
            if spans:
                clean[var] = spans
        self._bindings = clean
        self._hash = None

    def __getitem__(self, var):
        return self._bindings.get(var, frozenset())

    def __contains__(self, var):
        return var in self._bindings

    def __iter__(self):
        return iter(sorted(self._bindings))

    def __len__(self):
        return len(self._bindings)

    def __eq__(self, other):
        if isinstance(other, MultispanTuple):
            return self._bindings == other._bindings
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._bindings.items()))
        return self._hash

    def __lt__(self, other):
        return self._key() < other._key()

    def _key(self):
        return tuple((v, tuple(sorted(self._bindings[v]))) for v in sorted(self._bindings))

    def __repr__(self):
        return f"MultispanTuple({str(self)})"

    def __str__(self):
        parts = []
        for v in sorted(self._bindings):
            spans = ", ".join(str(s) for s in sorted(self._bindings[v]))
            parts.append(f"{v}: {spans}")
        return "{" + "; ".join(parts) + "}"


# -- multiref-words -------------------------------------------------------
# A multiref-word is represented as a tuple of symbols: one-character
# strings for document letters, Open/Close for the brackets.


def doc_of(w: Sequence) -> str:
    return "".join(s for s in w if not is_marker(s))


def tuple_of(w: Sequence) -> MultispanTuple:
    pos = 1
    pending = {}
    spans = {}
    for s in w:
        if isinstance(s, Open):
            if s.var in pending:
                raise MalformedRefWord(f"nested open of {s.var!r}")
            pending[s.var] = pos
        elif isinstance(s, Close):
            if s.var not in pending:
                raise MalformedRefWord(f"close of {s.var!r} without open")
            spans.setdefault(s.var, set()).add(Span(pending.pop(s.var), pos))
        else:
            pos += 1
    if pending:
        raise MalformedRefWord(f"unclosed variable(s) {sorted(pending)}")
    return MultispanTuple(spans)


def is_refword(w: Sequence) -> bool:
    try:
        tuple_of(w)
    except MalformedRefWord:
        return False
    return True


def encode(t: MultispanTuple, document: str) -> tuple:
    """The canonical multiref-word of (t, document)."""
    n = len(document)
    closes, empties, opens = {}, {}, {}
    for var in t:
        for s in t[var]:
            if s.end > n + 1:
                raise SpanOutOfRange(f"{var}: {s} does not fit a document of length {n}")
            if s.start == s.end:
                empties.setdefault(s.start, set()).add(var)
            else:
                opens.setdefault(s.start, set()).add(var)
                closes.setdefault(s.end, set()).add(var)
    order = sorted(t)
    out = []
    for i in range(1, n + 2):
        for var in order:
            if var in closes.get(i, ()):
                out.append(Close(var))
            if var in empties.get(i, ()):
                out.append(Open(var))
                out.append(Close(var))
            if var in opens.get(i, ()):
                out.append(Open(var))
        if i <= n:
            out.append(document[i - 1])
    return tuple(out)


def normalize(w: Sequence) -> tuple:
    return encode(tuple_of(w), doc_of(w))


def is_canonical(w: Sequence) -> bool:
    return tuple(w) == normalize(w)


# -- textual rendering ----------------------------------------------------
# Brackets are written "<x " and " x>"; the single space next to the
# variable name is a delimiter, not document text.  Document characters
# '<', '>' and '\' are escaped.

_ESCAPES = {"\\": "\\\\", "<": "\\<", ">": "\\>"}
_TOKEN = re.compile(r"<([A-Za-z_][A-Za-z0-9_]*) ?| ?([A-Za-z_][A-Za-z0-9_]*)>")


def render_refword(w: Sequence) -> str:
    out = []
    for s in w:
        if isinstance(s, Open):
            out.append(f"<{s.var} ")
        elif isinstance(s, Close):
            out.append(f" {s.var}>")
        else:
            out.append(_ESCAPES.get(s, s))
    return "".join(out)


def parse_refword(text: str) -> tuple:
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 1 >= n:
                raise ParseError("dangling escape", i)
            out.append(text[i + 1])
            i += 2
            continue
        m = _TOKEN.match(text, i)
        if m:
            if m.group(1) is not None:
                out.append(Open(m.group(1)))
            else:
                out.append(Close(m.group(2)))
            i = m.end()
            continue
        if ch in "<>":
            raise ParseError(f"unescaped {ch!r}", i)
        out.append(ch)
        i += 1
    return tuple(out)


# -- bags -----------------------------------------------------------------


class Bag:
    """Finite multiset.  Equality compares multiplicities."""

    __slots__ = ("_counts",)

    def __init__(self, items: Iterable = ()):
        self._counts = Counter(items)

    @classmethod
    def from_counts(cls, counts) -> "Bag":
        b = cls()
        for v, k in dict(counts).items():
            if k < 0:
                raise ValueError("negative multiplicity")
            if k:
                b._counts[v] = k
        return b

    def mult(self, value) -> int:
        return self._counts.get(value, 0)

    def add(self, value, k: int = 1):
        self._counts[value] += k

    def __len__(self):
        return sum(self._counts.values())

    def __iter__(self) -> Iterator:
        return self._counts.elements()

    def __contains__(self, value):
        return self._counts.get(value, 0) > 0

    def distinct(self):
        return set(self._counts)

    def union(self, other: "Bag") -> "Bag":
        b = Bag()
        b._counts = self._counts + other._counts
        return b

    __add__ = union

    def __eq__(self, other):
        if not isinstance(other, Bag):
            return NotImplemented
        return +self._counts == +other._counts

    def __hash__(self):
        raise TypeError("Bag is unhashable")

    def canonical(self) -> list:
        """Sorted (value, multiplicity) pairs."""
        return sorted(((v, k) for v, k in self._counts.items() if k), key=lambda p: (repr(p[0]), p[1]))

    def __repr__(self):
        inner = ", ".join(f"{v!r}" + (f"x{k}" if k > 1 else "") for v, k in self.canonical())
        return f"Bag({{{inner}}})"


def bag_union(b1: Bag, b2: Bag) -> Bag:
    return b1.union(b2)


def bag_eq(b1: Bag, b2: Bag) -> bool:
    return b1 == b2
