"""Multispanner expressions and their automata.

Concrete syntax (whitespace between tokens is ignored):

    e1 e2        concatenation
    e1 | e2      alternation; ``e1 + e2`` also works when the ``+`` is
                 preceded by whitespace
    e* / e+      star / one-or-more (a ``+`` glued to its operand)
    _            the empty word
    .            any symbol of the alphabet
    [abc] [^;#]  symbol classes, resolved against the alphabet
    x{ e }       capture into variable x
    \\c          the literal character c (\\n, \\t and \\s for whitespace)
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import END, Close, Open, is_marker, symbol_key
from .errors import AlphabetError, ParseError, SpecError, VariableNestingError

# -- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class Epsilon:
    def __str__(self):
        return "_"


@dataclass(frozen=True)
class Literal:
    symbol: str

    def __str__(self):
        return _quote_char(self.symbol)


@dataclass(frozen=True)
class SymbolClass:
    """Any alphabet symbol in ``symbols`` (or outside it, if negated).

    ``.`` is the negated empty class.  Expanded against the alphabet when
    the expression is compiled.
    """

    symbols: frozenset
    negated: bool = False

    def resolve(self, alphabet) -> frozenset:
        if self.negated:
            return frozenset(alphabet) - self.symbols
        missing = self.symbols - frozenset(alphabet)
        if missing:
            raise AlphabetError(f"class mentions symbols outside the alphabet: {sorted(missing)}")
        return self.symbols

    def __str__(self):
        if self.negated and not self.symbols:
            return "."
        body = "".join(_quote_char(c, in_class=True) for c in sorted(self.symbols))
        return "[" + ("^" if self.negated else "") + body + "]"


@dataclass(frozen=True)
class Concat:
    left: object
    right: object

    def __str__(self):
        return f"{_paren(self.left, Alt)} {_paren(self.right, Alt)}"


@dataclass(frozen=True)
class Alt:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} | {self.right}"


@dataclass(frozen=True)
class Star:
    inner: object

    def __str__(self):
        return f"{_paren(self.inner, (Alt, Concat))}*"


@dataclass(frozen=True)
class Capture:
    var: str
    inner: object

    def __post_init__(self):
        if self.var in variables_of(self.inner):
            raise VariableNestingError(self.var)

    def __str__(self):
        return f"{self.var}{{{self.inner}}}"


ANY = SymbolClass(frozenset(), negated=True)

_SPECIAL = set("()[]{}*+|.\\_")
_CLASS_SPECIAL = set("[]^-\\")
_WS = {" ": "\\s", "\n": "\\n", "\t": "\\t"}


def _quote_char(c, in_class=False):
    if c in _WS:
        return _WS[c]
    if c in (_CLASS_SPECIAL if in_class else _SPECIAL):
        return "\\" + c
    return c


def _paren(e, kinds):
    return f"({e})" if isinstance(e, kinds) else str(e)


def variables_of(e) -> frozenset:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Capture):
            out.add(node.var)
            stack.append(node.inner)
        elif isinstance(node, (Concat, Alt)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Star):
            stack.append(node.inner)
    return frozenset(out)


def literals_of(e) -> frozenset:
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            out.add(node.symbol)
        elif isinstance(node, SymbolClass):
            out |= node.symbols
        elif isinstance(node, (Concat, Alt)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Star, Capture)):
            stack.append(node.inner)
    return frozenset(out)


def expr_size(e) -> int:
    if isinstance(e, (Concat, Alt)):
        return 1 + expr_size(e.left) + expr_size(e.right)
    if isinstance(e, (Star, Capture)):
        return 1 + expr_size(e.inner)
    return 1


def concat_all(parts):
    parts = list(parts)
    if not parts:
        return Epsilon()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Concat(p, out)
    return out


def alt_all(parts):
    parts = list(parts)
    if not parts:
        raise ValueError("empty alternation")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Alt(p, out)
    return out


# -- parser ---------------------------------------------------------------


@dataclass
class _Tok:
    kind: str
    value: object
    pos: int
    spaced: bool


def _read_escape(text, i):
    """Character denoted by the escape starting at text[i] == '\\'."""
    if i + 1 >= len(text):
        raise ParseError("dangling escape", i)
    c = text[i + 1]
    return {"n": "\n", "t": "\t", "s": " "}.get(c, c), i + 2


def _tokenize(text):
    toks = []
    i = 0
    n = len(text)
    spaced = False
    while i < n:
        c = text[i]
        if c.isspace():
            spaced = True
            i += 1
            continue
        start = i
        if c == "\\":
            ch, i = _read_escape(text, i)
            toks.append(_Tok("lit", ch, start, spaced))
        elif c == "_" or (c.isascii() and c.isalpha()):
            j = i
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j < n and text[j] == "{":
                toks.append(_Tok("capture", text[i:j], start, spaced))
                i = j + 1
            elif c == "_":
                toks.append(_Tok("eps", None, start, spaced))
                i += 1
            else:
                toks.append(_Tok("lit", c, start, spaced))
                i += 1
        elif c == "[":
            j = i + 1
            negated = False
            if j < n and text[j] == "^":
                negated = True
                j += 1
            chars = []
            while True:
                if j >= n:
                    raise ParseError("unterminated class", start)
                if text[j] == "]":
                    j += 1
                    break
                if text[j] == "\\":
                    ch, j = _read_escape(text, j)
                    chars.append((ch, True))
                else:
                    chars.append((text[j], False))
                    j += 1
            symbols = set()
            k = 0
            while k < len(chars):
                if k + 2 < len(chars) and chars[k + 1] == ("-", False):
                    lo, hi = chars[k][0], chars[k + 2][0]
                    if ord(lo) > ord(hi):
                        raise ParseError("empty class range", start)
                    symbols.update(chr(o) for o in range(ord(lo), ord(hi) + 1))
                    k += 3
                else:
                    symbols.add(chars[k][0])
                    k += 1
            toks.append(_Tok("class", SymbolClass(frozenset(symbols), negated), start, spaced))
            i = j
        elif c in "()}*+|.":
            kind = {"(": "lparen", ")": "rparen", "}": "rbrace", "*": "star",
                    "+": "plus", "|": "bar", ".": "dot"}[c]
            toks.append(_Tok(kind, c, start, spaced))
            i += 1
        elif c == "{":
            raise ParseError("'{' must follow a capture variable name", start)
        else:
            toks.append(_Tok("lit", c, start, spaced))
            i += 1
        spaced = False
    toks.append(_Tok("eof", None, n, spaced))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def is_alt(self, t):
        return t.kind == "bar" or (t.kind == "plus" and t.spaced)

    def parse(self):
        e = self.alt()
        t = self.peek()
        if t.kind != "eof":
            raise ParseError(f"unexpected {t.value!r}", t.pos)
        return e

    def alt(self):
        e = self.concat()
        while self.is_alt(self.peek()):
            self.take()
            e = Alt(e, self.concat())
        return e

    def concat(self):
        parts = []
        while True:
            t = self.peek()
            if t.kind in ("eof", "rparen", "rbrace") or self.is_alt(t):
                break
            parts.append(self.postfix())
        return concat_all(parts)

    def postfix(self):
        e = self.atom()
        while True:
            t = self.peek()
            if t.kind == "star":
                self.take()
                e = Star(e)
            elif t.kind == "plus" and not t.spaced:
                self.take()
                e = Concat(e, Star(e))
            else:
                return e

    def atom(self):
        t = self.take()
        if t.kind == "lit":
            return Literal(t.value)
        if t.kind == "eps":
            return Epsilon()
        if t.kind == "dot":
            return ANY
        if t.kind == "class":
            return t.value
        if t.kind == "lparen":
            e = self.alt()
            close = self.take()
            if close.kind != "rparen":
                raise ParseError("expected ')'", close.pos)
            return e
        if t.kind == "capture":
            inner = self.alt()
            close = self.take()
            if close.kind != "rbrace":
                raise ParseError("expected '}'", close.pos)
            return Capture(t.value, inner)
        raise ParseError(f"unexpected {t.value if t.value is not None else t.kind!r}", t.pos)


def parse_expr(text: str):
    return _Parser(text).parse()


def parse_alphabet(spec: str) -> Optional[frozenset]:
    """Alphabet line payload: 'infer' or a run of symbols (whitespace ignored)."""
    spec = spec.strip()
    if spec == "infer":
        return None
    out = set()
    i = 0
    while i < len(spec):
        if spec[i].isspace():
            i += 1
            continue
        if spec[i] == "\\":
            ch, i = _read_escape(spec, i)
        else:
            ch, i = spec[i], i + 1
        out.add(ch)
    if END in out:
        raise AlphabetError("the end-marker sentinel cannot be an alphabet symbol")
    return frozenset(out)


def format_alphabet(alphabet) -> str:
    if alphabet is None:
        return "infer"
    return "".join(_quote_char(c, in_class=True) if c in " \t\n\\" else c for c in sorted(alphabet))


@dataclass(frozen=True)
class SpannerSpec:
    expr: object
    alphabet: Optional[frozenset]

    def resolve_alphabet(self, extra=()) -> frozenset:
        if self.alphabet is not None:
            return self.alphabet
        return frozenset(literals_of(self.expr)) | frozenset(extra)


def load_msre(text: str, source=None) -> SpannerSpec:
    lines = text.split("\n")
    first = lines[0].rstrip("\r")
    if not first.startswith("alphabet:"):
        raise ParseError("first line must be 'alphabet: <symbols or infer>'", line=1, source=source)
    try:
        alphabet = parse_alphabet(first[len("alphabet:"):])
    except ParseError as exc:
        raise ParseError(str(exc), exc.position, 1, source) from None
    body = "\n".join(lines[1:])
    try:
        expr = parse_expr(body)
    except ParseError as exc:
        line, col = _locate(body, exc.position or 0)
        raise ParseError(str(exc).split(": ", 1)[-1], col, line + 1, source) from None
    return SpannerSpec(expr, alphabet)


def dump_msre(spec: SpannerSpec) -> str:
    return f"alphabet: {format_alphabet(spec.alphabet)}\n{spec.expr}\n"


def _locate(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1)
    return line, col


# -- NFA ------------------------------------------------------------------


class Nfa:
    """Automaton over alphabet symbols and brackets, with epsilon moves.

    ``edges[p]`` lists ``(symbol, q)`` pairs; ``symbol is None`` is an
    epsilon move.
    """

    def __init__(self, alphabet, variables, edges, start, finals):
        self.alphabet = frozenset(alphabet)
        self.variables = frozenset(variables)
        self.edges = [list(e) for e in edges]
        self.start = start
        self.finals = frozenset(finals)

    @property
    def num_states(self):
        return len(self.edges)

    def closure(self, states) -> frozenset:
        seen = set(states)
        stack = list(states)
        while stack:
            p = stack.pop()
            for sym, q in self.edges[p]:
                if sym is None and q not in seen:
                    seen.add(q)
                    stack.append(q)
        return frozenset(seen)

    def accepts(self, word) -> bool:
        cur = self.closure([self.start])
        for sym in word:
            nxt = {q for p in cur for s, q in self.edges[p] if s == sym}
            if not nxt:
                return False
            cur = self.closure(nxt)
        return bool(cur & self.finals)


class _Builder:
    def __init__(self):
        self.edges = []

    def state(self):
        self.edges.append([])
        return len(self.edges) - 1

    def edge(self, p, sym, q):
        self.edges[p].append((sym, q))


def compile_to_nfa(e, alphabet: Iterable[str]) -> Nfa:
    """Thompson construction; one fragment per AST node."""
    alphabet = frozenset(alphabet)
    if END in alphabet:
        raise AlphabetError("the end-marker sentinel cannot be an alphabet symbol")
    if any(is_marker(a) for a in alphabet):
        raise AlphabetError("brackets cannot be document symbols")
    b = _Builder()

    def frag(node):
        s, f = b.state(), b.state()
        if isinstance(node, Epsilon):
            b.edge(s, None, f)
        elif isinstance(node, Literal):
            if node.symbol not in alphabet:
                raise AlphabetError(f"symbol {node.symbol!r} is not in the alphabet")
            b.edge(s, node.symbol, f)
        elif isinstance(node, SymbolClass):
            for a in sorted(node.resolve(alphabet)):
                b.edge(s, a, f)
        elif isinstance(node, Concat):
            s1, f1 = frag(node.left)
            s2, f2 = frag(node.right)
            b.edge(s, None, s1)
            b.edge(f1, None, s2)
            b.edge(f2, None, f)
        elif isinstance(node, Alt):
            for part in (node.left, node.right):
                s1, f1 = frag(part)
                b.edge(s, None, s1)
                b.edge(f1, None, f)
        elif isinstance(node, Star):
            s1, f1 = frag(node.inner)
            b.edge(s, None, s1)
            b.edge(f1, None, s1)
            b.edge(s, None, f)
            b.edge(f1, None, f)
        elif isinstance(node, Capture):
            s1, f1 = frag(node.inner)
            b.edge(s, Open(node.var), s1)
            b.edge(f1, Close(node.var), f)
        else:
            raise SpecError(f"unknown expression node {node!r}")
        return s, f

    start, final = _deep(frag, e)
    return Nfa(alphabet, variables_of(e), b.edges, start, {final})


def _deep(fn, arg):
    import sys

    limit = sys.getrecursionlimit()
    if limit < 20000:
        sys.setrecursionlimit(20000)
    try:
        return fn(arg)
    finally:
        sys.setrecursionlimit(limit)


# -- normalized DFA -------------------------------------------------------
# Per variable, a gap (maximal bracket block) is summarized by three bits:
# a span ends here, an empty span sits here, a span starts here.

_C, _E, _O = 4, 2, 1


def _gap_step(gap, idx, sym):
    bits = gap[idx]
    if isinstance(sym, Open):
        if bits & _O:
            return None
        bits |= _O
    else:
        if bits & _O:
            bits = (bits & ~_O) | _E
        elif bits & (_C | _E):
            return None
        else:
            bits |= _C
    return gap[:idx] + (bits,) + gap[idx + 1:]


def gap_word(gap, order) -> tuple:
    out = []
    for bits, var in zip(gap, order):
        if bits & _C:
            out.append(Close(var))
        if bits & _E:
            out.append(Open(var))
            out.append(Close(var))
        if bits & _O:
            out.append(Open(var))
    return tuple(out)


class NormalizedDfa:
    """Deterministic automaton for the canonical words of a spanner.

    Accepted words are canonical multiref-words followed by ``END``.
    """

    def __init__(self, alphabet, variables, delta, start, finals, stats=None):
        self.alphabet = frozenset(alphabet)
        self.variables = tuple(sorted(variables))
        self.delta = delta
        self.start = start
        self.finals = frozenset(finals)
        self.stats = stats or {}

    @property
    def num_states(self):
        return len(self.delta)

    def step(self, p, sym):
        return self.delta[p].get(sym)

    def accepts(self, word) -> bool:
        p = self.start
        for sym in word:
            p = self.delta[p].get(sym)
            if p is None:
                return False
        return p in self.finals

    def gamma_edges(self, p):
        return [(s, q) for s, q in self.delta[p].items() if is_marker(s)]

    def letter_edges(self, p):
        return [(s, q) for s, q in self.delta[p].items() if not is_marker(s)]


def _eps_free(nfa: Nfa):
    n = nfa.num_states
    trans = []
    finals = set()
    for p in range(n):
        cl = nfa.closure([p])
        out = {}
        for r in cl:
            for sym, q in nfa.edges[r]:
                if sym is not None:
                    out.setdefault(sym, set()).add(q)
        trans.append(out)
        if cl & nfa.finals:
            finals.add(p)
    return trans, finals


def normalized_dfa(nfa: Nfa) -> NormalizedDfa:
    trans, finals = _eps_free(nfa)
    sink = len(trans)
    trans.append({})
    for p in finals:
        trans[p].setdefault(END, set()).add(sink)

    # trim: reachable from the start and able to reach the sink
    reach = {nfa.start}
    queue = deque([nfa.start])
    while queue:
        p = queue.popleft()
        for qs in trans[p].values():
            for q in qs:
                if q not in reach:
                    reach.add(q)
                    queue.append(q)
    back = {}
    for p in reach:
        for qs in trans[p].values():
            for q in qs:
                back.setdefault(q, set()).add(p)
    alive = set()
    if sink in reach:
        alive.add(sink)
        queue = deque([sink])
        while queue:
            q = queue.popleft()
            for p in back.get(q, ()):
                if p not in alive:
                    alive.add(p)
                    queue.append(p)
    live = reach & alive
    trans = [
        {s: {q for q in qs if q in live} for s, qs in trans[p].items()} if p in live else {}
        for p in range(len(trans))
    ]

    order = tuple(sorted(nfa.variables))
    index = {v: i for i, v in enumerate(order)}
    zero = (0,) * len(order)

    # For each anchor (start, or target of a letter edge), the labels
    # "normalized gap + letter" it can read, and where they lead.
    anchors = set()
    if nfa.start in live:
        anchors.add(nfa.start)
    for p in live:
        for s, qs in trans[p].items():
            if not is_marker(s):
                anchors |= qs
    labels = {}
    nexts = {}
    explored = 0
    for a in anchors:
        lab = {}
        seen = {(a, zero)}
        queue = deque(seen)
        while queue:
            p, gap = queue.popleft()
            explored += 1
            for s, qs in trans[p].items():
                if is_marker(s):
                    ng = _gap_step(gap, index[s.var], s)
                    if ng is None:
                        continue
                    for q in qs:
                        if (q, ng) not in seen:
                            seen.add((q, ng))
                            queue.append((q, ng))
                else:
                    key = gap_word(gap, order) + (s,)
                    lab.setdefault(key, set()).update(qs)
        labels[a] = lab
        pre = {}
        for key in lab:
            for k in range(len(key)):
                pre.setdefault(key[:k], set()).add(key[k])
        nexts[a] = pre

    # Subset construction over path nodes (anchor, label prefix).
    start = frozenset({(nfa.start, ())}) if nfa.start in live else frozenset()
    ids = {start: 0}
    delta = [{}]
    queue = deque([start])
    while queue:
        S = queue.popleft()
        moves = set()
        for a, pre in S:
            moves |= nexts[a].get(pre, set())
        for sym in sorted(moves, key=symbol_key):
            target = set()
            for a, pre in S:
                np = pre + (sym,)
                if not is_marker(sym):
                    for t in labels[a].get(np, ()):
                        target.add((t, ()))
                elif np in nexts[a]:
                    target.add((a, np))
            if not target:
                continue
            T = frozenset(target)
            if T not in ids:
                ids[T] = len(delta)
                delta.append({})
                queue.append(T)
            delta[ids[S]][sym] = ids[T]
    accepting = {i for S, i in ids.items() if (sink, ()) in S}
    stats = {"anchors": len(anchors), "gap_configurations": explored, "states": len(delta)}
    return NormalizedDfa(nfa.alphabet, nfa.variables, delta, 0, accepting, stats)


def spanner_dfa(e, alphabet) -> NormalizedDfa:
    return normalized_dfa(compile_to_nfa(e, alphabet))
