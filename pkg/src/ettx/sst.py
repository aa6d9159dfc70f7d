"""Copyless assignments and streaming string transducers.

Register contents are words over an output alphabet of characters.  An
assignment image is a tuple of items: ``Reg`` references and non-empty
``str`` chunks of letters (adjacent chunks are merged).  Any other
hashable item is treated as an opaque constant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .core import Bag, Close, Open, is_marker
from .errors import AlphabetError, BudgetExceeded, NotCopyless, NotDeterministic, SpecError


@dataclass(frozen=True, order=True)
class Reg:
    name: str

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"Reg({self.name!r})"


def norm_word(items) -> tuple:
    """Merge adjacent letter chunks and drop empty ones."""
    out = []
    for it in items:
        if isinstance(it, str):
            if not it:
                continue
            if out and isinstance(out[-1], str):
                out[-1] += it
                continue
        out.append(it)
    return tuple(out)


def word_regs(word) -> list:
    return [it.name for it in word if isinstance(it, Reg)]


def word_size(word) -> int:
    return sum(len(it) if isinstance(it, str) else 1 for it in word)


def word_letters(word) -> list:
    """Items of a word with chunks split into single letters."""
    out = []
    for it in word:
        if isinstance(it, str):
            out.extend(it)
        else:
            out.append(it)
    return out


def show_word(word) -> str:
    if not word:
        return "ε"
    parts = []
    for it in word:
        parts.append(str(it) if not isinstance(it, str) else it)
    return " ".join(parts)


class Assignment:
    """Partial map from register names to words over registers and letters.

    ``a.compose(b)`` is the assignment ``a ∘ b``: each register X of
    ``b`` maps to ``b(X)`` with every register Y replaced by ``a(Y)``.
    Applying ``b`` after a run valuation ``v`` is ``v.compose(b)``.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, mapping=None, **kw):
        m = {}
        for src in (mapping or {}), kw:
            for k, v in dict(src).items():
                if isinstance(v, str):
                    v = (v,)
                m[k] = norm_word(v)
        self._map = m
        self._hash = None

    @classmethod
    def _raw(cls, m):
        a = cls.__new__(cls)
        a._map = m
        a._hash = None
        return a

    @classmethod
    def identity(cls, registers) -> "Assignment":
        return cls._raw({r: (Reg(r),) for r in registers})

    @classmethod
    def empty_valuation(cls, registers) -> "Assignment":
        return cls._raw({r: () for r in registers})

    # mapping protocol
    def __getitem__(self, reg):
        return self._map[reg]

    def get(self, reg, default=None):
        return self._map.get(reg, default)

    def __contains__(self, reg):
        return reg in self._map

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def items(self):
        return self._map.items()

    @property
    def dom(self) -> frozenset:
        return frozenset(self._map)

    @property
    def reg(self) -> frozenset:
        return frozenset(r for w in self._map.values() for r in word_regs(w))

    def reg_list(self) -> list:
        return [r for w in self._map.values() for r in word_regs(w)]

    @property
    def size(self) -> int:
        return sum(word_size(w) for w in self._map.values())

    def is_copyless(self) -> bool:
        regs = self.reg_list()
        return len(regs) == len(set(regs))

    def is_valuation(self) -> bool:
        return all(not isinstance(it, Reg) for w in self._map.values() for it in w)

    def is_relabel(self) -> bool:
        return self.is_copyless() and all(len(w) == 1 and isinstance(w[0], Reg) for w in self._map.values())

    def substitute(self, word) -> Optional[tuple]:
        """The word with every register replaced by its image; None if undefined."""
        out = []
        m = self._map
        for it in word:
            if isinstance(it, Reg):
                img = m.get(it.name)
                if img is None:
                    return None
                out.extend(img)
            else:
                out.append(it)
        return norm_word(out)

    def compose(self, other: "Assignment") -> "Assignment":
        res = {}
        for x, w in other._map.items():
            img = self.substitute(w)
            if img is not None:
                res[x] = img
        return Assignment._raw(res)

    __matmul__ = compose

    def restrict(self, regs) -> "Assignment":
        regs = set(regs)
        return Assignment._raw({r: w for r, w in self._map.items() if r in regs})

    def rename(self, fn) -> "Assignment":
        """Rename registers on both sides."""
        def conv(w):
            return tuple(Reg(fn(it.name)) if isinstance(it, Reg) else it for it in w)
        return Assignment._raw({fn(r): conv(w) for r, w in self._map.items()})

    def value(self, reg) -> str:
        """Content of a register when this is a valuation."""
        return "".join(self._map[reg])

    def as_dict(self) -> dict:
        return dict(self._map)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self._map == other._map

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __lt__(self, other):
        return sorted(self._map.items(), key=repr) < sorted(other._map.items(), key=repr)

    def __repr__(self):
        return f"Assignment({self})"

    def __str__(self):
        return "{" + "; ".join(f"{r} := {show_word(self._map[r])}" for r in sorted(self._map)) + "}"


def compose_assign(s1: Assignment, s2: Assignment) -> Assignment:
    return s1.compose(s2)


def is_copyless(s: Assignment) -> bool:
    return s.is_copyless()


def apply_template(valuation: Assignment, template) -> Optional[str]:
    w = valuation.substitute(template)
    if w is None:
        return None
    return "".join(w)


def parse_word(text: str, registers) -> tuple:
    """Whitespace-separated word: register names, letters, "quoted" runs.

    ``ε`` or nothing denotes the empty word; ``\\c`` forces a letter.
    """
    from .sstfile import parse_items

    return parse_items(text, registers)


def parse_assignment(text: str, registers) -> Assignment:
    from .sstfile import parse_assignment_body

    return parse_assignment_body(text, registers)


# -- machines -------------------------------------------------------------


class Transition(NamedTuple):
    source: object
    symbol: object
    assignment: Assignment
    target: object


def _check_template(word, registers, what):
    regs = word_regs(word)
    if len(regs) != len(set(regs)):
        raise NotCopyless(f"{what} uses a register twice")
    unknown = set(regs) - set(registers)
    if unknown:
        raise SpecError(f"{what} mentions undeclared registers {sorted(unknown)}")


class Nsst:
    """Nondeterministic streaming string transducer.

    ``transitions`` is a list; its order fixes the ids used for bag
    bookkeeping, and repeated entries are distinct transitions.
    """

    def __init__(self, states, input_alphabet, output_alphabet, registers,
                 transitions, initial, final, check=True):
        self.states = tuple(dict.fromkeys(states))
        self.input_alphabet = frozenset(input_alphabet)
        self.output_alphabet = frozenset(output_alphabet)
        self.registers = tuple(dict.fromkeys(registers))
        self.transitions = tuple(Transition(*t) for t in transitions)
        self.initial = dict(initial)
        self.final = {q: tuple(w) for q, w in dict(final).items()}
        self._out = None
        self._cache = {}
        if check:
            self.validate()

    def validate(self):
        states = set(self.states)
        regs = set(self.registers)
        for t in self.transitions:
            if t.source not in states or t.target not in states:
                raise SpecError(f"transition {t.source}->{t.target} uses an undeclared state")
            if t.symbol not in self.input_alphabet:
                raise AlphabetError(f"transition symbol {t.symbol!r} not in the input alphabet")
            if not t.assignment.is_copyless():
                raise NotCopyless(f"assignment {t.assignment} on {t.source} -{t.symbol}-> {t.target} is not copyless")
            if not t.assignment.dom <= regs or not t.assignment.reg <= regs:
                raise SpecError(f"assignment {t.assignment} mentions undeclared registers")
        for q, v in self.initial.items():
            if q not in states:
                raise SpecError(f"initial valuation for undeclared state {q}")
            if not v.is_valuation():
                raise SpecError(f"initial value of {q} mentions registers")
            if not v.dom <= regs:
                raise SpecError(f"initial value of {q} mentions undeclared registers")
        for q, w in self.final.items():
            if q not in states:
                raise SpecError(f"final template for undeclared state {q}")
            _check_template(w, regs, f"final template of {q}")

    def out(self, p, a) -> list:
        """Transitions leaving p on a, in list order."""
        if self._out is None:
            idx = {}
            for t in self.transitions:
                idx.setdefault((t.source, t.symbol), []).append(t)
            self._out = idx
        return self._out.get((p, a), ())

    def size(self) -> int:
        return len(self.states) + len(self.transitions)

    def to_nsst(self):
        return self

    def __repr__(self):
        return (f"Nsst(states={len(self.states)}, registers={len(self.registers)}, "
                f"transitions={len(self.transitions)})")


class Dsst:
    """Deterministic streaming string transducer.

    ``delta`` maps (state, symbol) to (assignment, state).  Runs start in
    ``start`` with ``init`` (by default every register holds ε).
    """

    def __init__(self, states, input_alphabet, output_alphabet, registers,
                 delta, start, final, init=None):
        self.states = tuple(dict.fromkeys(states))
        self.input_alphabet = frozenset(input_alphabet)
        self.output_alphabet = frozenset(output_alphabet)
        self.registers = tuple(dict.fromkeys(registers))
        self.delta = dict(delta)
        self.start = start
        self.final = {q: tuple(w) for q, w in dict(final).items()}
        self.init = init if init is not None else Assignment.empty_valuation(self.registers)
        self._nsst = None
        self.to_nsst()

    def to_nsst(self) -> Nsst:
        if self._nsst is None:
            trans = [(p, a, s, q) for (p, a), (s, q) in self.delta.items()]
            self._nsst = Nsst(self.states, self.input_alphabet, self.output_alphabet,
                              self.registers, trans, {self.start: self.init}, self.final)
        return self._nsst

    def step(self, q, a):
        return self.delta.get((q, a))

    def __repr__(self):
        return f"Dsst(states={len(self.states)}, registers={len(self.registers)}, transitions={len(self.delta)})"


def as_nsst(T) -> Nsst:
    return T.to_nsst()


def is_deterministic(T) -> bool:
    if isinstance(T, Dsst):
        return True
    if len(T.initial) > 1:
        return False
    seen = set()
    for t in T.transitions:
        key = (t.source, t.symbol)
        if key in seen:
            return False
        seen.add(key)
    return True


def to_dsst(T) -> Dsst:
    if isinstance(T, Dsst):
        return T
    if not is_deterministic(T) or len(T.initial) != 1:
        raise NotDeterministic("transducer is not deterministic")
    ((q0, v0),) = T.initial.items()
    delta = {(t.source, t.symbol): (t.assignment, t.target) for t in T.transitions}
    return Dsst(T.states, T.input_alphabet, T.output_alphabet, T.registers, delta, q0, T.final, v0)


def dsst_run(T: Dsst, w) -> Optional[str]:
    q = T.start
    v = T.init
    for a in w:
        if a not in T.input_alphabet:
            raise AlphabetError(f"symbol {a!r} not in the input alphabet")
        step = T.delta.get((q, a))
        if step is None:
            return None
        sigma, q = step
        v = v.compose(sigma)
    tpl = T.final.get(q)
    if tpl is None:
        return None
    return apply_template(v, tpl)


@dataclass(frozen=True)
class Run:
    states: tuple
    valuations: tuple
    transition_ids: tuple
    output: Optional[str] = None


@dataclass
class Budget:
    max_configurations: int = 10 ** 6
    max_candidates: int = 10 ** 6
    max_outputs: int = 10 ** 6

    def __post_init__(self):
        for name in ("max_configurations", "max_candidates", "max_outputs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def nsst_accepting_runs(T, w, budget: Budget = None) -> list:
    """Every accepting run on w, each fired Δ entry identified by its id."""
    T = as_nsst(T)
    budget = budget or Budget()
    for a in w:
        if a not in T.input_alphabet:
            raise AlphabetError(f"symbol {a!r} not in the input alphabet")
    by_src = {}
    for i, t in enumerate(T.transitions):
        by_src.setdefault((t.source, t.symbol), []).append((i, t))
    runs = []
    configs = 0
    n = len(w)
    stack = [((q,), (v,), ()) for q in reversed(T.states) if (v := T.initial.get(q)) is not None]
    while stack:
        states, vals, tids = stack.pop()
        configs += 1
        if configs > budget.max_configurations:
            raise BudgetExceeded(f"more than {budget.max_configurations} run configurations")
        i = len(tids)
        q, v = states[-1], vals[-1]
        if i == n:
            tpl = T.final.get(q)
            if tpl is not None:
                out = apply_template(v, tpl)
                if out is not None:
                    runs.append(Run(states, vals, tids, out))
                    if len(runs) > budget.max_outputs:
                        raise BudgetExceeded(f"more than {budget.max_outputs} accepting runs")
            continue
        for tid, t in reversed(by_src.get((q, w[i]), [])):
            stack.append((states + (t.target,), vals + (v.compose(t.assignment),), tids + (tid,)))
    return runs


def nsst_outputs(T, w, budget: Budget = None) -> Bag:
    return Bag(r.output for r in nsst_accepting_runs(T, w, budget))


# -- structure ------------------------------------------------------------


def branching_factor(T) -> int:
    T = as_nsst(T)
    counts = {}
    for t in T.transitions:
        counts[(t.source, t.symbol)] = counts.get((t.source, t.symbol), 0) + 1
    return max(counts.values(), default=0)


def all_copyless(T) -> bool:
    T = as_nsst(T)
    if not all(t.assignment.is_copyless() for t in T.transitions):
        return False
    return all(len(word_regs(w)) == len(set(word_regs(w))) for w in T.final.values())


def trim(T) -> Nsst:
    """Drop states that are unreachable from I or cannot reach F."""
    T = as_nsst(T)
    fwd = set(T.initial)
    queue = deque(fwd)
    succ = {}
    pred = {}
    for t in T.transitions:
        succ.setdefault(t.source, []).append(t.target)
        pred.setdefault(t.target, []).append(t.source)
    while queue:
        p = queue.popleft()
        for q in succ.get(p, ()):
            if q not in fwd:
                fwd.add(q)
                queue.append(q)
    bwd = set(T.final)
    queue = deque(bwd)
    while queue:
        q = queue.popleft()
        for p in pred.get(q, ()):
            if p not in bwd:
                bwd.add(p)
                queue.append(p)
    keep = fwd & bwd
    return Nsst(
        [q for q in T.states if q in keep],
        T.input_alphabet, T.output_alphabet, T.registers,
        [t for t in T.transitions if t.source in keep and t.target in keep],
        {q: v for q, v in T.initial.items() if q in keep},
        {q: w for q, w in T.final.items() if q in keep},
        check=False,
    )


def garbage_free_transform(T) -> Nsst:
    """Equivalent garbage-free machine over states (q, R).

    R is the set of registers the next assignment reads, which is also the
    domain of the valuation held in (q, R).  The construction runs
    backwards from the final states, where R is forced by the template,
    and then keeps only what the initial states reach.
    """
    T = as_nsst(T)
    finals = {}
    for q in T.states:
        if q in T.final:
            finals[(q, frozenset(word_regs(T.final[q])))] = T.final[q]
    incoming = {}
    for idx, t in enumerate(T.transitions):
        incoming.setdefault(t.target, []).append((idx, t))
    seen = set(finals)
    queue = deque(finals)
    edges = []
    while queue:
        q2, R2 = queue.popleft()
        for idx, t in incoming.get(q2, ()):
            if not R2 <= t.assignment.dom:
                continue
            sigma = t.assignment.restrict(R2)
            src = (t.source, sigma.reg)
            edges.append((idx, src, t.symbol, sigma, (q2, R2)))
            if src not in seen:
                seen.add(src)
                queue.append(src)
    initial = {}
    for s in seen:
        q, R = s
        v = T.initial.get(q)
        if v is not None and R <= v.dom:
            initial[s] = v.restrict(R)
    # forward reachability
    succ = {}
    for e in edges:
        succ.setdefault(e[1], []).append(e[4])
    reach = set(initial)
    queue = deque(reach)
    while queue:
        s = queue.popleft()
        for s2 in succ.get(s, ()):
            if s2 not in reach:
                reach.add(s2)
                queue.append(s2)
    order = {q: i for i, q in enumerate(T.states)}

    def key(s):
        return (order[s[0]], sorted(s[1]))

    states = sorted(reach, key=key)
    edges.sort(key=lambda e: (e[0], key(e[1]), key(e[4])))
    trans = [(src, a, sigma, dst) for _, src, a, sigma, dst in edges if src in reach and dst in reach]
    return Nsst(
        states, T.input_alphabet, T.output_alphabet, T.registers, trans,
        {s: initial[s] for s in states if s in initial},
        {s: finals[s] for s in states if s in finals},
        check=False,
    )


def _domain_graph(T):
    """Reachable (state, domain of the valuation) pairs and the edges between them."""
    start = {(q, v.dom) for q, v in T.initial.items()}
    seen = set(start)
    queue = deque(start)
    edges = []
    while queue:
        q, D = queue.popleft()
        for t in _out_all(T, q):
            sigma = t.assignment
            D2 = frozenset(x for x, w in sigma.items() if set(word_regs(w)) <= D)
            node = (t.target, D2)
            edges.append(((q, D), sigma, node))
            if node not in seen:
                seen.add(node)
                queue.append(node)
    return seen, edges


def _out_all(T, q):
    cache = T._cache.setdefault("out_all", None)
    if cache is None:
        cache = {}
        for t in T.transitions:
            cache.setdefault(t.source, []).append(t)
        T._cache["out_all"] = cache
    return cache.get(q, ())


def is_garbage_free(T) -> bool:
    """Whether every accepting run consumes exactly what it stores.

    The machine is first trimmed at the level of runs: definedness of a
    run depends only on the domains of its valuations, so the reachable
    pairs (state, domain) that can still reach acceptance are exactly the
    configurations of accepting runs.  On that trimmed graph the check is
    the reg/dom consistency test: every live edge must read precisely the
    registers that are defined, and every accepting pair must use all of
    them in its template.
    """
    T = as_nsst(T)
    cached = T._cache.get("garbage_free")
    if cached is not None:
        return cached
    nodes, edges = _domain_graph(T)
    accepting = set()
    for q, D in nodes:
        tpl = T.final.get(q)
        if tpl is not None and set(word_regs(tpl)) <= D:
            accepting.add((q, D))
    pred = {}
    for src, _, dst in edges:
        pred.setdefault(dst, []).append(src)
    live = set(accepting)
    queue = deque(live)
    while queue:
        n = queue.popleft()
        for m in pred.get(n, ()):
            if m not in live:
                live.add(m)
                queue.append(m)
    ok = True
    for (q, D) in accepting:
        if frozenset(word_regs(T.final[q])) != D:
            ok = False
            break
    if ok:
        for src, sigma, dst in edges:
            if dst in live and sigma.reg != src[1]:
                ok = False
                break
    T._cache["garbage_free"] = ok
    return ok


# -- NSST to ET program ---------------------------------------------------


def nsst_to_et(T):
    """An extractor expression and a DSST whose ET program equals T.

    The expression annotates the document with an empty span of s<i>
    before the first symbol (choosing the initial state i) and an empty
    span of x<j> before every symbol (choosing the j-th transition on
    that symbol).  The DSST replays the chosen run.
    """
    from .spanner import Capture, Concat, Epsilon, Literal, Star, alt_all

    T = as_nsst(T)
    if any(is_marker(a) for a in T.input_alphabet):
        raise AlphabetError("input alphabet must consist of document symbols")
    sigma = sorted(T.input_alphabet)
    states = list(T.states)
    n = len(states)
    m = branching_factor(T)
    svars = [f"s{i}" for i in range(1, n + 1)]
    xvars = [f"x{j}" for j in range(1, m + 1)]
    regs = T.registers

    if n == 0:
        expr = Epsilon()
    else:
        rn = alt_all(Capture(v, Epsilon()) for v in svars)
        if m == 0 or not sigma:
            expr = rn
        else:
            rm = alt_all(Capture(v, Epsilon()) for v in xvars)
            letters = alt_all(Literal(a) for a in sigma)
            expr = Concat(rn, Star(Concat(rm, letters)))

    ident = Assignment.identity(regs)
    delta = {}
    dstates = ["start"]
    for i, q in enumerate(states, start=1):
        v = T.initial.get(q)
        if v is None:
            continue
        s = svars[i - 1]
        delta[("start", Open(s))] = (Assignment(), ("s", i))
        delta[(("s", i), Close(s))] = (v, ("at", q))
        dstates.append(("s", i))
    for q in states:
        dstates.append(("at", q))
    groups = {}
    for t in T.transitions:
        groups.setdefault((t.source, t.symbol), []).append(t)
    for (p, b), ts in groups.items():
        for j, t in enumerate(ts, start=1):
            x = xvars[j - 1]
            if (("at", p), Open(x)) not in delta:
                delta[(("at", p), Open(x))] = (ident, ("x", p, j))
                delta[(("x", p, j), Close(x))] = (ident, ("ready", p, j))
                dstates += [("x", p, j), ("ready", p, j)]
            delta[(("ready", p, j), b)] = (t.assignment, ("at", t.target))
    final = {("at", q): w for q, w in T.final.items()}
    alphabet = set(sigma)
    for v in svars + xvars:
        alphabet.add(Open(v))
        alphabet.add(Close(v))
    dsst = Dsst(dstates, alphabet, T.output_alphabet, regs, delta, "start", final)
    return expr, dsst
