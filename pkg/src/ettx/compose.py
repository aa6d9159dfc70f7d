"""Composition of two NSSTs under bag semantics.

A state of the composed machine is a pair (p, f): p is a state of the
first machine T1 and f maps each live T1 register X to a *subrun*
(q, skeleton, q') of the second machine T2 over the current content of X.
The skeleton is T2's register update along that subrun, with every
maximal piece of output (or of earlier pieces) moved into a fresh
register of the composed machine.  When T1 rewrites X, the composed
machine guesses T2 transitions for the letters T1 writes and glues the
subruns together on matching states.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

from .errors import AlphabetMismatch, SizeBudgetExceeded, SupplyExhausted
from .sst import Assignment, Nsst, Reg, as_nsst, garbage_free_transform, is_garbage_free, norm_word, trim

DEFAULT_MAX_STATES = 50_000


@dataclass(frozen=True, order=True)
class Fresh:
    """A register of the composed machine, inert inside T2 assignments."""

    name: str

    def __str__(self):
        return f"[{self.name}]"


# -- subrun semigroup ------------------------------------------------------


class Subrun(NamedTuple):
    entry: object
    summary: Assignment
    exit: object


BOTTOM = None


def subrun_mul(a, b):
    """(q1, s, q2) * (q3, t, q4) = (q1, s∘t, q4) when q2 == q3, else bottom."""
    if a is BOTTOM or b is BOTTOM or a.exit != b.entry:
        return BOTTOM
    return Subrun(a.entry, a.summary.compose(b.summary), b.exit)


def subrun_fold(elts):
    it = iter(elts)
    acc = next(it)
    for e in it:
        acc = subrun_mul(acc, e)
        if acc is BOTTOM:
            return BOTTOM
    return acc


# -- indexing and summaries -----------------------------------------------


class Index(NamedTuple):
    letter: str  # "" stands for ε
    reg: object
    pos: int

    def __str__(self):
        return f"({self.letter or 'ε'},{self.reg},{self.pos})" if self.reg is not None else f"({self.letter or 'ε'},{self.pos})"


def index_word(word, reg=None) -> tuple:
    out = []
    pos = 0
    for it in word:
        if isinstance(it, str):
            for c in it:
                pos += 1
                out.append(Index(c, reg, pos))
        else:
            pos += 1
            out.append(it)
    if not out:
        out.append(Index("", reg, 1))
    return tuple(out)


class IndexedAssignment:
    def __init__(self, mapping):
        self.mapping = dict(mapping)

    @property
    def indices(self) -> frozenset:
        return frozenset(it for w in self.mapping.values() for it in w if isinstance(it, Index))

    def __getitem__(self, x):
        return self.mapping[x]

    def erase(self) -> Assignment:
        return Assignment({x: tuple(it if not isinstance(it, Index) else it.letter for it in w)
                           for x, w in self.mapping.items()})

    def __str__(self):
        return "{" + "; ".join(f"{x} := " + " ".join(map(str, w)) for x, w in sorted(self.mapping.items())) + "}"


def index_assign(s: Assignment) -> IndexedAssignment:
    return IndexedAssignment({x: index_word(w, x) for x, w in s.items()})


def _supply(fresh):
    if callable(fresh):
        return fresh
    it = iter(fresh)

    def take(x, j):
        try:
            return next(it)
        except StopIteration:
            raise SupplyExhausted("fresh register supply exhausted") from None
    return take


def summarize_word(word, name):
    """Skeleton Y1 X1 ... Xk Yk+1 of a word, with ζ(Yj) the j-th non-register factor."""
    skel = []
    zeta = {}
    piece = []
    j = 1
    for it in word:
        if isinstance(it, Reg):
            n = name(j)
            zeta[n] = norm_word(piece)
            skel += [Fresh(n), it]
            piece = []
            j += 1
        else:
            piece.append(it)
    n = name(j)
    zeta[n] = norm_word(piece)
    skel.append(Fresh(n))
    return tuple(skel), zeta


def summarize_assign(s: Assignment, fresh):
    """(skeleton, ζ) with ζ applied to the skeleton giving back s."""
    take = _supply(fresh)
    skel = {}
    zeta = {}
    for x in sorted(s):
        w, z = summarize_word(s[x], lambda j, x=x: take(x, j))
        if set(z) & set(zeta):
            raise SupplyExhausted("fresh register supply repeated a name")
        skel[x] = w
        zeta.update(z)
    return Assignment(skel), Assignment(zeta)


def unsummarize(skeleton: Assignment, zeta: Assignment) -> Assignment:
    def expand(w):
        out = []
        for it in w:
            if isinstance(it, Fresh):
                out.extend(zeta[it.name])
            else:
                out.append(it)
        return out
    return Assignment({x: expand(w) for x, w in skeleton.items()})


def _to_regs(word):
    return norm_word(Reg(it.name) if isinstance(it, Fresh) else it for it in word)


# -- the construction ------------------------------------------------------


class _Composer:
    def __init__(self, T1: Nsst, T2: Nsst, max_states):
        self.T1 = T1
        self.T2 = T2
        self.max_states = max_states
        self.ident2 = Assignment.identity(T2.registers)
        self.by_letter = {}
        for t in T2.transitions:
            self.by_letter.setdefault(t.symbol, []).append(t)
        self._chain_memo = {}
        names = {}
        for y in T1.registers:
            for x in T2.registers:
                for j in range(1, len(T2.registers) + 2):
                    names[(y, x, j)] = f"{y}.{x}.{j}"
        if len(set(names.values())) != len(names):
            ry = {y: i for i, y in enumerate(T1.registers)}
            rx = {x: i for i, x in enumerate(T2.registers)}
            names = {(y, x, j): f"r{ry[y]}_{rx[x]}_{j}" for (y, x, j) in names}
        self.names = names

    def chains(self, items, f):
        """Every subrun of T2 over an indexed image, as (entry, summary, exit)."""
        key = (items, tuple(f.get(it.name) for it in items if isinstance(it, Reg)))
        hit = self._chain_memo.get(key)
        if hit is not None:
            return hit
        out = []
        Q2 = self.T2.states

        def elt_options(it, cur):
            if isinstance(it, Reg):
                sub = f[it.name]
                if cur is None or sub.entry == cur:
                    yield sub
            elif it.letter == "":
                for q in (Q2 if cur is None else (cur,)):
                    yield Subrun(q, self.ident2, q)
            else:
                for t in self.by_letter.get(it.letter, ()):
                    if cur is None or t.source == cur:
                        yield Subrun(t.source, t.assignment, t.target)

        def go(i, acc):
            if i == len(items):
                out.append(acc)
                return
            for e in elt_options(items[i], None if acc is None else acc.exit):
                go(i + 1, e if acc is None else subrun_mul(acc, e))

        go(0, None)
        self._chain_memo[key] = out
        return out

    def summarize(self, y, sub: Subrun):
        skel = {}
        zeta = {}
        for x in sorted(sub.summary):
            w, z = summarize_word(sub.summary[x], lambda j, x=x: self.names[(y, x, j)])
            skel[x] = w
            zeta.update(z)
        return Subrun(sub.entry, Assignment(skel), sub.exit), zeta

    def step(self, f, sigma: Assignment):
        """All (f', ζ) for one T1 assignment (or initial valuation) from f."""
        per_reg = []
        for x in sorted(sigma):
            img = sigma[x]
            if any(isinstance(it, Reg) and it.name not in f for it in img):
                continue
            options = self.chains(index_word(img, x), f)
            if not options:
                return []
            per_reg.append((x, options))
        results = []
        for combo in product(*(opts for _, opts in per_reg)):
            f2 = {}
            zeta = {}
            for (x, _), sub in zip(per_reg, combo):
                s2, z = self.summarize(x, sub)
                f2[x] = s2
                zeta.update(z)
            results.append((f2, Assignment({n: _to_regs(w) for n, w in zeta.items()})))
        return results

    def finals(self, f, template):
        if any(isinstance(it, Reg) and it.name not in f for it in template):
            return []
        out = []
        for sub in self.chains(index_word(template), f):
            v0 = self.T2.initial.get(sub.entry)
            tpl2 = self.T2.final.get(sub.exit)
            if v0 is None or tpl2 is None:
                continue
            w = sub.summary.substitute(tpl2)
            if w is None:
                continue
            w = v0.substitute(w)
            if w is None:
                continue
            out.append(_to_regs(w))
        return out


def _key(f):
    return tuple(sorted(f.items()))


def compose_nsst(T1, T2, max_states: int = DEFAULT_MAX_STATES, make_garbage_free=True) -> Nsst:
    """An NSST whose output bag on D is the union of T2's bags over T1's outputs."""
    T1 = as_nsst(T1)
    T2 = as_nsst(T2)
    if not T1.output_alphabet <= T2.input_alphabet:
        extra = sorted(map(str, T1.output_alphabet - T2.input_alphabet))
        raise AlphabetMismatch(f"second machine does not read: {', '.join(extra)}")
    if make_garbage_free:
        if not is_garbage_free(T1):
            T1 = garbage_free_transform(T1)
        if not is_garbage_free(T2):
            T2 = garbage_free_transform(T2)
    C = _Composer(T1, T2, max_states)
    ids = {}
    order = []

    def state(p, f):
        k = (p, _key(f))
        if k not in ids:
            if len(ids) >= max_states:
                raise SizeBudgetExceeded(f"composition exceeds {max_states} states")
            ids[k] = len(ids)
            order.append((p, dict(f)))
        return ids[k]

    init_opts = {}
    for p in T1.states:
        v = T1.initial.get(p)
        if v is None:
            continue
        for f2, zeta in C.step({}, v):
            init_opts.setdefault(state(p, f2), []).append(zeta)
    trans = []
    final_opts = {}
    i = 0
    while i < len(order):
        p, f = order[i]
        src = i
        i += 1
        tpl = T1.final.get(p)
        if tpl is not None:
            fins = C.finals(f, tpl)
            if fins:
                final_opts[src] = fins
        for t in T1.transitions:
            if t.source != p:
                continue
            for f2, zeta in C.step(f, t.assignment):
                trans.append((src, t.symbol, zeta, state(t.target, f2)))
    registers = sorted(set(C.names.values()))
    M = _assemble(len(order), trans, init_opts, final_opts,
                  T1.input_alphabet, T2.output_alphabet, registers)
    M = trim(M)
    M._cache["composed_from"] = {"states": len(order), "labels": [(p, _key(f)) for p, f in order]}
    return M


def _assemble(n, trans, init_opts, final_opts, inp, out, registers):
    """Build an NSST from state-level option lists.

    A state may carry several initial valuations and several final
    templates; each option becomes its own copy of the state so that the
    number of accepting runs is preserved.
    """
    states = [("s", i) for i in range(n)]
    delta = [(("s", a), sym, z, ("s", b)) for a, sym, z, b in trans]
    initial = {}
    final = {}
    incoming = {}
    outgoing = {}
    for a, sym, z, b in trans:
        incoming.setdefault(b, []).append((a, sym, z))
        outgoing.setdefault(a, []).append((sym, z, b))
    for s, vals in init_opts.items():
        for j, v in enumerate(vals):
            e = ("in", s, j)
            states.append(e)
            initial[e] = v
            for sym, z, b in outgoing.get(s, ()):
                delta.append((e, sym, z, ("s", b)))
    for s, tpls in final_opts.items():
        for k, tpl in enumerate(tpls):
            x = ("out", s, k)
            states.append(x)
            final[x] = tpl
            for a, sym, z in incoming.get(s, ()):
                delta.append((("s", a), sym, z, x))
                for j in range(len(init_opts.get(a, ()))):
                    delta.append((("in", a, j), sym, z, x))
            for j, v in enumerate(init_opts.get(s, ())):
                both = ("inout", s, j, k)
                states.append(both)
                initial[both] = v
                final[both] = tpl
    used = set()
    for _, _, z, _ in delta:
        used |= set(z.dom) | set(z.reg)
    for v in initial.values():
        used |= set(v.dom)
    for tpl in final.values():
        used |= {it.name for it in tpl if isinstance(it, Reg)}
    regs = [r for r in registers if r in used]
    return Nsst(states, inp, out, regs, delta, initial, final, check=False)
