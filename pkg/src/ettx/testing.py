"""Seeded random generators for property tests."""

from __future__ import annotations

import random
from itertools import product

from .core import Close, Open
from .spanner import ANY, Alt, Capture, Concat, Epsilon, Literal, Star
from .sst import Assignment, Dsst, Nsst, Reg

REGS = ("X", "Y", "Z")


def words(alphabet, max_len):
    letters = sorted(alphabet, key=repr)
    for n in range(max_len + 1):
        for w in product(letters, repeat=n):
            yield "".join(w) if all(isinstance(a, str) for a in w) else w


def _letters(rng, out, k):
    return "".join(rng.choice(out) for _ in range(k))


def random_image(rng, regs, out, max_letters=2):
    """A word using each register of ``regs`` once, with random letters mixed in."""
    items = [Reg(r) for r in regs]
    rng.shuffle(items)
    for _ in range(rng.randint(0, max_letters)):
        items.insert(rng.randint(0, len(items)), rng.choice(out))
    return tuple(items)


def split_regs(rng, regs, k):
    """Distribute regs over k groups (some possibly empty)."""
    groups = [[] for _ in range(k)]
    regs = list(regs)
    rng.shuffle(regs)
    for r in regs:
        groups[rng.randrange(k)].append(r)
    return groups


def random_gf_nsst(rng: random.Random, max_states=4, max_regs=3, sigma="abc", out="ab",
                   density=0.35, dup_rate=0.1, shrink_sigma=True) -> Nsst:
    """A garbage-free NSST built around a live-register set per state."""
    n = rng.randint(1, max_states)
    nr = rng.randint(1, max_regs)
    regs = REGS[:nr]
    if shrink_sigma:
        sigma = sigma[:rng.randint(1, len(sigma))]
    states = [f"q{i}" for i in range(n)]
    live = {q: [r for r in regs if rng.random() < 0.6] for q in states}
    trans = []
    for p in states:
        for a in sigma:
            for q in states:
                if rng.random() >= density:
                    continue
                if live[p] and not live[q]:
                    continue
                groups = split_regs(rng, live[p], len(live[q])) if live[q] else []
                sigma_ = Assignment({x: random_image(rng, g, out) for x, g in zip(live[q], groups)})
                trans.append((p, a, sigma_, q))
                if rng.random() < dup_rate:
                    trans.append((p, a, sigma_, q))
    initial = {}
    for q in states:
        if rng.random() < 0.5 or not initial and q == states[-1]:
            initial[q] = Assignment({x: _letters(rng, out, rng.randint(0, 1)) for x in live[q]})
    final = {}
    for q in states:
        if rng.random() < 0.5 or not final and q == states[-1]:
            final[q] = random_image(rng, live[q], out, 1)
    return Nsst(states, sigma, out, regs, trans, initial, final)


def random_nsst(rng: random.Random, max_states=4, max_regs=3, sigma="abc", out="ab",
                density=0.35, dup_rate=0.1, partial_rate=0.25, shrink_sigma=True) -> Nsst:
    """An arbitrary copyless NSST; typically not garbage-free."""
    n = rng.randint(1, max_states)
    nr = rng.randint(1, max_regs)
    regs = REGS[:nr]
    if shrink_sigma:
        sigma = sigma[:rng.randint(1, len(sigma))]
    states = [f"q{i}" for i in range(n)]
    trans = []
    for p in states:
        for a in sigma:
            for q in states:
                if rng.random() >= density:
                    continue
                used = [r for r in regs if rng.random() < 0.7]
                dom = [r for r in regs if rng.random() >= partial_rate]
                if not dom:
                    dom = [rng.choice(regs)]
                groups = split_regs(rng, used, len(dom))
                s = Assignment({x: random_image(rng, g, out) for x, g in zip(dom, groups)})
                trans.append((p, a, s, q))
                if rng.random() < dup_rate:
                    trans.append((p, a, s, q))
    initial = {}
    for q in states:
        if rng.random() < 0.5 or not initial and q == states[0]:
            dom = [r for r in regs if rng.random() >= partial_rate / 2]
            initial[q] = Assignment({x: _letters(rng, out, rng.randint(0, 1)) for x in dom})
    final = {}
    for q in states:
        if rng.random() < 0.5 or not final and q == states[-1]:
            final[q] = random_image(rng, [r for r in regs if rng.random() < 0.6], out, 1)
    return Nsst(states, sigma, out, regs, trans, initial, final)


def random_expr(rng: random.Random, size=10, alphabet="ab", variables=("x", "y")):
    """A random expression with at most ``size`` nodes."""

    def gen(budget, avail):
        if budget <= 1:
            r = rng.random()
            if r < 0.6:
                return Literal(rng.choice(alphabet)), 1
            if r < 0.8:
                return ANY, 1
            if avail and r < 0.9:
                return Capture(rng.choice(sorted(avail)), Epsilon()), 2
            return Epsilon(), 1
        r = rng.random()
        if r < 0.3:
            a, s1 = gen(rng.randint(1, budget - 1), avail)
            b, s2 = gen(max(1, budget - 1 - s1), avail)
            return Concat(a, b), s1 + s2 + 1
        if r < 0.5:
            a, s1 = gen(rng.randint(1, budget - 1), avail)
            b, s2 = gen(max(1, budget - 1 - s1), avail)
            return Alt(a, b), s1 + s2 + 1
        if r < 0.65:
            a, s1 = gen(budget - 1, avail)
            return Star(a), s1 + 1
        if avail and r < 0.9:
            x = rng.choice(sorted(avail))
            a, s1 = gen(budget - 1, avail - {x})
            return Capture(x, a), s1 + 1
        return gen(1, avail)

    while True:
        e, s = gen(size, frozenset(variables))
        if s <= size:
            return e


def random_dsst(rng: random.Random, alphabet="ab", variables=("x", "y"), max_states=4,
                max_regs=2, out="ab", density=0.8) -> Dsst:
    inp = list(alphabet) + [m for x in variables for m in (Open(x), Close(x))]
    n = rng.randint(1, max_states)
    regs = REGS[:rng.randint(1, max_regs)]
    states = [f"t{i}" for i in range(n)]
    delta = {}
    for p in states:
        for a in inp:
            if rng.random() < density:
                q = rng.choice(states)
                dom = list(regs)
                groups = split_regs(rng, [r for r in regs if rng.random() < 0.8], len(dom))
                delta[(p, a)] = (Assignment({x: random_image(rng, g, out, 1) for x, g in zip(dom, groups)}), q)
    final = {}
    for q in states:
        if rng.random() < 0.6 or not final:
            final[q] = random_image(rng, [r for r in regs if rng.random() < 0.7], out, 1)
    return Dsst(states, inp, out, regs, delta, states[0], final)


class EcsaDriver:
    """Random sequences of ECSA operations that respect the preconditions."""

    def __init__(self, D, rng: random.Random, registers=("X", "Y", "Z"), out="ab"):
        self.D = D
        self.rng = rng
        self.registers = registers
        self.out = out
        self.by_dom = {}
        self.nodes = []

    def _remember(self, n):
        self.nodes.append(n)
        self.by_dom.setdefault(self.D.domain(n), []).append(n)
        return n

    def random_dom(self):
        return tuple(r for r in self.registers if self.rng.random() < 0.5)

    def random_sigma(self, reg_in, relabel=False):
        rng = self.rng
        reg_in = list(reg_in)
        if relabel:
            targets = list(self.registers)
            rng.shuffle(targets)
            rng.shuffle(reg_in)
            return Assignment({t: (Reg(r),) for t, r in zip(targets, reg_in)})
        dom = self.random_dom()
        if reg_in and not dom:
            dom = (rng.choice(self.registers),)
        groups = split_regs(rng, reg_in, len(dom)) if dom else []
        return Assignment({x: random_image(rng, g, self.out, 2) for x, g in zip(dom, groups)})

    def step(self):
        rng = self.rng
        D = self.D
        r = rng.random()
        if not self.nodes or r < 0.15:
            dom = self.random_dom()
            v = Assignment({x: "".join(rng.choice(self.out) for _ in range(rng.randint(0, 2))) for x in dom})
            return self._remember(D.add(v))
        if r < 0.55:
            n = rng.choice(self.nodes)
            s = self.random_sigma(D.domain(n), relabel=rng.random() < 0.5)
            return self._remember(D.extend(n, s))
        n1 = rng.choice(self.nodes)
        n2 = rng.choice(self.by_dom[D.domain(n1)])
        return self._remember(D.union(n1, n2))
