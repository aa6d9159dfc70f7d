"""Streaming evaluation of a garbage-free NSST with output enumeration.

One left-to-right pass keeps, for every active state, an ECSA node whose
bag holds the valuations of all runs currently in that state.  After the
pass the outputs of the final states are enumerated from those nodes.
"""

from __future__ import annotations

from .core import Bag
from .ecsa import Ecsa, flatten, rope_template
from .errors import AlphabetError, NotGarbageFree
from .sst import as_nsst, is_garbage_free


def update_lt(D: Ecsa, table: dict, q, n, sigma):
    """Add extend(n, sigma) to the bag stored at table[q]."""
    n2 = D.extend(n, sigma)
    old = table.get(q)
    table[q] = n2 if old is None else D.union(old, n2)
    return table


class Evaluation:
    """The outputs of one evaluation.  Iterating streams them (with repeats).

    ``stats`` holds ``preprocessing_steps`` after construction and, once an
    enumeration has finished, ``outputs`` and ``max_delay_ratio``: the
    largest number of abstract steps between two consecutive outputs
    divided by the sum of their lengths plus one.
    """

    def __init__(self, T, D, finals, stats):
        self.machine = T
        self.ecsa = D
        self.finals = finals
        self.stats = stats

    def __iter__(self):
        D = self.ecsa
        T = self.machine
        prev_len = 0
        mark = D.steps
        worst = 0.0
        count = 0
        for p, node in self.finals:
            tpl = T.final[p]
            for cur in D.enumerate_ropes(node):
                rope = rope_template(cur, tpl)
                if rope is None:
                    continue
                out = flatten(rope)
                D.steps += len(out)
                ratio = (D.steps - mark) / (prev_len + len(out) + 1)
                worst = max(worst, ratio)
                count += 1
                yield out
                prev_len = len(out)
                mark = D.steps
        self.stats["outputs"] = count
        self.stats["max_delay_ratio"] = worst

    def bag(self):
        return Bag(iter(self))

    def nodes(self):
        return [n for _, n in self.finals]


def evaluate(T, w, debug=False, check=True) -> Evaluation:
    T = as_nsst(T)
    if check and not is_garbage_free(T):
        raise NotGarbageFree("machine is not garbage-free; apply garbage_free_transform first")
    D = Ecsa(debug=debug)
    fired = 0
    old = {}
    for q in T.states:
        v = T.initial.get(q)
        if v is not None:
            old[q] = D.add(v)
    sigma_in = T.input_alphabet
    for a in w:
        if a not in sigma_in:
            raise AlphabetError(f"symbol {a!r} not in the input alphabet")
        new = {}
        for p, n in old.items():
            for t in T.out(p, a):
                fired += 1
                update_lt(D, new, t.target, n, t.assignment)
        old = new
    finals = [(p, old[p]) for p in T.states if p in T.final and p in old]
    stats = {
        "transitions_fired": fired,
        "ecsa_nodes": len(D),
        "preprocessing_steps": fired + D.steps,
        "document_length": len(w),
    }
    return Evaluation(T, D, finals, stats)
