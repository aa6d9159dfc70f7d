"""Brute-force reference semantics.

Nothing here shares code with the automata constructions: tuples come
straight from the inductive meaning of expressions, transducer outputs
from exhaustive run enumeration.
"""

from __future__ import annotations

from itertools import product

from .core import Bag, MultispanTuple, Span, encode
from .errors import BudgetExceeded
from .spanner import Alt, Capture, Concat, Epsilon, Literal, Star, SymbolClass, literals_of
from .sst import Budget, as_nsst, dsst_run, nsst_accepting_runs, nsst_outputs, word_regs

__all__ = [
    "Budget", "enumerate_tuples", "canonical_words", "nsst_bag", "et_bag",
    "compose_bag", "garbage_free_by_runs",
]


def enumerate_tuples(e, document, alphabet=None, budget: Budget = None) -> set:
    """The set of multispan-tuples the expression extracts from the document.

    For every subexpression R and every factor D[i..j-1] this computes the
    set of annotations (sets of (variable, span) pairs) of the words of
    L(R) that spell the factor.
    """
    budget = budget or Budget()
    sigma = frozenset(alphabet) if alphabet is not None else frozenset(literals_of(e)) | frozenset(document)
    D = document
    n = len(D)
    memo = {}
    created = [0]
    EMPTY = frozenset()

    def bump(k):
        created[0] += k
        if created[0] > budget.max_candidates:
            raise BudgetExceeded(f"more than {budget.max_candidates} partial annotations")

    def S(node, i, j):
        key = (id(node), i, j)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Epsilon):
            res = {EMPTY} if i == j else set()
        elif isinstance(node, Literal):
            res = {EMPTY} if j == i + 1 and D[i - 1] == node.symbol else set()
        elif isinstance(node, SymbolClass):
            res = {EMPTY} if j == i + 1 and D[i - 1] in node.resolve(sigma) else set()
        elif isinstance(node, Alt):
            res = S(node.left, i, j) | S(node.right, i, j)
        elif isinstance(node, Concat):
            res = set()
            for k in range(i, j + 1):
                A = S(node.left, i, k)
                if not A:
                    continue
                B = S(node.right, k, j)
                for a in A:
                    for b in B:
                        res.add(a | b)
                bump(len(A) * len(B))
        elif isinstance(node, Capture):
            sp = (node.var, Span(i, j))
            res = {a | {sp} for a in S(node.inner, i, j)}
        elif isinstance(node, Star):
            res = star(node, i, j)
        else:
            raise TypeError(f"unknown expression node {node!r}")
        res = frozenset(res)
        memo[key] = res
        return res

    def star(node, i, j):
        # words e^k spelling D[i..j-1]; iterations may consume nothing
        res = {EMPTY} if i == j else set()
        for k in range(i + 1, j + 1):
            A = S(node.inner, i, k)
            if A:
                B = S(node, k, j)
                res |= {a | b for a in A for b in B}
                bump(len(A) * len(B))
        loops = S(node.inner, i, i)
        while True:
            new = {a | b for a in loops for b in res} - res
            bump(len(loops) * len(res))
            if not new:
                return res
            res |= new

    out = set()
    for ann in S(e, 1, n + 1):
        spans = {}
        for var, sp in ann:
            spans.setdefault(var, set()).add(sp)
        out.add(MultispanTuple(spans))
    return out


def canonical_words(e, document, alphabet=None, budget=None) -> set:
    return {encode(t, document) for t in enumerate_tuples(e, document, alphabet, budget)}


def nsst_bag(T, w, budget: Budget = None) -> Bag:
    return nsst_outputs(T, w, budget)


def et_bag(program, document, budget: Budget = None) -> Bag:
    """Bag of transformer outputs over every extracted tuple."""
    out = Bag()
    tuples = enumerate_tuples(program.extractor, document, program.alphabet, budget)
    limit = (budget or Budget()).max_outputs
    for t in tuples:
        u = dsst_run(program.transformer, encode(t, document))
        if u is not None:
            out.add(u)
            if len(out) > limit:
                raise BudgetExceeded(f"more than {limit} outputs")
    return out


def compose_bag(T1, T2, document, budget: Budget = None) -> Bag:
    """Feed every output of T1 (with its multiplicity) to T2."""
    out = Bag()
    for u, k in nsst_bag(T1, document, budget).canonical():
        for v, m in nsst_bag(T2, u, budget).canonical():
            out.add(v, k * m)
    return out


def garbage_free_by_runs(T, max_length: int, budget: Budget = None) -> bool:
    """Check the garbage-free condition on every accepting run up to a length."""
    T = as_nsst(T)
    letters = sorted(T.input_alphabet, key=repr)
    for n in range(max_length + 1):
        for w in product(letters, repeat=n):
            for run in nsst_accepting_runs(T, w, budget):
                for i, tid in enumerate(run.transition_ids):
                    if run.valuations[i].dom != T.transitions[tid].assignment.reg:
                        return False
                if run.valuations[-1].dom != frozenset(word_regs(T.final[run.states[-1]])):
                    return False
    return True
