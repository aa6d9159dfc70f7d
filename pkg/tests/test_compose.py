import random

import pytest

from ettx.compose import (BOTTOM, Fresh, Index, Subrun, compose_nsst, index_assign, index_word,
                          subrun_fold, subrun_mul, summarize_assign, unsummarize)
from ettx.errors import AlphabetMismatch, SizeBudgetExceeded, SupplyExhausted
from ettx.fixtures import garbage_nsst, identity_dsst
from ettx.oracle import compose_bag, nsst_bag
from ettx.sst import Assignment, Nsst, Reg
from ettx.testing import random_gf_nsst, random_image, random_nsst, split_regs, words

X, Y, Z = Reg("X"), Reg("Y"), Reg("Z")


def A(**kw):
    return Assignment(kw)


def test_subrun_mul():
    s, t = A(X=("a", X)), A(X=(X, "b"))
    assert subrun_mul(Subrun("p", s, "q"), Subrun("q", t, "r")) == Subrun("p", s.compose(t), "r")
    assert subrun_mul(Subrun("p", s, "q"), Subrun("r", t, "s")) is BOTTOM
    assert subrun_mul(BOTTOM, Subrun("r", t, "s")) is BOTTOM
    assert subrun_mul(Subrun("r", t, "s"), BOTTOM) is BOTTOM


def test_summarize_examples():
    names = iter(["Y1", "Y2", "Y3"])
    skel, zeta = summarize_assign(A(X=("ab", Y, "c")), names)
    assert skel == A(X=(Fresh("Y1"), Y, Fresh("Y2")))
    assert zeta == A(Y1=("ab",), Y2=("c",))
    skel, zeta = summarize_assign(A(X=()), iter(["Y1"]))
    assert skel == A(X=(Fresh("Y1"),)) and zeta == A(Y1=())
    with pytest.raises(SupplyExhausted):
        summarize_assign(A(X=("a", Y, "b")), iter(["Y1"]))


def test_summary_reconstruction_two_entries():
    s = A(X=("a", X, "b", Y), Y=("c",))
    skel, zeta = summarize_assign(s, lambda x, j: f"{x}{j}")
    assert unsummarize(skel, zeta) == s
    zx = {n for n in zeta if n.startswith("X")}
    zy = {n for n in zeta if n.startswith("Y")}
    assert zx and zy and not zx & zy


def test_index_assign():
    s = A(X=("ba", X, "ab"), Y=(X, "b"), Z=())
    ind = index_assign(s)
    assert ind["X"] == (Index("b", "X", 1), Index("a", "X", 2), X, Index("a", "X", 4), Index("b", "X", 5))
    assert ind["Y"] == (X, Index("b", "Y", 2))
    assert ind["Z"] == (Index("", "Z", 1),)
    assert ind.erase() == s
    rel = index_assign(A(X=(Y,), Y=(X,)))
    assert not any(i.letter for i in rel.indices)
    one = index_assign(A(X=("a",)))
    assert one.indices == frozenset({Index("a", "X", 1)})
    assert index_word(()) == (Index("", None, 1),)


def test_identity_first_machine(seed):
    rng = random.Random(seed)
    I = identity_dsst("ab")
    for _ in range(5):
        T2 = random_gf_nsst(rng, 2, 2, "ab", "ab", shrink_sigma=False)
        C = compose_nsst(I, T2)
        for w in words("ab", 5):
            assert nsst_bag(C, w) == nsst_bag(T2, w)


def test_identity_second_machine():
    G = garbage_nsst()
    C = compose_nsst(G, identity_dsst("ab"))
    for w in words("ab", 5):
        assert nsst_bag(C, w) == nsst_bag(G, w)


def test_duplicate_transition_multiplicities():
    loop = ("p", "a", A(X=(X, "a")), "p")
    T1 = Nsst(["p", "q"], "a", "ab", ["X"], [loop, loop, ("p", "a", A(X=(X, "b")), "q")],
              {"p": A(X="")}, {"p": (X,), "q": (X,)})
    T2 = garbage_nsst()
    C = compose_nsst(T1, T2)
    for w in words("a", 4):
        assert nsst_bag(C, w) == compose_bag(T1, T2, w)
    assert any(k > 1 for w in words("a", 4) for _, k in compose_bag(T1, T2, w).canonical())


def test_alphabet_mismatch_and_cap():
    with pytest.raises(AlphabetMismatch):
        compose_nsst(identity_dsst("abc"), identity_dsst("ab"))
    with pytest.raises(SizeBudgetExceeded):
        compose_nsst(garbage_nsst(), garbage_nsst(), max_states=2)


def test_random_pairs(seed):
    rng = random.Random(seed)
    for _ in range(10):
        T1 = random_nsst(rng, 2, 2, "ab", "ab", shrink_sigma=False)
        T2 = random_nsst(rng, 2, 2, "ab", "ab", shrink_sigma=False)
        C = compose_nsst(T1, T2)
        for w in words("ab", 3):
            assert nsst_bag(C, w) == compose_bag(T1, T2, w)


def _random_assignment(rng, regs="XYZ", out="ab"):
    dom = [r for r in regs if rng.random() < 0.7] or ["X"]
    used = [r for r in regs if rng.random() < 0.7]
    groups = split_regs(rng, used, len(dom))
    return Assignment({x: random_image(rng, g, out) for x, g in zip(dom, groups)})


def test_semigroup_associativity(seed):
    rng = random.Random(seed)
    for _ in range(500):
        a, b, c = (Subrun(rng.choice("pq"), _random_assignment(rng), rng.choice("pq")) for _ in range(3))
        assert subrun_mul(subrun_mul(a, b), c) == subrun_mul(a, subrun_mul(b, c))
        assert subrun_fold([a, b, c]) == subrun_mul(subrun_mul(a, b), c)
