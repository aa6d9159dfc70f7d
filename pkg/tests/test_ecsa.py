import random

import pytest

from ettx.core import Bag
from ettx.ecsa import GAMMA, SIGMA, UNION, Ecsa
from ettx.errors import PreconditionViolation
from ettx.sst import Assignment, Reg
from ettx.testing import EcsaDriver

X, Y = Reg("X"), Reg("Y")
E = Assignment(X="", Y="")


def A(**kw):
    return Assignment(kw)


def test_add():
    D = Ecsa()
    n = D.add(E)
    assert D.materialize(n) == Bag([E])
    m = D.add(E)
    assert m != n
    assert D.materialize(m) == D.materialize(n)
    assert D.odepth(n) == 0 and D.is_safe(n)


def test_extend():
    D = Ecsa()
    n = D.extend(D.add(A(X="")), A(X=(X, "a")))
    assert D.materialize(n) == Bag([A(X="a")])
    m = D.add(A(X="b"))
    for _ in range(100):
        m = D.extend(m, A(X=("a", X)))
        assert D.odepth(m) == 0
    assert list(D.enumerate(m)) == [A(X="a" * 100 + "b")]


def test_relabels_fuse():
    D = Ecsa()
    base = D.extend(D.add(A(X="a", Y="b")), A(X=(X, "c"), Y=(Y,)))
    swap = A(X=(Y,), Y=(X,))
    g = D.extend(base, swap)
    assert D.kind[g] == GAMMA
    drop = A(X=(X,))
    g2 = D.extend(g, drop)
    assert D.kind[g2] == GAMMA
    assert D.left[g2] == base
    assert D.label[g2] == swap.compose(drop)
    assert D.materialize(g2) == Bag([A(X="b")])


def test_union_basic():
    D = Ecsa()
    a, b = A(X="a"), A(X="b")
    u = D.union(D.add(a), D.add(b))
    assert list(D.enumerate(u)) == [a, b]
    n = D.extend(D.add(a), A(X=(X, "c")))
    uu = D.union(n, n)
    assert D.materialize(uu) == Bag([A(X="ac"), A(X="ac")])


def _s6(D, tag):
    """gamma over a union whose left child is gamma over a sigma node."""
    s1 = D.extend(D.add(A(X=tag, Y="")), A(X=(X, "1"), Y=(Y,)))
    g1 = D.extend(s1, A(X=(Y,), Y=(X,)))
    m1 = D.extend(D.add(A(X="", Y=tag + "m")), A(X=(X,), Y=(Y, "2")))
    u = D.union(g1, m1)
    u = D.extend(u, A(X=(Y,), Y=(X,)))
    return s1, m1, u


def test_union_of_shape6_nodes():
    D = Ecsa()
    s1, m1, n1 = _s6(D, "p")
    s2, m2, n2 = _s6(D, "q")
    assert D.shape(n1) == D.shape(n2) == 6
    before = len(D)
    r = D.union(n1, n2)
    assert len(D) - before <= 7
    assert D.kind[r] == UNION
    left = D.left[r]
    assert D.kind[left] == GAMMA and D.left[left] == s1
    assert D.kind[s1] == SIGMA
    assert {m1, m2} <= D.reachable(r)
    assert D.is_safe(r) and D.odepth(r) <= 4
    assert D.materialize(r) == D.materialize(n1) + D.materialize(n2)
    assert Bag(D.enumerate(r)) == D.materialize(r)


def test_odepth():
    D = Ecsa()
    n = D.add(A(X="a"))
    assert D.odepth(n) == 0
    assert D.odepth(D.extend(n, A(Y=(X,)))) == 1


def test_debug_preconditions():
    D = Ecsa(debug=True)
    with pytest.raises(PreconditionViolation):
        D.union(D.add(A(X="a")), D.add(A(Y="a")))
    with pytest.raises(PreconditionViolation):
        D.extend(D.add(A(X="a")), A(X=(X, Y)))
    with pytest.raises(PreconditionViolation):
        D.add(A(X=(X,)))


def test_random_operations_stay_safe(seed):
    rng = random.Random(seed)
    D = Ecsa()
    drv = EcsaDriver(D, rng)
    for _ in range(2000):
        n = drv.step()
        assert D.is_safe(n)
        assert D.odepth(n) <= 4


def test_enumeration_matches_materialize(seed):
    rng = random.Random(seed)
    for _ in range(50):
        D = Ecsa(debug=True)
        drv = EcsaDriver(D, rng)
        for _ in range(20):
            drv.step()
        for n in rng.sample(drv.nodes, 3):
            assert Bag(D.enumerate(n)) == D.materialize(n)


def test_persistence(seed):
    rng = random.Random(seed)
    D = Ecsa()
    drv = EcsaDriver(D, rng)
    snapshots = {}
    for i in range(300):
        n = drv.step()
        if i % 10 == 0:
            snapshots[n] = D.materialize(n)
        if snapshots and i % 7 == 0:
            m = rng.choice(list(snapshots))
            assert Bag(D.enumerate(m)) == snapshots[m]
    for m, b in snapshots.items():
        assert D.materialize(m) == b


def test_dump_lists_nodes():
    D = Ecsa()
    u = D.union(D.add(A(X="a")), D.add(A(X="b")))
    lines = D.dump().splitlines()
    assert len(lines) == len(D)
    assert lines[u].split()[:2] == [str(u), "union"]
