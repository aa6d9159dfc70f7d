"""Small ready-made machines and documents used by tests and the CLI demos."""

from __future__ import annotations

from .core import Close, MultispanTuple, Open
from .spanner import parse_expr
from .sst import Assignment, Dsst, Nsst, Reg

SINGERS = (
    "#Holiday;Billie;USA#Bush;Kate;England#Young;Neil;Canada;78;\"Godfather of Grunge\""
    "#King;Carole;USA;81#McCartney;Paul;England;Sir;CH;MBE#Mitchell;Joni;Canada;painter"
    "#Franklin;Aretha;USA;\"Queen of Soul\"#O’Riordan;Dolores;Ireland;†01/15/2018"
    "#Bowie;David;England#Dylan;Bob;USA;82#Young;Neil;USA#Gallagher;Rory;Ireland#"
)

SINGER_NAMES = [
    "Billie Holiday", "Kate Bush", "Neil Young", "Carole King", "Paul McCartney",
    "Joni Mitchell", "Aretha Franklin", "Dolores O’Riordan", "David Bowie",
    "Bob Dylan", "Neil Young", "Rory Gallagher",
]

E1_TEXT = r".* \# x{[^;\#]*} ; y{[^;\#]*} ; .*"

RUNNING_EXPR_TEXT = "(_ + .* a+) x{ (y{b+} y{a+})* y{b+} } (a+ .* + _)"
RUNNING_DOC = "aababbbaab"


def e1():
    return parse_expr(E1_TEXT)


def running_expr():
    return parse_expr(RUNNING_EXPR_TEXT)


def running_word():
    """The annotated word of the running multispan example."""
    X, Y = Open("x"), Open("y")
    cx, cy = Close("x"), Close("y")
    return ("a", "a", X, Y, "b", cy, Y, "a", cy, Y, "b", "b", "b", cy, Y, "a", "a", cy, Y, "b", cy, cx)


def running_tuple():
    return MultispanTuple(x=[(3, 11)], y=[(3, 4), (4, 5), (5, 8), (8, 10), (10, 11)])


def t1(alphabet=None, separators=";#"):
    """The DSST that swaps the two captured fields, writing ``y x``."""
    sigma = set(SINGERS) if alphabet is None else set(alphabet)
    hat = sorted(sigma - set(separators))
    regs = ("X", "Y")
    ident = Assignment.identity(regs)
    delta = {}
    for a in sorted(sigma):
        delta[("q0", a)] = (ident, "q0")
        delta[("q3", a)] = (ident, "q3")
    for a in hat:
        delta[("q1", a)] = (Assignment(X=(Reg("X"), a), Y=(Reg("Y"),)), "q1")
        delta[("q2", a)] = (Assignment(X=(Reg("X"),), Y=(Reg("Y"), a)), "q2")
    delta[("q0", Open("x"))] = (ident, "q1")
    delta[("q1", Close("x"))] = (ident, "q1a")
    delta[("q1a", ";")] = (ident, "q1b")
    delta[("q1b", Open("y"))] = (ident, "q2")
    delta[("q2", Close("y"))] = (ident, "q3")
    inp = sigma | {Open("x"), Close("x"), Open("y"), Close("y")}
    out = set(hat) | {" "}
    final = {"q3": (Reg("Y"), " ", Reg("X"))}
    return Dsst(["q0", "q1", "q1a", "q1b", "q2", "q3"], inp, out, regs, delta, "q0", final)


def garbage_nsst():
    """Outputs a^n when the word ends with a and b^m when it ends with b."""
    regs = ("X", "Y")
    on_a = Assignment(X=("a", Reg("X")), Y=(Reg("Y"),))
    on_b = Assignment(X=(Reg("X"),), Y=("b", Reg("Y")))
    trans = [
        ("q", "a", on_a, "q"),
        ("q", "b", on_b, "q"),
        ("q", "a", on_a, "p"),
        ("q", "b", on_b, "r"),
    ]
    return Nsst(["q", "p", "r"], "ab", "ab", regs, trans,
                {"q": Assignment.empty_valuation(regs)},
                {"p": (Reg("X"),), "r": (Reg("Y"),)})


def identity_dsst(alphabet):
    """Copies its input."""
    delta = {("q", a): (Assignment(X=(Reg("X"), a)), "q") for a in alphabet}
    return Dsst(["q"], alphabet, alphabet, ["X"], delta, "q", {"q": (Reg("X"),)})
