"""Compiling an extract-transform program into a single NSST.

The extractor is turned into a deterministic automaton for its canonical
words (each followed by the end marker).  The compiled machine runs that
automaton in lockstep with the transformer: between two document symbols
it guesses a bracket block by following an actual path of the automaton
and folds the transformer's assignments along the same path into the
assignment of the next document symbol.

After the last symbol the automaton still has to read a final bracket
block and the end marker.  An NSST has one template per state, but one
state pair can finish in several ways, so every finishing option gets its
own copy of the state (a "done" state with no outgoing transitions).
"""

from __future__ import annotations

from .core import END, Close, Open, is_marker, symbol_key
from .errors import AlphabetMismatch, NotDeterministic
from .spanner import NormalizedDfa, SpannerSpec, literals_of, spanner_dfa, variables_of
from .sst import Assignment, Dsst, Nsst, as_nsst, garbage_free_transform, is_deterministic, to_dsst, trim


class EtProgram:
    """An extractor expression paired with a deterministic transformer.

    ``alphabet`` is the document alphabet; by default the transformer's
    non-bracket input symbols together with the expression's literals.
    A loaded ``.msre`` spec may stand in for the expression; its explicit
    alphabet is then the default.
    Compiled machines are cached on the instance.
    """

    def __init__(self, extractor, transformer, alphabet=None):
        if not isinstance(transformer, Dsst):
            if not is_deterministic(transformer) or len(as_nsst(transformer).initial) != 1:
                raise NotDeterministic("the transformer of a program must be deterministic")
            transformer = to_dsst(transformer)
        if isinstance(extractor, SpannerSpec):
            if alphabet is None and extractor.alphabet is not None:
                alphabet = extractor.alphabet
            extractor = extractor.expr
        self.extractor = extractor
        self.transformer = transformer
        letters = {a for a in transformer.input_alphabet if not is_marker(a)}
        if alphabet is None:
            alphabet = letters | set(literals_of(extractor))
        self.alphabet = frozenset(alphabet)
        self.variables = tuple(sorted(variables_of(extractor)))
        self._check()
        self._dfa = None
        self._nsst = None
        self._gf = None
        self.stats = {}

    def _check(self):
        inp = self.transformer.input_alphabet
        missing = [a for a in self.alphabet if a not in inp]
        for x in self.variables:
            for m in (Open(x), Close(x)):
                if m not in inp:
                    missing.append(m)
        if missing:
            shown = ", ".join(sorted(map(str, missing)))
            raise AlphabetMismatch(f"transformer does not read: {shown}")
        extra = set(literals_of(self.extractor)) - self.alphabet
        if extra:
            raise AlphabetMismatch(f"expression uses symbols outside the alphabet: {sorted(extra)}")

    @property
    def dfa(self) -> NormalizedDfa:
        if self._dfa is None:
            self._dfa = spanner_dfa(self.extractor, self.alphabet)
        return self._dfa

    def nsst(self) -> Nsst:
        if self._nsst is None:
            self._nsst = et_to_nsst(self)
        return self._nsst

    def garbage_free(self) -> Nsst:
        if self._gf is None:
            self._gf = garbage_free_transform(self.nsst())
        return self._gf


def et_to_nsst(program: EtProgram, dfa: NormalizedDfa = None) -> Nsst:
    M = dfa or program.dfa
    T = program.transformer
    ident = Assignment.identity(T.registers)

    def expand(p, q):
        """Letter transitions and finishing templates out of the pair (p, q)."""
        letters, finishes = [], []
        stack = [(p, q, ident)]
        while stack:
            pc, qc, acc = stack.pop()
            stats["gamma_paths"] += 1
            for sym, p2 in sorted(M.delta[pc].items(), key=lambda kv: symbol_key(kv[0]), reverse=True):
                if sym == END:
                    tpl = T.final.get(qc)
                    out = acc.substitute(tpl) if tpl is not None else None
                    if out is not None:
                        finishes.append(out)
                    continue
                step = T.delta.get((qc, sym))
                if step is None:
                    continue
                sigma, q2 = step
                if is_marker(sym):
                    stack.append((p2, q2, acc.compose(sigma)))
                else:
                    letters.append((sym, acc.compose(sigma), (p2, q2)))
        return letters, finishes

    stats = {"gamma_paths": 0, "pairs": 0}
    start = (M.start, T.start)
    seen = {start: None}
    order = [start]
    transitions = []
    finishes = {}
    i = 0
    while i < len(order):
        pair = order[i]
        i += 1
        letters, fins = expand(*pair)
        finishes[pair] = fins
        for sym, sigma, dst in letters:
            transitions.append((pair, sym, sigma, dst))
            if dst not in seen:
                seen[dst] = None
                order.append(dst)
    stats["pairs"] = len(order)

    def live(pair):
        return ("p",) + pair

    def done(pair, k):
        return ("done",) + pair + (k,)

    states = []
    for pair in order:
        states.append(live(pair))
        states.extend(done(pair, k) for k in range(len(finishes[pair])))
    trans = []
    for src, sym, sigma, dst in transitions:
        trans.append((live(src), sym, sigma, live(dst)))
        for k in range(len(finishes[dst])):
            trans.append((live(src), sym, sigma, done(dst, k)))
    initial = {live(start): T.init}
    for k in range(len(finishes[start])):
        initial[done(start, k)] = T.init
    final = {}
    for pair in order:
        for k, tpl in enumerate(finishes[pair]):
            final[done(pair, k)] = tpl
    N = Nsst(states, program.alphabet, T.output_alphabet, T.registers, trans, initial, final, check=False)
    N = trim(N)
    stats["states"] = len(N.states)
    stats["transitions"] = len(N.transitions)
    program.stats.update(stats)
    return N


def et_evaluate(program: EtProgram, document, **kw):
    """Enumerable bag of outputs of the program on a document."""
    from .evaluation import evaluate

    return evaluate(program.garbage_free(), document, **kw)
