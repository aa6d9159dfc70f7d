"""Reading and writing the ``.sst`` transducer format.

    # comment
    states: q0 q1
    input: "ab;#" <x x>        # or: input: infer <x x>
    output: infer
    registers: X Y
    init: q0 { X := ; Y := "ab" }
    final: q1 -> Y \\s X
    trans: q0 [^;#] q0 { X := X "a"; Y := Y }
    trans: q0 <x q1            # no braces: identity on every register

Words are whitespace-separated items: a declared register name, a single
letter, a "quoted run" of letters, an escape (``\\s`` is a space), or ``ε``.
In transition lines ``.`` and ``[...]`` stand for alphabet classes and
expand to one transition per symbol; inside the braces of such a line a
bare ``@`` is the symbol being read (write ``\\@`` for a literal at-sign).
"""

from __future__ import annotations

import re

from .core import Close, Open, is_marker, symbol_key
from .errors import AlphabetError, NotDeterministic, ParseError, SpecError
from .sst import Assignment, Nsst, Reg, is_deterministic, norm_word, to_dsst

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_ESC = {"s": " ", "n": "\n", "t": "\t"}
_DELIMS = set('{};"\\')
_READ = object()  # placeholder for the symbol read by a transition


class _LineError(Exception):
    def __init__(self, msg, pos=None):
        super().__init__(msg)
        self.pos = pos


def _tokens(s: str):
    out = []
    i = 0
    n = len(s)
    while i < n:
        c = s[i]
        if c.isspace():
            i += 1
            continue
        start = i
        if c == '"':
            i += 1
            buf = []
            while True:
                if i >= n:
                    raise _LineError("unterminated string", start)
                if s[i] == '"':
                    i += 1
                    break
                if s[i] == "\\":
                    if i + 1 >= n:
                        raise _LineError("dangling escape", i)
                    buf.append(_ESC.get(s[i + 1], s[i + 1]))
                    i += 2
                else:
                    buf.append(s[i])
                    i += 1
            out.append(("str", "".join(buf), start))
        elif c == "\\":
            if i + 1 >= n:
                raise _LineError("dangling escape", i)
            out.append(("esc", _ESC.get(s[i + 1], s[i + 1]), start))
            i += 2
        elif c in "{};":
            out.append(("punct", c, start))
            i += 1
        elif s.startswith(":=", i):
            out.append(("punct", ":=", start))
            i += 2
        elif c == "[":
            j = i + 1
            while j < n and s[j] != "]":
                j += 2 if s[j] == "\\" else 1
            if j >= n:
                raise _LineError("unterminated class", start)
            out.append(("class", s[i:j + 1], start))
            i = j + 1
        else:
            j = i
            while j < n and not s[j].isspace() and s[j] not in _DELIMS and not s.startswith(":=", j):
                j += 1
            out.append(("bare", s[i:j], start))
            i = j
    return out


def _symbols_of(tok):
    kind, val, pos = tok
    if kind == "str":
        return list(val)
    if kind == "esc":
        return [val]
    if kind == "bare":
        if len(val) == 1:
            return [val]
        if val.startswith("<") and _IDENT.match(val[1:]):
            return [Open(val[1:])]
        if val.endswith(">") and _IDENT.match(val[:-1]):
            return [Close(val[:-1])]
    raise _LineError(f"bad symbol {val!r}", pos)


def _items_of(tok, registers):
    kind, val, pos = tok
    if kind == "str":
        return [val]
    if kind == "esc":
        return [val]
    if kind == "bare":
        if val in registers:
            return [Reg(val)]
        if val == "ε":
            return []
        if val == "@":
            return [_READ]
        if len(val) == 1:
            return [val]
        raise _LineError(f"unknown register {val!r}", pos)
    raise _LineError(f"unexpected {val!r}", pos)


def parse_items(text: str, registers) -> tuple:
    out = []
    for tok in _tokens(text):
        out.extend(_items_of(tok, set(registers)))
    return norm_word(out)


def _parse_body(toks, registers):
    """Tokens between braces: X := word ; Y := word ..."""
    regs = set(registers)
    m = {}
    i = 0
    while i < len(toks):
        if toks[i][:2] == ("punct", ";"):
            i += 1
            continue
        kind, name, pos = toks[i]
        if kind != "bare" or name not in regs:
            raise _LineError(f"expected a register name, got {name!r}", pos)
        if i + 1 >= len(toks) or toks[i + 1][:2] != ("punct", ":="):
            raise _LineError(f"expected ':=' after {name}", pos)
        if name in m:
            raise _LineError(f"register {name} assigned twice", pos)
        i += 2
        items = []
        while i < len(toks) and toks[i][:2] != ("punct", ";"):
            items.extend(_items_of(toks[i], regs))
            i += 1
        m[name] = items
    return m


def _finish_body(m, read=None):
    out = {}
    for x, items in m.items():
        if any(it is _READ for it in items):
            if read is None or is_marker(read):
                raise _LineError("'@' is only allowed on transitions reading a letter")
            items = [read if it is _READ else it for it in items]
        out[x] = norm_word(items)
    return Assignment(out)


def parse_assignment_body(text: str, registers) -> Assignment:
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    try:
        return _finish_body(_parse_body(_tokens(text), registers))
    except _LineError as exc:
        raise ParseError(str(exc), exc.pos) from None


def _split_braced(toks):
    """Split tokens into (head, body or None)."""
    for i, t in enumerate(toks):
        if t[:2] == ("punct", "{"):
            if toks[-1][:2] != ("punct", "}"):
                raise _LineError("missing '}'", t[2])
            body = toks[i + 1:-1]
            if any(b[:2] in (("punct", "{"), ("punct", "}")) for b in body):
                raise _LineError("nested braces", t[2])
            return toks[:i], body
    return toks, None


def _parse_class(raw, sigma):
    from .spanner import parse_expr

    node = parse_expr(raw)
    return node.resolve(sigma)


def load_sst(text: str, alphabet=None, source=None, deterministic=None):
    """Parse a transducer.  Returns a Dsst when the file is deterministic.

    ``alphabet`` supplies the document symbols for ``input: infer``.
    Pass ``deterministic=False`` to always get an Nsst.
    """
    sections = {"states": None, "input": None, "output": None, "registers": None}
    inits, finals, trans = [], [], []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ParseError("expected 'section: ...'", line=lineno, source=source)
        key, rest = stripped.split(":", 1)
        key = key.strip()
        if key in sections:
            if sections[key] is not None:
                raise ParseError(f"duplicate '{key}:' section", line=lineno, source=source)
            sections[key] = (rest, lineno)
        elif key == "init":
            inits.append((rest, lineno))
        elif key == "final":
            finals.append((rest, lineno))
        elif key == "trans":
            trans.append((rest, lineno))
        else:
            raise ParseError(f"unknown section {key!r}", line=lineno, source=source)
    for key in ("states", "registers"):
        if sections[key] is None:
            sections[key] = ("", 0)
    try:
        return _build(sections, inits, finals, trans, alphabet, source, deterministic)
    except _LineError as exc:
        raise ParseError(str(exc), exc.pos, getattr(exc, "line", None), source) from None


def _at(lineno, fn, *args):
    try:
        return fn(*args)
    except _LineError as exc:
        exc.line = lineno
        raise
    except (SpecError, ValueError) as exc:
        err = _LineError(str(exc))
        err.line = lineno
        raise err from None


def _build(sections, inits, finals, trans, alphabet, source, deterministic):
    states_txt, ln = sections["states"]
    states = [v for k, v, p in _at(ln, _tokens, states_txt)]
    regs_txt, ln = sections["registers"]
    registers = [v for k, v, p in _at(ln, _tokens, regs_txt)]
    for r in registers:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", r):
            e = _LineError(f"bad register name {r!r}")
            e.line = ln
            raise e
    state_set = set(states)

    def state(tok, lineno):
        if tok[0] != "bare" or tok[1] not in state_set:
            e = _LineError(f"undeclared state {tok[1]!r}", tok[2])
            e.line = lineno
            raise e
        return tok[1]

    # input alphabet
    infer_input = False
    declared_in = set()
    if sections["input"] is not None:
        txt, ln = sections["input"]
        for tok in _at(ln, _tokens, txt):
            if tok[:2] == ("bare", "infer"):
                infer_input = True
            else:
                declared_in.update(_at(ln, _symbols_of, tok))
    else:
        infer_input = True
    explicit = set()
    parsed_trans = []
    for txt, ln in trans:
        toks = _at(ln, _tokens, txt)
        head, body = _at(ln, _split_braced, toks)
        if len(head) != 3:
            e = _LineError("expected 'trans: source symbol target { ... }'")
            e.line = ln
            raise e
        src = state(head[0], ln)
        dst = state(head[2], ln)
        symtok = head[1]
        if symtok[0] == "class" or symtok[:2] == ("bare", "."):
            syms = None
            raw = symtok[1]
        else:
            syms = _at(ln, _symbols_of, symtok)
            if len(syms) != 1:
                e = _LineError("transition symbol must be a single symbol", symtok[2])
                e.line = ln
                raise e
            explicit.update(syms)
            raw = None
        if body is None:
            sigma = {r: [Reg(r)] for r in registers}
        else:
            sigma = _at(ln, _parse_body, body, registers)
        parsed_trans.append((src, syms, raw, dst, sigma, ln))
    if infer_input:
        letters = set(alphabet) if alphabet is not None else {s for s in explicit if not is_marker(s)}
        input_alphabet = letters | declared_in | {s for s in explicit if is_marker(s)}
    else:
        input_alphabet = declared_in
    sigma_part = {s for s in input_alphabet if not is_marker(s)}

    transitions = []
    for src, syms, raw, dst, asg, ln in parsed_trans:
        if syms is None:
            syms = sorted(_at(ln, _parse_class, raw, sigma_part), key=symbol_key)
        for s in syms:
            if s not in input_alphabet:
                e = _LineError(f"symbol {s!r} is not in the input alphabet")
                e.line = ln
                raise e
            transitions.append((src, s, _at(ln, _finish_body, asg, s), dst))

    initial = {}
    for txt, ln in inits:
        toks = _at(ln, _tokens, txt)
        head, body = _at(ln, _split_braced, toks)
        if len(head) != 1:
            e = _LineError("expected 'init: state { ... }'")
            e.line = ln
            raise e
        q = state(head[0], ln)
        if q in initial:
            e = _LineError(f"duplicate init for {q}")
            e.line = ln
            raise e
        v = Assignment.empty_valuation(registers) if body is None else _at(ln, _finish_body, _at(ln, _parse_body, body, registers))
        if not v.is_valuation():
            e = _LineError("initial values cannot mention registers")
            e.line = ln
            raise e
        initial[q] = v

    final = {}
    for txt, ln in finals:
        if "->" not in txt:
            e = _LineError("expected 'final: state -> template'")
            e.line = ln
            raise e
        left, right = txt.split("->", 1)
        ltoks = _at(ln, _tokens, left)
        if len(ltoks) != 1:
            e = _LineError("expected a single state before '->'")
            e.line = ln
            raise e
        q = state(ltoks[0], ln)
        if q in final:
            e = _LineError(f"duplicate final for {q}")
            e.line = ln
            raise e
        items = []
        for tok in _at(ln, _tokens, right):
            items.extend(_at(ln, _items_of, tok, set(registers)))
        if any(it is _READ for it in items):
            e = _LineError("'@' is only allowed on transitions reading a letter")
            e.line = ln
            raise e
        final[q] = norm_word(items)

    letters_used = set()
    for _, _, asg, _ in transitions:
        for _, w in asg.items():
            for it in w:
                if isinstance(it, str):
                    letters_used.update(it)
    for v in initial.values():
        for _, w in v.items():
            for it in w:
                letters_used.update(it)
    for w in final.values():
        for it in w:
            if isinstance(it, str):
                letters_used.update(it)
    output_alphabet = set()
    infer_output = True
    if sections["output"] is not None:
        txt, ln = sections["output"]
        for tok in _at(ln, _tokens, txt):
            if tok[:2] == ("bare", "infer"):
                continue
            infer_output = False
            output_alphabet.update(_at(ln, _symbols_of, tok))
        if not infer_output and "infer" in txt.split():
            infer_output = True
    if infer_output:
        output_alphabet |= letters_used
    elif not letters_used <= output_alphabet:
        raise AlphabetError(f"letters {sorted(letters_used - output_alphabet)} are not in the output alphabet")
    if any(is_marker(a) for a in output_alphabet):
        raise AlphabetError("output letters must be characters")

    T = Nsst(states, input_alphabet, output_alphabet, registers, transitions, initial, final)
    if deterministic is False:
        return T
    if is_deterministic(T) and len(T.initial) == 1:
        return to_dsst(T)
    if deterministic:
        raise NotDeterministic("transducer file is not deterministic")
    return T


def read_sst(path, alphabet=None, deterministic=None):
    with open(path, encoding="utf-8") as fh:
        return load_sst(fh.read(), alphabet=alphabet, source=str(path), deterministic=deterministic)


# -- writing --------------------------------------------------------------

_PLAIN = re.compile(r"[^\s{}\[\];\"\\.]\Z")


def _sym_token(s) -> str:
    if is_marker(s):
        return str(s)
    if s == " ":
        return "\\s"
    if s == "\n":
        return "\\n"
    if s == "\t":
        return "\\t"
    if _PLAIN.match(s) and s != "ε":
        return s
    return "\\" + s


def _quote(text: str) -> str:
    text = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{text}"'


def _word_text(word, names) -> str:
    parts = []
    for it in word:
        if isinstance(it, Reg):
            parts.append(names[it.name])
        elif isinstance(it, str):
            parts.append(_quote(it))
        else:
            raise SpecError(f"cannot serialize item {it!r}")
    return " ".join(parts)


def _body(asg, names) -> str:
    return "{ " + "; ".join(f"{names[r]} := {_word_text(asg[r], names)}" for r in sorted(asg, key=lambda r: names[r])) + " }"


def state_names(states) -> dict:
    names = {}
    plain = all(isinstance(q, str) and re.fullmatch(r"[A-Za-z0-9_]+", q) for q in states)
    for i, q in enumerate(states):
        names[q] = q if plain else f"s{i}"
    return names


def dump_sst(T) -> str:
    """Serialize as an .sst file (the nondeterministic form)."""
    T = T.to_nsst()
    names = state_names(T.states)
    rnames = {r: r for r in T.registers}
    lines = []
    lines.append("states: " + " ".join(names[q] for q in T.states))
    lines.append("input: " + " ".join(_sym_token(s) for s in sorted(T.input_alphabet, key=symbol_key)))
    out_letters = sorted(T.output_alphabet)
    lines.append("output: " + (" ".join(_sym_token(s) for s in out_letters) if out_letters else "infer"))
    lines.append("registers: " + " ".join(T.registers))
    for q in T.states:
        if q in T.initial:
            lines.append(f"init: {names[q]} {_body(T.initial[q], rnames)}")
    for q in T.states:
        if q in T.final:
            lines.append(f"final: {names[q]} -> {_word_text(T.final[q], rnames)}")
    for t in T.transitions:
        lines.append(f"trans: {names[t.source]} {_sym_token(t.symbol)} {names[t.target]} {_body(t.assignment, rnames)}")
    return "\n".join(lines) + "\n"


def write_sst(T, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_sst(T))
