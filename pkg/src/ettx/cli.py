"""The ``ettx`` command line.

Exit status is 0 on success, 1 for malformed input, 2 when a resource cap
is hit and 3 when ``run --oracle`` finds a disagreement.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .compile import EtProgram
from .compose import DEFAULT_MAX_STATES, compose_nsst
from .core import Bag
from .errors import CapError, EttxError, ParseError, SpecError
from .evaluation import evaluate
from .oracle import compose_bag, enumerate_tuples, et_bag, nsst_bag
from .spanner import load_msre
from .sst import (Budget, all_copyless, as_nsst, branching_factor, garbage_free_transform,
                  is_deterministic, is_garbage_free)
from .sstfile import dump_sst, load_sst

EXIT_OK, EXIT_SPEC, EXIT_CAP, EXIT_MISMATCH = 0, 1, 2, 3

CONFIG_KEYS = {
    "limit": int,
    "budget": int,
    "max_states": int,
    "strategy": str,
    "stats": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
    "oracle": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}


# -- output lines ----------------------------------------------------------


def escape_line(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\n", "\\n")


def unescape_line(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            out.append("\n" if nxt == "n" else nxt)
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


# -- files -----------------------------------------------------------------


def read_text(path) -> str:
    if path == "-":
        data = sys.stdin.buffer.read().decode("utf-8")
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            data = fh.read()
    return data


def read_document(path) -> str:
    text = read_text(path)
    # one trailing line break belongs to the file, not the document
    if text.endswith("\r\n"):
        return text[:-2]
    if text.endswith("\n"):
        return text[:-1]
    return text


def read_config(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected key = value", line=lineno, source=path)
            key, val = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise ParseError(f"unknown key {key!r}", line=lineno, source=path)
            val = val.strip('"')
            try:
                out[key] = CONFIG_KEYS[key](val)
            except ValueError:
                raise ParseError(f"bad value for {key}: {val!r}", line=lineno, source=path) from None
    return out


# -- pipelines -------------------------------------------------------------


@dataclass
class PipelineSpec:
    stages: list  # (spanner path or None, transducer path)
    input: str = "-"
    limit: int = None
    stats: bool = False
    budget: int = None
    max_states: int = DEFAULT_MAX_STATES
    dump_ecsa: str = None
    strategy: str = "fold"
    oracle: bool = False

    def budget_obj(self):
        if self.budget is None:
            return Budget()
        return Budget(max_configurations=self.budget, max_candidates=self.budget)


def stage_list(spanners, transducers):
    spanners = spanners or []
    transducers = transducers or []
    if not transducers:
        raise SpecError("at least one --transducer is required")
    if spanners and len(spanners) != len(transducers):
        raise SpecError("give one --spanner per --transducer (or none at all)")
    if not spanners:
        return [(None, t) for t in transducers]
    return list(zip(spanners, transducers))


class LoadedStage:
    """One pipeline stage; ``machine()`` is the stage as an NSST."""

    def __init__(self, spanner_path, transducer_path, letters):
        self.program = None
        self._machine = None
        if spanner_path is not None:
            spec = load_msre(read_text(spanner_path), source=spanner_path)
            alphabet = spec.resolve_alphabet(letters)
            T = load_sst(read_text(transducer_path), alphabet=alphabet, source=transducer_path,
                         deterministic=True)
            self.program = EtProgram(spec.expr, T, alphabet=alphabet)
            self.output_alphabet = frozenset(T.output_alphabet)
        else:
            self._machine = as_nsst(load_sst(read_text(transducer_path), alphabet=letters,
                                             source=transducer_path, deterministic=False))
            self.output_alphabet = frozenset(self._machine.output_alphabet)

    def machine(self):
        if self._machine is None:
            self._machine = self.program.nsst()
        return self._machine

    def oracle_bag(self, document, budget) -> Bag:
        if self.program is not None:
            return et_bag(self.program, document, budget)
        return nsst_bag(self._machine, document, budget)


def load_stages(spec: PipelineSpec, document):
    letters = frozenset(document)
    out = []
    for sp, tr in spec.stages:
        st = LoadedStage(sp, tr, letters)
        out.append(st)
        letters = st.output_alphabet
    return out


def fold_machine(stages, max_states=DEFAULT_MAX_STATES):
    M = stages[0].machine()
    for st in stages[1:]:
        M = compose_nsst(M, st.machine(), max_states=max_states)
    if not is_garbage_free(M):
        M = garbage_free_transform(M)
    return M


def nested_bag(stages, document, budget) -> Bag:
    bag = Bag([document])
    for st in stages:
        nxt = Bag()
        for u, k in bag.canonical():
            for v, m in st.oracle_bag(u, budget).canonical():
                nxt.add(v, k * m)
        bag = nxt
    return bag


# -- commands --------------------------------------------------------------


def _emit_stats(stats, err):
    for k in sorted(stats):
        v = stats[k]
        if isinstance(v, float):
            v = f"{v:.3f}"
        print(f"{k}: {v}", file=err)


def cmd_run(spec: PipelineSpec, out, err) -> int:
    document = read_document(spec.input)
    stages = load_stages(spec, document)
    budget = spec.budget_obj()
    stats = {}
    if spec.strategy == "nested":
        results = nested_bag(stages, document, budget)
        produced = Bag()
        for v in sorted(results):
            if spec.limit is not None and len(produced) >= spec.limit:
                break
            produced.add(v)
            print(escape_line(v), file=out)
        stats["outputs"] = len(results)
    else:
        M = fold_machine(stages, spec.max_states)
        ev = evaluate(M, document, check=False)
        produced = Bag()
        for v in ev:
            if spec.limit is not None and len(produced) >= spec.limit:
                break
            produced.add(v)
            print(escape_line(v), file=out)
        stats.update(ev.stats)
        stats["states"] = len(M.states)
        stats["transitions"] = len(M.transitions)
        stats["registers"] = len(M.registers)
        if spec.dump_ecsa:
            with open(spec.dump_ecsa, "w", encoding="utf-8") as fh:
                fh.write(ev.ecsa.dump() + "\n")
        if spec.oracle:
            full = produced if spec.limit is None else ev.bag()
            ref = nested_bag(stages, document, budget)
            if full != ref:
                print(f"ettx: oracle mismatch: {len(full)} outputs vs {len(ref)} expected", file=err)
                return EXIT_MISMATCH
            stats["oracle"] = "agree"
    if spec.stats:
        _emit_stats(stats, err)
    return EXIT_OK


def cmd_compile(args, out, err) -> int:
    letters = frozenset()
    if args.input:
        letters = frozenset(read_document(args.input))
    if args.alphabet:
        letters |= frozenset(args.alphabet)
    stage = LoadedStage(args.spanner, args.transducer, letters)
    M = stage.machine()
    if args.garbage_free and not is_garbage_free(M):
        M = garbage_free_transform(M)
    _write(dump_sst(M), args.output, out)
    if args.stats:
        _emit_stats(dict(stage.program.stats, states=len(M.states), transitions=len(M.transitions)), err)
    return EXIT_OK


def cmd_compose(args, out, err) -> int:
    T1 = load_sst(read_text(args.first), source=args.first, deterministic=False)
    T2 = load_sst(read_text(args.second), alphabet=T1.output_alphabet, source=args.second,
                  deterministic=False)
    M = compose_nsst(T1, T2, max_states=args.max_states)
    _write(dump_sst(M), args.output, out)
    if args.stats:
        _emit_stats({"states": len(M.states), "transitions": len(M.transitions),
                     "registers": len(M.registers)}, err)
    return EXIT_OK


def check_report(T) -> list:
    T = as_nsst(T)
    yn = {True: "yes", False: "no"}
    return [
        f"states: {len(T.states)}",
        f"registers: {len(T.registers)}",
        f"transitions: {len(T.transitions)}",
        f"branching factor: {branching_factor(T)}",
        f"garbage-free: {yn[is_garbage_free(T)]}",
        f"copyless: {yn[all_copyless(T)]}",
        f"deterministic: {yn[is_deterministic(T) and len(T.initial) <= 1]}",
    ]


def cmd_check(args, out, err) -> int:
    alphabet = frozenset(args.alphabet) if args.alphabet else None
    T = load_sst(read_text(args.path), alphabet=alphabet, source=args.path, deterministic=False)
    for line in check_report(T):
        print(line, file=out)
    return EXIT_OK


def _print_bag(bag: Bag, out):
    for v, k in bag.canonical():
        for _ in range(k):
            print(escape_line(v), file=out)


def cmd_oracle(args, out, err) -> int:
    budget = Budget() if args.budget is None else Budget(args.budget, args.budget)
    document = read_document(args.input)
    if args.what == "tuples":
        spec = load_msre(read_text(args.spanner[0]), source=args.spanner[0])
        for t in sorted(enumerate_tuples(spec.expr, document, spec.resolve_alphabet(document), budget)):
            print(t, file=out)
        return EXIT_OK
    if args.what == "compose":
        T1 = load_sst(read_text(args.first), alphabet=frozenset(document), source=args.first,
                      deterministic=False)
        T2 = load_sst(read_text(args.second), alphabet=T1.output_alphabet, source=args.second,
                      deterministic=False)
        _print_bag(compose_bag(T1, T2, document, budget), out)
        return EXIT_OK
    spanners = args.spanner if args.what == "et" else None
    if args.what == "et" and not spanners:
        raise SpecError("oracle et needs --spanner")
    spec = PipelineSpec(stage_list(spanners, args.transducer), args.input)
    _print_bag(nested_bag(load_stages(spec, document), document, budget), out)
    return EXIT_OK


def cmd_dump_ecsa(args, out, err) -> int:
    document = read_document(args.input)
    spec = PipelineSpec(stage_list(args.spanner, args.transducer), args.input,
                        max_states=args.max_states)
    M = fold_machine(load_stages(spec, document), spec.max_states)
    ev = evaluate(M, document, check=False)
    if args.enumerate:
        for v in ev:
            print(escape_line(v), file=out)
    print(ev.ecsa.dump(), file=out)
    return EXIT_OK


def _write(text, path, out):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


# -- argument parsing ------------------------------------------------------


def _stage_args(p, required=True):
    p.add_argument("--spanner", "-s", action="append", metavar="FILE.msre",
                   help="extractor of a stage (repeat for later stages)")
    p.add_argument("--transducer", "-t", action="append", metavar="FILE.sst", required=required,
                   help="transformer of a stage (repeat for later stages)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ettx", description="Extract-transform programs over streaming string transducers.")
    parser.add_argument("--config", metavar="FILE", help="key = value defaults (limit, budget, max_states, strategy, stats, oracle)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a pipeline on a document")
    _stage_args(p)
    p.add_argument("--input", "-i", default="-", help="document file (default stdin)")
    p.add_argument("--limit", type=int, help="stop after this many outputs")
    p.add_argument("--stats", action="store_true", default=None, help="print statistics to stderr")
    p.add_argument("--oracle", action="store_true", default=None, help="cross-check against brute force")
    p.add_argument("--strategy", choices=("fold", "nested"))
    p.add_argument("--budget", type=int, help="cap for brute-force enumeration")
    p.add_argument("--max-states", type=int, dest="max_states")
    p.add_argument("--dump-ecsa", dest="dump_ecsa", metavar="FILE")
    p.add_argument("--output", "-o", help="write outputs here instead of stdout")

    p = sub.add_parser("compile", help="compile one extract-transform stage to an NSST")
    p.add_argument("--spanner", "-s", required=True)
    p.add_argument("--transducer", "-t", required=True)
    p.add_argument("--input", "-i", help="document whose symbols complete an inferred alphabet")
    p.add_argument("--alphabet", help="extra document symbols")
    p.add_argument("--garbage-free", action="store_true", dest="garbage_free")
    p.add_argument("--stats", action="store_true", default=None)
    p.add_argument("--output", "-o")

    p = sub.add_parser("compose", help="compose two NSST files")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--max-states", type=int, dest="max_states")
    p.add_argument("--stats", action="store_true", default=None)
    p.add_argument("--output", "-o")

    p = sub.add_parser("check", help="report on a transducer file")
    p.add_argument("path")
    p.add_argument("--alphabet", help="document symbols for 'input: infer'")

    p = sub.add_parser("oracle", help="brute-force reference semantics")
    p.add_argument("what", choices=("tuples", "run", "et", "compose"))
    _stage_args(p, required=False)
    p.add_argument("--first")
    p.add_argument("--second")
    p.add_argument("--input", "-i", default="-")
    p.add_argument("--budget", type=int)

    p = sub.add_parser("dump-ecsa", help="print the enumeration structure built for a document")
    _stage_args(p)
    p.add_argument("--input", "-i", default="-")
    p.add_argument("--max-states", type=int, dest="max_states")
    p.add_argument("--enumerate", action="store_true", help="enumerate outputs before dumping")
    return parser


def _apply_config(args):
    conf = read_config(args.config) if args.config else {}
    defaults = {"limit": None, "budget": None, "max_states": DEFAULT_MAX_STATES,
                "strategy": "fold", "stats": False, "oracle": False}
    for key, dflt in defaults.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, conf.get(key, dflt))


def dispatch(args, out, err) -> int:
    if args.command == "run":
        spec = PipelineSpec(stage_list(args.spanner, args.transducer), args.input,
                            limit=args.limit, stats=args.stats, budget=args.budget,
                            max_states=args.max_states, dump_ecsa=args.dump_ecsa,
                            strategy=args.strategy, oracle=args.oracle)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                return cmd_run(spec, fh, err)
        return cmd_run(spec, out, err)
    if args.command == "compile":
        return cmd_compile(args, out, err)
    if args.command == "compose":
        if args.first == args.second == "-":
            raise SpecError("only one machine can come from stdin")
        return cmd_compose(args, out, err)
    if args.command == "check":
        return cmd_check(args, out, err)
    if args.command == "oracle":
        if args.what == "compose" and not (args.first and args.second):
            raise SpecError("oracle compose needs --first and --second")
        if args.what in ("tuples", "et") and not args.spanner:
            raise SpecError(f"oracle {args.what} needs --spanner")
        if args.what in ("run", "et") and not args.transducer:
            raise SpecError(f"oracle {args.what} needs --transducer")
        return cmd_oracle(args, out, err)
    return cmd_dump_ecsa(args, out, err)


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    for stream in (out, err):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8", newline="\n")
    args = build_parser().parse_args(argv)
    try:
        _apply_config(args)
        return dispatch(args, out, err)
    except SpecError as exc:
        print(f"ettx: error: {exc}", file=err)
        return EXIT_SPEC
    except CapError as exc:
        print(f"ettx: limit: {exc}", file=err)
        return EXIT_CAP
    except OSError as exc:
        print(f"ettx: error: {exc}", file=err)
        return EXIT_SPEC
    except EttxError as exc:
        print(f"ettx: error: {exc}", file=err)
        return EXIT_SPEC
