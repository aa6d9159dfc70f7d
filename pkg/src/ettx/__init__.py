"""Extract-transform programs: spanners, streaming string transducers, enumeration."""

from .compile import EtProgram, et_evaluate, et_to_nsst
from .compose import compose_nsst
from .core import (END, Bag, Close, MultispanTuple, Open, Span, bag_eq, bag_union, doc_of, encode,
                   is_canonical, normalize, parse_refword, render_refword, tuple_of)
from .ecsa import Ecsa
from .errors import (AlphabetError, AlphabetMismatch, BudgetExceeded, CapError, EttxError,
                     NotGarbageFree, ParseError, PreconditionViolation, SizeBudgetExceeded, SpecError)
from .evaluation import evaluate
from .spanner import compile_to_nfa, load_msre, normalized_dfa, parse_expr, spanner_dfa
from .sst import (Assignment, Budget, Dsst, Nsst, Reg, branching_factor, compose_assign, dsst_run,
                  garbage_free_transform, is_copyless, is_garbage_free, nsst_accepting_runs,
                  nsst_outputs, nsst_to_et)
from .sstfile import dump_sst, load_sst, read_sst

__all__ = [
    "EtProgram", "et_evaluate", "et_to_nsst", "compose_nsst",
    "END", "Bag", "Close", "MultispanTuple", "Open", "Span", "bag_eq", "bag_union", "doc_of",
    "encode", "is_canonical", "normalize", "parse_refword", "render_refword", "tuple_of",
    "Ecsa", "evaluate",
    "AlphabetError", "AlphabetMismatch", "BudgetExceeded", "CapError", "EttxError",
    "NotGarbageFree", "ParseError", "PreconditionViolation", "SizeBudgetExceeded", "SpecError",
    "compile_to_nfa", "load_msre", "normalized_dfa", "parse_expr", "spanner_dfa",
    "Assignment", "Budget", "Dsst", "Nsst", "Reg", "branching_factor", "compose_assign",
    "dsst_run", "garbage_free_transform", "is_copyless", "is_garbage_free",
    "nsst_accepting_runs", "nsst_outputs", "nsst_to_et",
    "dump_sst", "load_sst", "read_sst",
]
