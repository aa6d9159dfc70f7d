"""Exception hierarchy.

Two families matter to callers: ``SpecError`` covers malformed input
(files, expressions, alphabets) and ``CapError`` covers explicit resource
caps.  The command line maps them to exit codes 1 and 2.
"""


class EttxError(Exception):
    pass


class SpecError(EttxError):
    pass


class CapError(EttxError):
    pass


class ParseError(SpecError):
    def __init__(self, message, position=None, line=None, source=None):
        self.position = position
        self.line = line
        self.source = source
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"col {position + 1}" if line is not None else f"pos {position}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class VariableNestingError(SpecError):
    def __init__(self, var):
        self.var = var
        super().__init__(f"variable {var!r} captured inside its own capture")


class MalformedRefWord(SpecError):
    pass


class SpanOutOfRange(SpecError):
    pass


class OverlappingSpans(SpecError):
    pass


class AlphabetError(SpecError):
    pass


class AlphabetMismatch(SpecError):
    pass


class NotCopyless(SpecError):
    pass


class NotDeterministic(SpecError):
    pass


class NotGarbageFree(SpecError):
    pass


class PreconditionViolation(EttxError):
    pass


class BudgetExceeded(CapError):
    pass


class SizeBudgetExceeded(CapError):
    pass


class SupplyExhausted(CapError):
    pass
