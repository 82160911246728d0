"""Exception hierarchy.

The CLI maps ``InputError`` to exit code 1, ``HypothesisError`` to exit
code 2 and ``PropertyViolation`` to exit code 3.
"""


class SmallSupportError(Exception):
    pass


class InputError(SmallSupportError, ValueError):
    """Malformed or invalid input data."""


class HypothesisError(SmallSupportError):
    """The input is valid but outside the domain of an operation."""


class PropertyViolation(SmallSupportError, AssertionError):
    """A proven property failed to hold; always an implementation bug."""


class ParseError(InputError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class NotAPermutation(InputError):
    def __init__(self, message, duplicated=None, missing=None):
        self.duplicated = duplicated
        self.missing = missing
        super().__init__(message)


class SizeMismatch(InputError):
    pass


class NotLatin(InputError):
    def __init__(self, kind, index, symbol, cells=()):
        self.kind = kind
        self.index = index
        self.symbol = symbol
        self.cells = tuple(cells)
        where = " and ".join(f"({r}, {c})" for r, c in self.cells)
        super().__init__(
            f"not a Latin square: symbol {symbol} repeated in {kind} {index}" + (f" at {where}" if where else "")
        )


class NotAutomorphism(InputError):
    pass


class NotAutotopism(InputError):
    pass


class IdentityInput(HypothesisError):
    pass


class OrderOne(HypothesisError):
    def __init__(self, message="order 1: Lemma hypothesis unsatisfiable"):
        super().__init__(message)


class DegenerateDegree(HypothesisError):
    def __init__(self, message="degree n < 2: log n is not positive"):
        super().__init__(message)


class HypothesisFails(HypothesisError):
    pass


class TooLarge(HypothesisError):
    pass


class BadLineSize(InputError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"line {index} has the wrong size")


class PairCovered(InputError):
    def __init__(self, pair, how):
        self.pair = pair
        self.how = how
        super().__init__(f"pair {pair[0]},{pair[1]} covered {how}")


class NotSTS(InputError):
    pass


class ClosureViolation(PropertyViolation):
    pass
