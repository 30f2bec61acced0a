"""Error types raised by the engine and the script driver."""


class SemilinError(Exception):
    """Base class for every engine error."""


class DimensionMismatch(SemilinError):
    """Operands live in ambient spaces of different dimension."""


class InfinityArithmeticError(SemilinError):
    """Subtraction or negation involving the top element."""


class NotCompact(SemilinError):
    """Input was required to be definably compact."""


class NotLocallyClosed(SemilinError):
    """Input is not open in its closure.

    `witness` is a point of the set lying in the closure of its frontier.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedGeometry(SemilinError):
    """The engine could not certify a cell complex for the input."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class InternalInvariantError(SemilinError):
    """A post-check on a computed result failed."""


class ScriptError(SemilinError):
    """Problem in script text, located by line and column."""

    def __init__(self, message, line=0, column=0):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.detail = message


class ScriptSyntaxError(ScriptError):
    pass


class ScriptSemanticError(ScriptError):
    pass


class CommandError(SemilinError):
    """A script command failed; captured into its report."""
