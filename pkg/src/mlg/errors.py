"""Exception types shared across the toolkit."""


class MlgError(Exception):
    """Base class for all toolkit errors."""


class ExpressionSyntaxError(MlgError):
    """Malformed expression text. Carries the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExpressionSyntaxError):
    """Identifier is neither a variable x1..xn nor a known function."""

    def __init__(self, name, offset):
        super().__init__(f"unknown identifier '{name}'", offset)
        self.name = name


class VariableOutOfRange(ExpressionSyntaxError):
    """Variable index outside [1, n] for the declared dimension."""

    def __init__(self, index, n, offset):
        super().__init__(f"variable x{index} out of range for dimension n={n}", offset)
        self.index = index
        self.n = n


class DomainError(MlgError):
    """Evaluation left the real domain (log<=0, division by zero, ...) or overflowed."""


class NotCommuting(MlgError):
    """Hessians fail to commute: the graph is not a Lagrangian gradient graph."""


class NotMinimal(MlgError):
    """Mean curvature exceeds tolerance where a minimality-only identity was requested."""


class BoundViolated(MlgError):
    """Hessian lower bound Hess(u) >= -C*I fails at a sample point."""


class ShapeMismatch(MlgError):
    """Check requires a specific graph shape (single-potential or triple-equal)."""


class NegativeC(MlgError):
    """Rotation parameters require a nonnegative lower-bound constant C."""


class DefinitionError(MlgError):
    """Malformed graph definition file. Carries a 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
