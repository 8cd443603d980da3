"""Exception hierarchy shared by all modules."""


class RelaxPathError(Exception):
    pass


class InvalidInstance(RelaxPathError, ValueError):
    pass


class DimensionMismatch(InvalidInstance):
    pass


class NonPositivePrior(InvalidInstance):
    pass


class NegativeObserved(InvalidInstance):
    pass


class NotNormalized(InvalidInstance):
    pass


class NonUniformPrior(InvalidInstance):
    pass


class DegenerateInstance(InvalidInstance):
    pass


class InvalidNu(RelaxPathError, ValueError):
    pass


class NoConvergence(RelaxPathError, ArithmeticError):
    pass


class InfeasiblePoint(RelaxPathError, ValueError):
    pass


class ZeroPrimal(RelaxPathError, ArithmeticError):
    pass


class EmptyInterior(RelaxPathError):
    pass


class IllegalTransition(RelaxPathError):
    pass


class IterationCapExceeded(RelaxPathError, RuntimeError):
    pass


class ZeroProbability(RelaxPathError, ArithmeticError):
    pass


class InconsistentChain(RelaxPathError, ValueError):
    pass


class OpenInfimum(RuntimeWarning):
    """The validation loss keeps decreasing towards lambda = 0; result clamped."""
