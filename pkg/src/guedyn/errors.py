"""Package-wide exception types."""


class NumericalError(RuntimeError):
    """A numerically computed quantity failed a consistency requirement."""
