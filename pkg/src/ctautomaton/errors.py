"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class LayoutError(ValueError):
    """Chain layout is inconsistent (overlapping intervals, out-of-chain sites...)."""


class PreconditionError(ValueError):
    pass


class MachineRangeError(IndexError):
    """The abstract pointer machine moved its pointer outside the modeled register."""


class ResourceLimitError(RuntimeError):
    """A subspace or operator exceeded its configured size cap."""


class NumericalError(RuntimeError):
    """An iterative solver failed to reach the requested tolerance.

    ``diagnostics`` carries whatever the solver knew when it gave up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
