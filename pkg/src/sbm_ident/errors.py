"""Exception types shared across the package."""


class InvalidParamsError(ValueError):
    """Parameter bundle violates a model invariant."""


class SizeGuardError(ValueError):
    """An enumeration would exceed the desk-scale size guard."""

    def __init__(self, guard: str, message: str):
        super().__init__(message)
        self.guard = guard


class EstimationError(ValueError):
    """A recovery formula hit a degenerate or inconsistent case.

    ``code`` is a stable machine-readable tag, e.g. ``DEGENERATE_ALPHA_BETA``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
