"""Exception hierarchy."""


class SliceRegularError(Exception):
    """Base class for errors raised by this package."""


class CenterMismatchError(SliceRegularError, ValueError):
    pass


class OffSliceError(SliceRegularError, ValueError):
    """A slice-only computation was asked for a point off the relevant plane."""


class DegreeCapError(SliceRegularError, OverflowError):
    pass


class PoleError(SliceRegularError, ZeroDivisionError):
    """Evaluation hit a pole; ``sphere`` identifies it when known."""

    def __init__(self, message, sphere=None):
        super().__init__(message)
        self.sphere = sphere


class NotRegularError(SliceRegularError, ArithmeticError):
    pass


class OrderBoundError(SliceRegularError, ArithmeticError):
    """The pole order exceeds the bound the caller allowed."""


class DiscretenessError(SliceRegularError, ValueError):
    """A prescription of poles accumulates at a finite point."""


class FactorizationError(SliceRegularError, ValueError):
    pass
