"""Exception types raised by infolimit."""


class InfolimitError(ValueError):
    pass


class QuadratureError(InfolimitError):
    """Numerical integration did not reach the requested tolerance."""

    def __init__(self, message, achieved_tolerance):
        super().__init__(f"{message} (achieved tolerance {achieved_tolerance:.3g})")
        self.achieved_tolerance = achieved_tolerance


class UndefinedDistanceError(InfolimitError):
    pass


class InsufficientDataError(InfolimitError):
    pass


class DegenerateMatrixError(InfolimitError):
    pass


class InfeasibleImbalanceError(InfolimitError):
    pass


class InsufficientSweepError(InfolimitError):
    pass


class ConvergenceError(InfolimitError):
    def __init__(self, message, gradient_norm):
        super().__init__(f"{message} (final gradient norm {gradient_norm:.3g})")
        self.gradient_norm = gradient_norm


class LoadError(InfolimitError):
    pass
