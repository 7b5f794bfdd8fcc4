"""Exception types raised by geodissip."""


class GeodissipError(Exception):
    """Base class for all library errors."""


class DegenerateField(GeodissipError):
    """|d| fell below the gap tolerance; steady-state formulas are invalid."""


class GapClosure(GeodissipError):
    """The gap (nearly) closes somewhere on the phase torus or trajectory."""

    def __init__(self, message, phase=None):
        super().__init__(message)
        self.phase = phase


class UnresolvedTopology(GeodissipError):
    """The Chern number changed when the grid was refined."""


class NotUnit(GeodissipError):
    pass


class SingularMatrix(GeodissipError):
    pass


class StepTooLarge(GeodissipError):
    pass


class DegenerateSpectrum(GeodissipError):
    pass


class ConfigError(GeodissipError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class InvariantViolation(GeodissipError):
    """A figure sweep broke one of the bound orderings it is meant to show."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
