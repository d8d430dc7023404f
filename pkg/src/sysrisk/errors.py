"""Exception and warning types shared across the package."""


class SysriskError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(SysriskError):
    """Balance-sheet vectors have inconsistent lengths or shapes."""


class NonPositiveEquity(SysriskError):
    """Equity must be strictly positive for every bank."""


class MarketImbalance(SysriskError):
    """Total interbank assets and liabilities differ beyond tolerance."""


class ExposureConstraintError(SysriskError):
    """An exposure matrix violates its margin/sign/diagonal constraints.

    Carries the offending validation report on ``.report`` when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SupercriticalSystem(SysriskError):
    """The propagation matrix has spectral radius >= 1; no finite fixed point."""


class InfeasibleMargins(SysriskError):
    """No feasible exposure matrix could be constructed for these margins."""


class KappaOutOfRange(SysriskError):
    """Mixing parameter outside the non-negativity range of the two-type model."""


class InvalidSpec(SysriskError):
    """A population spec has missing or out-of-range parameters."""


class DegenerateBank(SysriskError):
    """A bank has no interbank assets or liabilities to anchor equity on."""


class DegenerateProperty(SysriskError):
    """A node property has no variation (or no edges), so mixing is undefined."""


class ParseError(SysriskError):
    """A file or configuration could not be parsed; message carries location."""


class UnknownNodeId(ParseError):
    """An edge references a node id absent from the nodes file."""


class SelfLoopEdge(ParseError):
    """An edge has identical source and target."""


class NegativeExposure(ParseError):
    """An edge carries a negative exposure."""


class ConvergenceFailure(UserWarning):
    """Power iteration did not converge; the best estimate is returned."""


class SupercriticalWarning(UserWarning):
    """Spectral radius >= 1: truncated series reported, no convergent limit."""
