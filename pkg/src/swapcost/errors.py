"""Exception types shared across the package."""


class SwapCostError(Exception):
    """Base class for all package errors."""


class SolverError(SwapCostError):
    """Base class for root-finding failures."""


class NonConvergence(SolverError):
    """Iteration budget exhausted without meeting tolerance."""


class DerivativeVanished(SolverError):
    """Newton step undefined; callers fall back to bisection."""


class NoBracket(SolverError):
    """Bisection endpoints do not bracket a sign change."""


class AmmError(SwapCostError):
    """Base class for pool-level errors."""


class InsufficientLiquidity(AmmError):
    """Requested output meets or exceeds what the pool can deliver."""


class RangeExceeded(InsufficientLiquidity):
    """Trade would exhaust a concentrated-liquidity position's range."""


class DataError(SwapCostError):
    """Base class for market-data problems."""


class MalformedRow(DataError):
    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class NonPositiveRate(DataError):
    def __init__(self, path: str, line_no: int, reason: str):
        self.path = path
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{path}:{line_no}: {reason}")


class EmptySeries(DataError):
    """No usable rows survived parsing and validation."""


class ConfigError(SwapCostError):
    """Invalid scenario or run configuration."""


class RoutingError(SwapCostError):
    """Base class for router failures."""


class NoVenueForPair(RoutingError):
    """No pool in the venue set holds both requested currencies."""


class EmptyCandidates(RoutingError):
    """Route requested over an empty candidate list."""


class EmptyReport(SwapCostError):
    """Aggregation requested over a report with no rows."""
