"""Exception hierarchy shared by every module."""


class ItemPricingError(Exception):
    """Base class for all library errors."""


class PreconditionError(ItemPricingError, ValueError):
    """An operation was called with inputs outside its contract."""


class InvalidInstanceError(PreconditionError):
    """Instance, valuation or generator spec violates its invariants."""


class OversizedInstanceError(ItemPricingError):
    """An exhaustive routine would exceed its configured size cap."""


class UnsupportedValuationError(ItemPricingError, TypeError):
    """A valuation class is not supported by the requested operation."""

    def __init__(self, message, buyer=None):
        super().__init__(message)
        self.buyer = buyer


class InconsistentSolutionError(ItemPricingError, ValueError):
    """Prices, caps and allocation contradict each other."""


class DegenerateInstanceError(PreconditionError):
    """The market carries no welfare (all-zero values or empty allocation)."""


class ChargingViolationError(ItemPricingError, AssertionError):
    """A guaranteed index does not exist; signals an implementation bug."""


class NoOverwhelmingViolationError(PreconditionError):
    """A multi-unit buyer values more than half of the supply."""
