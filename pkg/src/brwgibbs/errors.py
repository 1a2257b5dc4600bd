"""Exception types raised by the toolkit."""


class BrwError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BrwError, ValueError):
    pass


class ModelError(BrwError, ValueError):
    """Malformed increment model or model spec string."""


class DepthExceeded(BrwError, ValueError):
    pass


class CapExceeded(BrwError):
    """A requested enumeration would exceed the configured entry cap."""


class ShapeMismatch(BrwError, ValueError):
    pass


class NumericalFailure(BrwError, ArithmeticError):
    pass
