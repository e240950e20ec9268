class FedPowerError(Exception):
    pass


class ValidationError(FedPowerError):
    pass


class ShapeError(ValidationError):
    pass


class ContractError(ValidationError):
    """A precondition the privacy analysis relies on was violated."""


class DomainError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class FormatError(ValidationError):
    pass


class SingleClassError(ValidationError):
    pass


def throw(msg, exc=ValidationError):
    """Raise `exc` with `msg`."""
    raise exc(msg)
