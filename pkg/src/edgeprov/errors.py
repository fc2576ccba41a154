"""Exception hierarchy shared by every edgeprov module."""


class EdgeProvError(Exception):
    pass


class ConfigurationError(EdgeProvError, ValueError):
    """Bad configuration: unknown service, empty node list, bad config keys."""


class DomainError(EdgeProvError, ValueError):
    """An argument lies outside the domain of a formula."""


class InvariantError(EdgeProvError, RuntimeError):
    """A model invariant (capacity, conservation, ...) would be broken."""


class ContractViolation(EdgeProvError, RuntimeError):
    """A caller passed something the callee's precondition forbids."""


class NoSchemeError(EdgeProvError, LookupError):
    pass


class UnknownDeviceError(EdgeProvError, KeyError):
    pass


class XMLParseError(EdgeProvError, ValueError):
    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class DescriptorValidationError(EdgeProvError, ValueError):
    pass


class MissingElementError(DescriptorValidationError):
    pass
