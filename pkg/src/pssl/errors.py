"""Exception hierarchy shared by every module."""


class PSSLError(Exception):
    """Base class for all library errors."""


class DomainError(PSSLError, ValueError):
    """Inputs violate an operation's preconditions."""


class ResourceError(PSSLError, RuntimeError):
    """An enumeration or search would exceed its configured budget."""


class ProtocolError(PSSLError, RuntimeError):
    """An active learner broke the index-query protocol."""


class BudgetExceeded(ProtocolError):
    pass


class LearnerFailure(PSSLError, RuntimeError):
    """A learner hit an explicit failure branch (e.g. not enough unlabeled data)."""


class ConfigError(PSSLError, ValueError):
    """An experiment configuration could not be resolved."""
