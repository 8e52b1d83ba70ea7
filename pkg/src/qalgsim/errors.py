"""Exception hierarchy shared by every module."""


class QalgError(Exception):
    """Base class for library errors."""


class DomainError(QalgError, ValueError):
    """An argument lies outside the operation's domain."""


class PromiseError(QalgError):
    """An oracle broke the promise the algorithm relies on."""


class ResourceError(QalgError):
    """A size cap or retry budget was exceeded."""


class MoreSamplesNeeded(QalgError):
    """The collected samples do not determine the answer yet."""
