"""Exception hierarchy shared by every module."""


class LabError(Exception):
    """Base class for all package errors."""


class DomainError(LabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceError(LabError):
    """A request would exceed the configured memory or size budget."""


class UnsupportedError(LabError):
    """The operation is not defined for this kind of input."""


class PrecisionError(LabError):
    """The requested accuracy could not be reached.

    ``achieved`` carries the best error estimate that was obtained and
    ``value`` the corresponding approximate result, if any.
    """

    def __init__(self, message: str, achieved: float, value=None):
        super().__init__(f"{message} (achieved error {achieved:.3e})")
        self.achieved = achieved
        self.value = value


class VerificationFailure(LabError):
    """A verification run found a counterexample or an invalid certificate.

    ``state`` is a dict describing where the failure happened.
    """

    def __init__(self, message: str, state: dict | None = None):
        super().__init__(message)
        self.state = dict(state or {})
