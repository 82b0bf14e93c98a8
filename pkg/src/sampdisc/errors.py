"""Exception types shared across the package."""


class SampdiscError(Exception):
    """Base class for all package errors."""


class DomainMismatchError(SampdiscError):
    """A point lies outside the domain a system is defined on."""


class InvalidParameterError(SampdiscError):
    """An argument violates a documented precondition."""


class DegenerateSystemError(SampdiscError):
    """Gram matrix is singular up to the configured threshold.

    Carries the smallest and largest eigenvalues seen.
    """

    def __init__(self, message, smallest=None, largest=None):
        super().__init__(message)
        self.smallest = smallest
        self.largest = largest


class ConvergenceError(SampdiscError):
    """An iterative procedure ran out of iterations.

    ``last`` holds the final iterate so callers can inspect it.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class SizeGuardError(SampdiscError):
    """A combinatorial guard (enumeration size, subspace count) was exceeded."""


class PremiseError(SampdiscError):
    """An audit's hypothesis does not hold on the supplied instance.

    Distinct from a violation: the audited inequality was never applicable.
    """


class CertificationError(SampdiscError):
    """Verified point sampling exhausted its rounds without certifying.

    ``best`` carries the best report found so far.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(SampdiscError):
    """An experiment or CLI configuration is malformed."""
