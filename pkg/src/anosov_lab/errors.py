"""Exception hierarchy shared by all modules."""


class AnosovLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AnosovLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class ClassificationError(AnosovLabError, ValueError):
    """The element has the wrong type (elliptic, identity, ...) for the operation."""


class ResourceError(AnosovLabError):
    """A configured resource cap would be exceeded."""

    def __init__(self, message, cap=None, requested=None):
        super().__init__(message)
        self.cap = cap
        self.requested = requested


class EmptySampleError(AnosovLabError, ValueError):
    """A sample or scatter that must be nonempty came out empty."""


class ConditioningError(AnosovLabError, ArithmeticError):
    """The input is numerically singular."""


class UndefinedSubspaceError(AnosovLabError, ArithmeticError):
    """U_k(g) is undefined because the singular value gap is too small."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class IllConditionedSpectrumError(AnosovLabError, ArithmeticError):
    """Eigenvalue clusters cannot be separated reliably."""


class PreconditionError(AnosovLabError, ValueError):
    """A documented precondition does not hold."""


class DegenerateConfigurationError(AnosovLabError, ValueError):
    """Flags fail a required transversality condition."""

    def __init__(self, message, pair=None, dims=None):
        super().__init__(message)
        self.pair = pair
        self.dims = dims


class DirectionUnavailableError(AnosovLabError, ValueError):
    """No monotone approach to a boundary point exists on the requested side."""


class ProximalityError(AnosovLabError):
    """Some witnesses are not P_k-proximal, so no attracting subspace exists."""

    def __init__(self, message, witnesses=()):
        super().__init__(message)
        self.witnesses = list(witnesses)


class ConfigError(AnosovLabError, ValueError):
    """A configuration file failed validation."""

    def __init__(self, message, problems=()):
        super().__init__(message)
        self.problems = list(problems)
