"""Exception hierarchy shared by the tailmap modules."""


class TailmapError(Exception):
    """Base class for all errors raised by tailmap."""


class FormatError(TailmapError, ValueError):
    """A file or document does not follow the expected layout."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownDistribution(TailmapError, ValueError):
    pass


class InvalidParams(TailmapError, ValueError):
    pass


class MissingParams(InvalidParams):
    pass


class DomainError(TailmapError, ValueError):
    """A probability lies outside the domain of a quantile function."""


class DuplicateId(TailmapError, ValueError):
    pass


class EmptyEvaluation(TailmapError, ValueError):
    pass


class NoFiniteMetric(TailmapError, ValueError):
    """Every reference was beyond the distance bound."""


class ContractError(TailmapError, TypeError):
    """A mapper was driven with missing hooks or a malformed workload."""


class HookError(TailmapError, RuntimeError):
    """A user hook raised while processing a work element."""

    def __init__(self, hook, position, cause):
        self.hook = hook
        self.position = position
        super().__init__(f"hook {hook!r} failed on work element {position}: {cause!r}")
