"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A requested state does not fit in the truncated Fock space."""


class TruncationGuardError(CapacityError):
    """Coherent amplitude too large for the cutoff.

    Carries the norm deficit of the truncated (unnormalized) state so callers
    can decide whether to raise the cutoff.
    """

    def __init__(self, message, deficit):
        super().__init__(message)
        self.deficit = deficit


class BasisMismatchError(ValueError):
    pass


class PipelineError(ValueError):
    """Pipeline has zero or several retarder stages, or an unknown stage."""


class ConfigError(ValueError):
    pass


class SingularityError(ArithmeticError):
    """Outcome probability underflows while its derivative does not."""


class UndefinedDOPError(ValueError):
    pass
