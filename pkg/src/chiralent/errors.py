"""Exception types raised across the package."""


class ChiralentError(Exception):
    """Base class for all library errors."""


class DimensionError(ChiralentError, ValueError):
    """Input has unsupported or inconsistent subsystem dimensions."""


class ParameterError(ChiralentError, ValueError):
    """A family parameter lies outside its allowed range."""


class ContractError(ChiralentError, ValueError):
    """An operation's precondition was violated (e.g. a non-Hermitian input)."""


class NotApplicableError(ChiralentError, ValueError):
    """The operation is undefined for this input (e.g. sector split of a complex state)."""


class InconsistentMomentsError(ChiralentError, ValueError):
    """A moment list does not correspond to any real spectrum."""


class DomainError(ChiralentError, ValueError):
    """Argument lies off the valid branch of a closed-form relation."""


class IdentifiabilityError(ChiralentError, ValueError):
    """Calibration data cannot pin down the fitted parameters."""


class SizeGuardError(ChiralentError, ValueError):
    """Requested multi-copy operator would exceed the memory ceiling."""


class StratificationError(ChiralentError, ValueError):
    """Cross-validation folds cannot be formed as requested."""


class ConfigError(ChiralentError, ValueError):
    """A run configuration is malformed."""


class SchemaMismatchError(ChiralentError, ValueError):
    """Feature names of a dataset and a model disagree."""
