"""Moment-based entanglement diagnostics: chirality, realignment spectra and bound-entanglement detection."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ChiralentError,
    ConfigError,
    ContractError,
    DimensionError,
    DomainError,
    IdentifiabilityError,
    InconsistentMomentsError,
    NotApplicableError,
    ParameterError,
    SchemaMismatchError,
    SizeGuardError,
    StratificationError,
)
from .qstate import BipartiteDims, DensityMatrix, Family, StateLabel, Truth  # noqa: E402
from .spectral import partial_transpose, realign  # noqa: E402
from .moments import (  # noqa: E402
    chirality,
    compute_moments,
    compute_realign_moments,
    delta_g,
    negativity,
)

__all__ = [
    "__version__",
    "BipartiteDims", "DensityMatrix", "Family", "StateLabel", "Truth",
    "partial_transpose", "realign",
    "chirality", "compute_moments", "compute_realign_moments", "delta_g", "negativity",
    "ChiralentError", "ConfigError", "ContractError", "DimensionError", "DomainError",
    "IdentifiabilityError", "InconsistentMomentsError", "NotApplicableError", "ParameterError",
    "SchemaMismatchError", "SizeGuardError", "StratificationError",
]
