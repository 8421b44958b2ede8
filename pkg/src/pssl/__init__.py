"""Private semi-supervised and active PAC learning over small discrete domains."""
from .concepts import (
    Concept,
    ConceptClass,
    Distribution,
    Domain,
    consistent_concept,
    disagreement,
    empirical_error,
    evaluate,
    generalization_error,
    projection,
    vc_dimension,
)
from .data import UNLABELED, PartiallyLabeledDatabase
from .errors import (
    BudgetExceeded,
    ConfigError,
    DomainError,
    LearnerFailure,
    ProtocolError,
    PSSLError,
    ResourceError,
)
from .kernels import BACKEND
from .mechanisms import PrivacyParams, exponential_mechanism, utility_bound_check

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BudgetExceeded",
    "Concept",
    "ConceptClass",
    "ConfigError",
    "Distribution",
    "Domain",
    "DomainError",
    "LearnerFailure",
    "PSSLError",
    "PartiallyLabeledDatabase",
    "PrivacyParams",
    "ProtocolError",
    "ResourceError",
    "UNLABELED",
    "consistent_concept",
    "disagreement",
    "empirical_error",
    "evaluate",
    "exponential_mechanism",
    "generalization_error",
    "projection",
    "utility_bound_check",
    "vc_dimension",
]
