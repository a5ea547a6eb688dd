"""Event-flow graphs: compact control-flow graphs with respect to a set of events."""

from .efg import EfgResult, build_efg
from .errors import (
    ConfigError,
    EventFlowError,
    IngestError,
    MalformedGraph,
    NotFound,
    OracleTooLarge,
    SpecMismatch,
    TransformNotApplicable,
)
from .graph import ColoredDirectedGraph, EventRole, NodeKind
from .reduce import ReductionRecord, reduce_to_t_irreducible

__version__ = "0.1.0"

__all__ = [
    "ColoredDirectedGraph",
    "ConfigError",
    "EfgResult",
    "EventFlowError",
    "EventRole",
    "IngestError",
    "MalformedGraph",
    "NodeKind",
    "NotFound",
    "OracleTooLarge",
    "ReductionRecord",
    "SpecMismatch",
    "TransformNotApplicable",
    "build_efg",
    "reduce_to_t_irreducible",
    "__version__",
]
