"""stancekit: target-aware stance detection toolkit."""

from .core import (
    EnrichedRecord,
    ExplicitObject,
    StanceLabel,
    StanceRecord,
    compose_label,
    derive_alignment,
    validate_enriched,
)

__version__ = "0.1.0"

__all__ = [
    "EnrichedRecord",
    "ExplicitObject",
    "StanceLabel",
    "StanceRecord",
    "compose_label",
    "derive_alignment",
    "validate_enriched",
    "__version__",
]
