"""Two-state (history and destiny) simulations of measurement and decoherence."""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DenseLimitExceeded,
    GridTooNarrow,
    ImpossibleBoundaryPair,
    LayoutError,
    NearOrthogonalBoundaries,
    NormalizationError,
    NotDensityLike,
    NotHermitianError,
    NumericGuardError,
    ScenarioError,
    TwoTimeError,
)

__all__ = [
    "__version__",
    "DenseLimitExceeded",
    "GridTooNarrow",
    "ImpossibleBoundaryPair",
    "LayoutError",
    "NearOrthogonalBoundaries",
    "NormalizationError",
    "NotDensityLike",
    "NotHermitianError",
    "NumericGuardError",
    "ScenarioError",
    "TwoTimeError",
]
