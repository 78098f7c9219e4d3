"""Geometric (Bures and Hellinger) coherence of single-mode Gaussian states."""

from .coherence import (
    AsymptoteResult,
    CoherenceResult,
    Measure,
    OptimizerOptions,
    asymptote,
    coherence,
    maximize_over_thermal,
    objective,
    threshold_search,
)
from .errors import ConvergenceError, InvalidStateError, NonMonotoneError, TruncationError
from .metrics import (
    FidelityIngredients,
    affinity,
    bures_distance_sq,
    fidelity,
    fidelity_ingredients,
    hellinger_distance_sq,
)
from .states import (
    OMEGA,
    CovarianceMatrix,
    Family,
    GaussianState,
    PhaseSpaceVector,
    StateParams,
    cts,
    family_state,
    from_params,
    is_incoherent,
    is_physical,
    sts,
    thermal_state,
    tss,
)

__version__ = "0.1.0"
