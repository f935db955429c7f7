"""Entanglement measures, convex roofs and numerical checks of roof inequalities.

All entropies and correlations are in bits.
"""

from .lab import (
    CheckRecord,
    InequalityReport,
    canonical_state,
    check_duality,
    check_lemma1,
    check_main_inequality,
    cloning_gap,
    fuzz_campaign,
    random_separable,
)
from .measures import (
    Cut,
    MeasureResult,
    classical_correlation,
    classical_correlation_max,
    concurrence,
    ec_lower_chain,
    entanglement_entropy,
    eof_numeric,
    eof_two_qubit_exact,
    g_roof,
)
from .roof import (
    BoundDirection,
    OptimizerConfig,
    SearchResult,
    caratheodory_reduce,
    minimize_over_ensembles,
    mixed_ensembles_from_purification,
    optimize_povm,
    pure_ensembles_from_purification,
)
from .states import (
    DensityMatrix,
    Ensemble,
    InvalidStateError,
    Povm,
    PureState,
    StateFormatError,
    partial_trace,
    partial_transpose,
    purify,
    random_density,
    random_pure,
    state_from_json,
    state_to_json,
    tensor,
    von_neumann_entropy,
)

__version__ = "0.1.0"
