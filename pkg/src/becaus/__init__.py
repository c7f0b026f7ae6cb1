"""Behavior-based causal structure discovery for two vector time series.

The classifier decides, from one finite trajectory pair and exact rank
computations on Hankel matrices, which of six mechanistic couplings
produced the data: independence, a directed map either way, a directed map
confounded by a latent input, or a pure latent common cause. An LTI
scenario generator with identifiability checks, a Granger F-test baseline
with stationarity screening, and a nonlinear fictitious-control probe ship
alongside it.
"""
from .classifier import BecausOutcome, HankelBlocks, classify, partition
from .datagen import (
    LabeledDataset,
    check_identifiable,
    export_dataset,
    generate,
    generate_identifiable,
    import_dataset,
)
from .exceptions import (
    BecausError,
    DataIntegrityError,
    DegenerateReferenceError,
    DegenerateRegressionError,
    DegenerateVarianceError,
    DimensionMismatchError,
    GenerationExhaustedError,
    IdentifiabilityError,
    InputFormatError,
    LengthTooShortError,
    OutcomeMismatchError,
    RankDeficientRegressionError,
    SeriesTooShortError,
    SolverFailureError,
    UnobservableSystemError,
)
from .granger import GrangerResult, StationarityReport, adf_test, granger_screen, granger_test
from .harness import run_example, run_montecarlo, run_probe_trials
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    build_hankel,
    numerical_rank,
)
from .lti import (
    DiscoverabilityReport,
    LtiSystem,
    check_discoverable,
    compute_lag,
    random_discoverable_system,
    reconstruct_xini,
    simulate,
)
from .probe import (
    NonlinearSystem,
    ProbeConfig,
    ProbeResult,
    random_tanh_network,
    simulate_nonlinear,
    solve_probe,
)
from .relations import Relation

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Relation",
    "classify",
    "partition",
    "BecausOutcome",
    "HankelBlocks",
    "ToleranceConfig",
    "DEFAULT_TOL",
    "build_hankel",
    "numerical_rank",
    "LtiSystem",
    "simulate",
    "compute_lag",
    "check_discoverable",
    "DiscoverabilityReport",
    "random_discoverable_system",
    "reconstruct_xini",
    "LabeledDataset",
    "generate",
    "generate_identifiable",
    "check_identifiable",
    "export_dataset",
    "import_dataset",
    "adf_test",
    "granger_test",
    "granger_screen",
    "GrangerResult",
    "StationarityReport",
    "NonlinearSystem",
    "simulate_nonlinear",
    "random_tanh_network",
    "ProbeConfig",
    "ProbeResult",
    "solve_probe",
    "run_example",
    "run_montecarlo",
    "run_probe_trials",
    "BecausError",
    "OutcomeMismatchError",
    "InputFormatError",
    "LengthTooShortError",
    "SeriesTooShortError",
    "DimensionMismatchError",
    "UnobservableSystemError",
    "GenerationExhaustedError",
    "IdentifiabilityError",
    "DataIntegrityError",
    "DegenerateRegressionError",
    "RankDeficientRegressionError",
    "DegenerateVarianceError",
    "SolverFailureError",
    "DegenerateReferenceError",
]
