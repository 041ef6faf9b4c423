from .core import ToleranceConfig, configure_logging, get_current_tolerances
from .guard import positive_definite, require_positive_definite
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateConstantError,
    EigenSolverError,
    InvalidMeanError,
    InvalidWeightsError,
    NotHermitianError,
    NotPositiveDefiniteError,
    NumericalBreakdownError,
    ShapeMismatchError,
    SingularTensorError,
    SpectralDomainError,
    TrialError,
    WindowViolationError,
)
from .tensor_core import (
    GaugeNorm,
    HermitianTensor,
    Spectrum,
    Tensor,
    TensorShape,
    congruence,
    einstein_product,
    from_diagonal,
    hermitian_eig,
    identity,
    load_tensor,
    loewner_leq,
    max_ratio,
    norm,
    save_tensor,
    thompson_metric,
)
from .means import (
    MeanSpec,
    RepresentingFunction,
    SolveDiagnostics,
    Weights,
    adjoint_mean,
    binary_mean,
    classify_candidate,
    deformed_mean,
    evaluate,
    geometric_power_binary,
    karcher_mean,
    karcher_power_limit,
    karcher_residual,
    karcher_sensitivity,
    power_mean,
    weighted_arithmetic,
    weighted_harmonic,
)
from .bounds import (
    InequalityReport,
    KantorovichParams,
    TailBoundReport,
    ando_hiai_pair,
    check_ah_deformed,
    check_ah_karcher,
    check_ah_power,
    check_kantorovich_congruence,
    check_kantorovich_jensen,
    check_reverse_ah_deformed,
    check_reverse_ah_power,
    kantorovich,
    kantorovich_f,
    markov_tail_bound,
    spectral_window,
)
from .sampling import RandomPDSource, monte_carlo, sample

# The CLI lives in tensormeans.cli (console script: tensormeans)

__all__ = [
    "ToleranceConfig",
    "configure_logging",
    "get_current_tolerances",
    "positive_definite",
    "require_positive_definite",
    "ConfigError",
    "ConvergenceError",
    "DegenerateConstantError",
    "EigenSolverError",
    "InvalidMeanError",
    "InvalidWeightsError",
    "NotHermitianError",
    "NotPositiveDefiniteError",
    "NumericalBreakdownError",
    "ShapeMismatchError",
    "SingularTensorError",
    "SpectralDomainError",
    "TrialError",
    "WindowViolationError",
    "GaugeNorm",
    "HermitianTensor",
    "Spectrum",
    "Tensor",
    "TensorShape",
    "congruence",
    "einstein_product",
    "from_diagonal",
    "hermitian_eig",
    "identity",
    "load_tensor",
    "loewner_leq",
    "max_ratio",
    "norm",
    "save_tensor",
    "thompson_metric",
    "MeanSpec",
    "RepresentingFunction",
    "SolveDiagnostics",
    "Weights",
    "adjoint_mean",
    "binary_mean",
    "classify_candidate",
    "deformed_mean",
    "evaluate",
    "geometric_power_binary",
    "karcher_mean",
    "karcher_power_limit",
    "karcher_residual",
    "karcher_sensitivity",
    "power_mean",
    "weighted_arithmetic",
    "weighted_harmonic",
    "InequalityReport",
    "KantorovichParams",
    "TailBoundReport",
    "ando_hiai_pair",
    "check_ah_deformed",
    "check_ah_karcher",
    "check_ah_power",
    "check_kantorovich_congruence",
    "check_kantorovich_jensen",
    "check_reverse_ah_deformed",
    "check_reverse_ah_power",
    "kantorovich",
    "kantorovich_f",
    "markov_tail_bound",
    "spectral_window",
    "RandomPDSource",
    "monte_carlo",
    "sample",
]
