"""Verification laboratory for measurement-induced reduction of an entangled pair.

The package builds the correlated two-particle Gaussian state, applies a
slit-shaped position measurement to particle 1, and checks every closed-form
spread prediction against independent grid numerics: spectral and
finite-difference momentum routes, Schmidt decompositions, free flight to a
detector plane, and seeded Monte Carlo detector statistics.
"""

from .analytic import (
    InitialSpreads,
    ReducedStateClosedForm,
    StrongCorrelationApprox,
    approx_dp2_strong_correlation,
    initial_spreads,
    is_disentangled,
    limit_dp2_eps_to_zero,
    position_correlation,
    reduced_spreads,
)
from .errors import (
    CapExceededError,
    GridMismatchError,
    MemoryBoundError,
    NumericalContractError,
    PopperLabError,
    ScenarioFailure,
    TailLeakError,
    UnderResolvedError,
    UserParameterError,
    ZeroNormError,
)
from .evolution import EvolutionParams, free_propagate, gaussian_width_at
from .experiment import (
    DetectorHistogram,
    ScenarioReport,
    chi_square_against_density,
    histogram,
    ks_against_density,
    run_scenario,
    sample_joint,
    sample_positions,
)
from .measurement import (
    ApertureProfile,
    PostSelectionResult,
    ReductionResult,
    aperture_postselect,
    conditional_reduce,
)
from .params import (
    DetectorGeometry,
    GridSpec,
    MeasurementSpec,
    PhysicalParams,
    ScenarioConfig,
    ValidationReport,
    auto_grid,
    config_from_json,
    config_to_json,
    validate,
)
from .rng import Xoshiro256StarStar, splitmix64_stream
from .states import (
    JointStateRecipe,
    build_joint_state,
    build_pointer_state,
    joint_amplitude,
    pointer_width_for_slit,
)
from .verify import CheckRow, format_table, run_checks
from .wavefunction import (
    SchmidtSpectrum,
    WaveFunction1D,
    WaveFunction2D,
    load_wavefunction,
    marginal_density,
    momentum_stats_derivative,
    momentum_stats_spectral,
    momentum_std_derivative,
    momentum_std_spectral,
    normalize,
    position_stats,
    reduced_density_momentum_std,
    save_wavefunction,
    schmidt,
)

__version__ = "1.0.0"

__all__ = [
    "ApertureProfile",
    "CapExceededError",
    "CheckRow",
    "DetectorGeometry",
    "DetectorHistogram",
    "EvolutionParams",
    "GridMismatchError",
    "GridSpec",
    "InitialSpreads",
    "JointStateRecipe",
    "MeasurementSpec",
    "MemoryBoundError",
    "NumericalContractError",
    "PhysicalParams",
    "PopperLabError",
    "PostSelectionResult",
    "ReducedStateClosedForm",
    "ReductionResult",
    "ScenarioConfig",
    "ScenarioFailure",
    "ScenarioReport",
    "SchmidtSpectrum",
    "StrongCorrelationApprox",
    "TailLeakError",
    "UnderResolvedError",
    "UserParameterError",
    "ValidationReport",
    "WaveFunction1D",
    "WaveFunction2D",
    "Xoshiro256StarStar",
    "ZeroNormError",
    "aperture_postselect",
    "approx_dp2_strong_correlation",
    "auto_grid",
    "build_joint_state",
    "build_pointer_state",
    "chi_square_against_density",
    "conditional_reduce",
    "config_from_json",
    "config_to_json",
    "format_table",
    "free_propagate",
    "gaussian_width_at",
    "histogram",
    "initial_spreads",
    "is_disentangled",
    "joint_amplitude",
    "ks_against_density",
    "limit_dp2_eps_to_zero",
    "load_wavefunction",
    "marginal_density",
    "momentum_stats_derivative",
    "momentum_stats_spectral",
    "momentum_std_derivative",
    "momentum_std_spectral",
    "normalize",
    "pointer_width_for_slit",
    "position_correlation",
    "position_stats",
    "reduced_density_momentum_std",
    "reduced_spreads",
    "run_checks",
    "run_scenario",
    "sample_joint",
    "sample_positions",
    "save_wavefunction",
    "schmidt",
    "splitmix64_stream",
    "validate",
]
