"""Scattering-matrix model of backscatter in micro-ring resonators.

A six-mode unitary transfer matrix couples forward/backward ring, bus, and
loss-channel amplitudes.  Backscatter can live inside the ring or inside the
coupler; the steady state follows from a linear fixed point.  On top of the
linear model sit heralded photon-pair figures of merit for spontaneous
four-wave mixing, coupling-design optimization, and spectrum fitting.
"""
from .analysis import (
    FitResult,
    MeasuredSpectrum,
    Objective,
    ResonanceInfo,
    find_resonances,
    fit_spectrum,
    optimize_coupling,
    sweep_engine,
)
from .errors import (
    BranchAmbiguityError,
    ConfigError,
    InvalidParamError,
    NoConvergenceError,
    NoResonanceFoundError,
    NotUnitaryError,
    SingularSystemError,
    SplitringError,
)
from .herald import (
    HeraldingReport,
    SfwmParams,
    beta_coefficient,
    heralding_report,
    pair_generation_rate,
    peak_herald_wavelength,
    rate_vs_efficiency_curve,
    survival_proportions,
    m_parameter,
)
from .linalg import ModeIndex, block_extract, principal_sqrt_unitary, solve_2x2
from .response import (
    BusInput,
    SteadyState,
    closed_form_transmission,
    default_lambda_grid,
    roundtrip_sum_oracle,
    solve_steady_state,
    spectrum_sweep,
)
from .ring import (
    Ordering,
    Placement,
    ProcessKind,
    RingParams,
    build_process,
    compose_total,
    free_spectral_range,
    resonance_wavelength,
    round_trip_phase,
)

__version__ = "0.1.0"

__all__ = [
    "BranchAmbiguityError",
    "BusInput",
    "ConfigError",
    "FitResult",
    "HeraldingReport",
    "InvalidParamError",
    "MeasuredSpectrum",
    "ModeIndex",
    "NoConvergenceError",
    "NoResonanceFoundError",
    "NotUnitaryError",
    "Objective",
    "Ordering",
    "Placement",
    "ProcessKind",
    "ResonanceInfo",
    "RingParams",
    "SfwmParams",
    "SingularSystemError",
    "SplitringError",
    "SteadyState",
    "beta_coefficient",
    "block_extract",
    "build_process",
    "closed_form_transmission",
    "compose_total",
    "default_lambda_grid",
    "find_resonances",
    "fit_spectrum",
    "free_spectral_range",
    "heralding_report",
    "optimize_coupling",
    "pair_generation_rate",
    "peak_herald_wavelength",
    "principal_sqrt_unitary",
    "rate_vs_efficiency_curve",
    "resonance_wavelength",
    "roundtrip_sum_oracle",
    "solve_2x2",
    "solve_steady_state",
    "spectrum_sweep",
    "survival_proportions",
    "sweep_engine",
    "m_parameter",
    "__version__",
]
