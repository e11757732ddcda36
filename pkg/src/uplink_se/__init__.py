"""Uplink spectral efficiency of multi-cell massive MIMO under joint decoding schemes."""

__version__ = "0.1.0"

from .errors import CapacityError, ConfigError, DegenerateError, DomainError, NumericalError  # noqa: E402
from .network import (  # noqa: E402
    MODERATE,
    STRONG,
    WEAK,
    AttenuationDraw,
    Geometric,
    NetworkConfig,
    ScenarioSpec,
    Synthetic,
    TwoCellBounded,
    compute_b,
    generate_attenuation,
    noise_floor,
)
from .rmt import EmpiricalDistribution, MpResult, mp_value, solve_eta  # noqa: E402
from .finite import (  # noqa: E402
    SchemeRateReport,
    estimate_channel_explicit,
    logdet_mc,
    rate_ian_finite,
    rate_linear_finite,
    rate_sd_finite,
    rate_td_finite,
)
from .asymptotic import (  # noqa: E402
    AsymptoticInputs,
    OsConfiguration,
    build_asymptotic_inputs,
    optimal_os_zetas,
    optimal_zetas,
    rate_ian_asym,
    rate_os_asym,
    rate_sd_asym,
    rate_td_asym,
)
from .optimizer import enumerate_configurations, optimize_os  # noqa: E402

__all__ = [
    "# noqa: E402",
    "MODERATE",
    "STRONG",
    "WEAK",
    "AttenuationDraw",
    "Geometric",
    "NetworkConfig",
    "ScenarioSpec",
    "Synthetic",
    "TwoCellBounded",
    "compute_b",
    "generate_attenuation",
    "noise_floor",
    "# noqa: E402",
    "SchemeRateReport",
    "estimate_channel_explicit",
    "logdet_mc",
    "rate_ian_finite",
    "rate_linear_finite",
    "rate_sd_finite",
    "rate_td_finite",
    "# noqa: E402",
    "AsymptoticInputs",
    "OsConfiguration",
    "build_asymptotic_inputs",
    "optimal_os_zetas",
    "optimal_zetas",
    "rate_ian_asym",
    "rate_os_asym",
    "rate_sd_asym",
    "rate_td_asym",
    "CapacityError",
    "ConfigError",
    "DegenerateError",
    "DomainError",
    "NumericalError",
    "EmpiricalDistribution",
    "MpResult",
    "mp_value",
    "solve_eta",
    "enumerate_configurations",
    "optimize_os",
]
