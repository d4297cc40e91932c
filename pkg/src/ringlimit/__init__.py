"""Spectral simulation, analysis and uncertainty-bound audits for wavelength-selecting devices."""

from .analysis import (
    LorentzianParams,
    ResonanceFeature,
    SpectralMetrics,
    analyze_spectrum,
    find_resonances,
    fit_lorentzian,
    metrics,
    q_factor,
)
from .audit import HupReport, audit, device_delta_t
from .config import RunConfig, parse_config
from .devices import (
    AwgSpec,
    FabryPerotSpec,
    GratingSpec,
    MicroringSpec,
    Spectrum,
    WavelengthGrid,
    device_footprint,
    fabry_perot_spectrum,
    microring_closed_form_finesse,
    microring_drop_spectrum,
    microring_fsr,
    microring_through_spectrum,
)
from .errors import ConfigError, DomainError, SingularSystemError, SpectrumFormatError
from .fitting import FitProblem, FitResult, fit_microring, residual_curve
from .physics import (
    angular_frequency,
    awg_resolvance,
    coherence_length,
    fp_time_uncertainty,
    grating_resolvance,
    hup_min_linewidth,
    photon_energy,
    resonator_linewidth_bound,
    roundtrips_from_finesse,
)
from .spectrum_io import read_spectrum, write_spectrum

__version__ = "0.1.0"

__all__ = [
    "analyze_spectrum",
    "angular_frequency",
    "audit",
    "awg_resolvance",
    "AwgSpec",
    "coherence_length",
    "ConfigError",
    "device_delta_t",
    "device_footprint",
    "DomainError",
    "fabry_perot_spectrum",
    "FabryPerotSpec",
    "find_resonances",
    "fit_lorentzian",
    "fit_microring",
    "FitProblem",
    "FitResult",
    "fp_time_uncertainty",
    "grating_resolvance",
    "GratingSpec",
    "hup_min_linewidth",
    "HupReport",
    "LorentzianParams",
    "metrics",
    "microring_closed_form_finesse",
    "microring_drop_spectrum",
    "microring_fsr",
    "microring_through_spectrum",
    "MicroringSpec",
    "parse_config",
    "photon_energy",
    "q_factor",
    "read_spectrum",
    "residual_curve",
    "ResonanceFeature",
    "resonator_linewidth_bound",
    "roundtrips_from_finesse",
    "RunConfig",
    "SingularSystemError",
    "SpectralMetrics",
    "Spectrum",
    "SpectrumFormatError",
    "WavelengthGrid",
    "write_spectrum",
]
