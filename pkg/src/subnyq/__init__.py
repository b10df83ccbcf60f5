"""Sub-Nyquist sampling and recovery of multipath time delays.

A signal made of ``K`` delayed, sequence-modulated copies of a known pulse
is sampled by ``p`` parallel filter channels at rate ``1/T`` each. After a
digital correction bank, the delays are recovered with ESPRIT (with spatial
smoothing for correlated gains) and the gain sequences by linear filtering.
"""

__version__ = "0.1.0"

from .correction import CorrectionBank, apply, build_exact, design_fir
from .delay_recovery import correlation, effective_rank, esprit, recover_delays, spatial_smooth
from .exceptions import (
    ConfigError,
    DegenerateModelError,
    DomainError,
    FrontEndSingularError,
    IllConditionedPulseError,
    InsufficientChannelsError,
    RankDeficientSubspaceError,
    SubNyqError,
)
from .frontend import (
    MeasurementSet,
    add_noise,
    delayed_lowpass,
    dirac_pulse,
    flat_pulse,
    ideal_bandpass,
    oracle_samples,
    synthesize_samples,
    tapered_bandpass,
)
from .gain_recovery import recover_a, recover_b, recover_channel_coeffs
from .model import BandConfig, DelaySet, jakes_gains, steering_vector, vandermonde

__all__ = [
    "BandConfig",
    "DelaySet",
    "steering_vector",
    "vandermonde",
    "jakes_gains",
    "MeasurementSet",
    "ideal_bandpass",
    "delayed_lowpass",
    "tapered_bandpass",
    "flat_pulse",
    "dirac_pulse",
    "synthesize_samples",
    "oracle_samples",
    "add_noise",
    "CorrectionBank",
    "build_exact",
    "design_fir",
    "apply",
    "correlation",
    "effective_rank",
    "spatial_smooth",
    "esprit",
    "recover_delays",
    "recover_a",
    "recover_b",
    "recover_channel_coeffs",
    "SubNyqError",
    "DomainError",
    "DegenerateModelError",
    "IllConditionedPulseError",
    "FrontEndSingularError",
    "InsufficientChannelsError",
    "RankDeficientSubspaceError",
    "ConfigError",
]
