"""One-shot LEO satellite acquisition with Doppler-aware rainbow beamforming."""

from .beamformer import BeamformerDesign, bf_gain, rainbow_design
from .estimators import AngleEstimates, Method, fft_estimate, mle_estimate, root_music_estimate
from .geometry import DopplerModel, SystemConfig, alpha, angle_from_doppler, doppler_from_angle
from .synthesis import Measurement, Scenario, synthesize

__all__ = [
    "AngleEstimates",
    "BeamformerDesign",
    "DopplerModel",
    "Measurement",
    "Method",
    "Scenario",
    "SystemConfig",
    "alpha",
    "angle_from_doppler",
    "bf_gain",
    "doppler_from_angle",
    "fft_estimate",
    "mle_estimate",
    "rainbow_design",
    "root_music_estimate",
    "synthesize",
]
