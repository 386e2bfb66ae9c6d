"""Beamformed, down-converted single-slot measurements of K pilot tones."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamformer import BeamformerDesign, jpta_weights, steering_vector
from .geometry import DopplerModel, SystemConfig, doppler_from_angle


@dataclass
class Scenario:
    """K satellites seen in one acquisition trial.

    ``snr_db`` is the effective per-satellite SNR
    ``|g|^2 |x|^2 N L / sigma^2``; ``math.inf`` gives a noiseless slot.
    """

    angles: np.ndarray
    gains: np.ndarray
    pilots: np.ndarray
    snr_db: float = math.inf

    def __post_init__(self):
        self.angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        self.gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        self.pilots = np.atleast_1d(np.asarray(self.pilots, dtype=complex))
        if not (self.angles.shape == self.gains.shape == self.pilots.shape):
            raise ValueError("angles, gains and pilots must have the same length")

    @property
    def K(self) -> int:
        return self.angles.size

    def check_fov(self, cfg: SystemConfig) -> None:
        edge = cfg.fov_edge
        if np.any(np.abs(self.angles) > edge + 1e-12):
            raise ValueError(f"satellite angles must lie within +/-{math.degrees(edge):.3f} deg")

    @classmethod
    def random(cls, angles, snr_db: float, rng: np.random.Generator) -> "Scenario":
        """Unit-modulus gains with uniform random phase; unit pilots."""
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        phases = rng.uniform(0.0, 2 * math.pi, size=angles.size)
        return cls(angles, np.exp(1j * phases), np.ones(angles.size, dtype=complex), snr_db)


@dataclass
class Measurement:
    samples: np.ndarray
    noise_var: float

    def __len__(self):
        return self.samples.size


def effective_channel(theta: float, gain: complex, design: BeamformerDesign, cfg: SystemConfig) -> complex:
    """``g * w^H a`` evaluated at the satellite's Doppler-shifted pilot frequency."""
    f = cfg.f_p + doppler_from_angle(theta, DopplerModel.from_config(cfg))
    w = jpta_weights(f, design, cfg.N)
    a = steering_vector(f, theta, cfg.N, cfg.f_c)
    return gain * np.vdot(w, a)


def sinusoid(theta, cfg: SystemConfig) -> np.ndarray:
    """Length-L tone ``exp(j 2 pi f_D(theta) l / f_s)``; a matrix (L, K) for vector input."""
    fd = doppler_from_angle(np.asarray(theta, dtype=float), DopplerModel.from_config(cfg))
    ell = np.arange(cfg.L)
    return np.exp(2j * math.pi * np.multiply.outer(ell, fd) / cfg.f_s)


def noise_variance_for_snr(snr_db: float, gain: complex, pilot: complex, cfg: SystemConfig) -> float:
    return abs(gain) ** 2 * abs(pilot) ** 2 * cfg.N * cfg.L / 10.0 ** (snr_db / 10.0)


def scenario_noise_var(scenario: Scenario, cfg: SystemConfig) -> float:
    """Common noise variance, referenced to the mean ``|g x|^2`` of the scenario."""
    if scenario.K == 0:
        ref = 1.0
    else:
        ref = float(np.mean(np.abs(scenario.gains * scenario.pilots) ** 2))
    return noise_variance_for_snr(scenario.snr_db, math.sqrt(ref), 1.0, cfg)


def complex_noise(var: float, shape, rng: np.random.Generator) -> np.ndarray:
    """Circularly-symmetric complex Gaussian draws with total variance ``var``."""
    scale = math.sqrt(var / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def noiseless_samples(scenario: Scenario, design: BeamformerDesign, cfg: SystemConfig) -> np.ndarray:
    if scenario.K == 0:
        return np.zeros(cfg.L, dtype=complex)
    amps = np.array(
        [effective_channel(t, g, design, cfg) for t, g in zip(scenario.angles, scenario.gains)]
    )
    return sinusoid(scenario.angles, cfg) @ (amps * scenario.pilots)


def synthesize(
    scenario: Scenario,
    design: BeamformerDesign,
    cfg: SystemConfig,
    rng: np.random.Generator,
    n_slots: int = 1,
) -> Measurement:
    """Draw the measurement ``y = F(Theta) s + z`` for one slot.

    With ``n_slots > 1`` the same signal is observed in every slot with fresh
    noise and the slot vectors are averaged, so the returned ``noise_var`` is
    the per-sample variance of the average.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    clean = noiseless_samples(scenario, design, cfg)
    var = scenario_noise_var(scenario, cfg)
    if var == 0:
        return Measurement(clean, 0.0)
    z = complex_noise(var, (n_slots, cfg.L), rng).mean(axis=0)
    return Measurement(clean + z, var / n_slots)
