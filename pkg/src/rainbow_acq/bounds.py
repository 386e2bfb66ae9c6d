"""Root Cramér-Rao bound for single-satellite angle estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamformer import BeamformerDesign, rainbow_gain
from .errors import DomainError
from .geometry import SystemConfig, alpha


@dataclass(frozen=True)
class CrbPoint:
    snr_db: float
    theta: float
    rcrb_rad: float


def per_sample_snr(snr_db: float, theta: float, cfg: SystemConfig, design: BeamformerDesign | None = None) -> float:
    """``|g~ x|^2 / sigma^2`` for a unit-modulus satellite at effective SNR ``snr_db``."""
    g_eff = cfg.N * rainbow_gain(theta, cfg, design)  # |w^H a|^2
    return 10.0 ** (snr_db / 10.0) * g_eff / (cfg.N * cfg.L)


def frequency_crb(rho: float, L: int, f_s: float) -> float:
    """Variance bound (Hz^2) for a complex tone of unknown amplitude, phase and frequency."""
    return 6.0 * f_s**2 / ((2 * math.pi) ** 2 * rho * L * (L**2 - 1))


def rcrb_angle(snr_db: float, theta: float, cfg: SystemConfig, design: BeamformerDesign | None = None) -> float:
    """Root CRB (rad) on the angle, via the Doppler law ``theta = -arcsin(f / alpha)``."""
    cos_t = math.cos(theta)
    if abs(cos_t) < 1e-12:
        raise DomainError("angle bound is unbounded at theta = +/-pi/2")
    if not math.isfinite(snr_db):
        raise DomainError("SNR must be finite")
    var_f = frequency_crb(per_sample_snr(snr_db, theta, cfg, design), cfg.L, cfg.f_s)
    return math.sqrt(var_f) / (alpha(cfg) * abs(cos_t))


def crb_curve(snr_grid_db, theta: float, cfg: SystemConfig) -> list[CrbPoint]:
    return [CrbPoint(float(s), theta, rcrb_angle(float(s), theta, cfg)) for s in np.atleast_1d(snr_grid_db)]
