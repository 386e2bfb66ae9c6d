"""Satellite-user-Earth geometry and the angle-dependent Doppler model.

Angles are in radians and measured off boresight (zenith); positive angles
correspond to a receding satellite, i.e. a negative Doppler shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, OutOfRange

MU_EARTH = 3.986004418e14  # m^3/s^2
EARTH_RADIUS = 6_371_000.0  # m
SPEED_OF_LIGHT = 299_792_458.0  # m/s

#: Relative tolerance on |f_hat| / alpha before an estimate is rejected.
CLAMP_BAND = 0.01


def orbital_velocity(a_sat: float, r_E: float = EARTH_RADIUS) -> float:
    """Circular-orbit speed ``sqrt(mu / (r_E + a_sat))`` in m/s."""
    if a_sat <= 0:
        raise ConfigError(f"orbital altitude must be positive, got {a_sat}")
    return math.sqrt(MU_EARTH / (r_E + a_sat))


@dataclass(frozen=True)
class SystemConfig:
    """Physical and system constants for one simulated terminal.

    Parameters
    ----------
    f_c, f_p, f_s : float
        Array centre, pilot and sampling frequencies (Hz).
    a_sat : float
        Orbital altitude (m).
    v_sat : float or None
        Satellite speed (m/s). ``None`` selects the circular-orbit speed.
    r_E, c : float
        Earth radius (m) and speed of light (m/s).
    beta : float
        Minimum elevation angle (rad); the field of view is
        ``[-pi/2 + beta, pi/2 - beta]``.
    N, L, M : int
        Antenna elements, samples per slot and smoothing window length.
    seed : int
        Default master seed for Monte Carlo runs.
    """

    f_c: float = 20e9
    f_p: float = 20e9
    f_s: float = 1e6
    a_sat: float = 500e3
    v_sat: float | None = None
    r_E: float = EARTH_RADIUS
    c: float = SPEED_OF_LIGHT
    beta: float = math.radians(10.0)
    N: int = 64
    L: int = 64
    M: int = 32
    seed: int = 0
    _v: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("f_c", "f_p", "f_s", "a_sat", "r_E", "c"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.v_sat is not None and not self.v_sat > 0:
            raise ConfigError(f"v_sat must be positive, got {self.v_sat}")
        if self.N < 1 or self.L < 1:
            raise ConfigError("N and L must be at least 1")
        if not 1 <= self.M <= self.L:
            raise ConfigError(f"smoothing window M={self.M} must satisfy 1 <= M <= L={self.L}")
        if not 0 <= self.beta < math.pi / 2:
            raise ConfigError(f"beta must lie in [0, pi/2), got {self.beta}")
        v = self.v_sat if self.v_sat is not None else orbital_velocity(self.a_sat, self.r_E)
        object.__setattr__(self, "_v", v)
        a = alpha(self)
        if not self.f_s > 2 * a:
            raise ConfigError(
                f"sampling rate {self.f_s:g} Hz aliases the Doppler band (need > {2 * a:g} Hz)"
            )

    @property
    def velocity(self) -> float:
        """Satellite speed actually used (override or circular-orbit value)."""
        return self._v

    @property
    def fov(self) -> tuple[float, float]:
        edge = math.pi / 2 - self.beta
        return (-edge, edge)

    @property
    def fov_edge(self) -> float:
        return math.pi / 2 - self.beta

    def replace(self, **changes) -> "SystemConfig":
        kwargs = {f.name: getattr(self, f.name) for f in fields(self) if f.init}
        kwargs.update(changes)
        return SystemConfig(**kwargs)


@dataclass(frozen=True)
class DopplerModel:
    """Sinusoidal Doppler law ``f_D(theta) = -alpha * sin(theta)``."""

    alpha: float

    @classmethod
    def from_config(cls, cfg: SystemConfig) -> "DopplerModel":
        return cls(alpha(cfg))


def alpha(cfg: SystemConfig) -> float:
    """Doppler scale ``f_p v r_E / (c (r_E + a_sat))`` in Hz."""
    return cfg.f_p * cfg.velocity * cfg.r_E / (cfg.c * (cfg.r_E + cfg.a_sat))


def doppler_from_angle(theta, model: DopplerModel):
    return -model.alpha * np.sin(theta)


def satellite_position(theta, cfg: SystemConfig):
    """Satellite ``(x, y)`` and slant range ``d`` for off-zenith angle ``theta``.

    Earth's centre is the origin and the user sits at ``(0, r_E)``; the
    satellite is where the ray from the user meets the orbit circle of
    radius ``r_E + a_sat``.
    """
    theta = np.asarray(theta, dtype=float)
    R = cfg.r_E + cfg.a_sat
    d = -cfg.r_E * np.cos(theta) + np.sqrt(R**2 - (cfg.r_E * np.sin(theta)) ** 2)
    return d * np.sin(theta), cfg.r_E + d * np.cos(theta), d


def doppler_from_geometry(theta, cfg: SystemConfig):
    """Doppler shift from the raw geometric chain, without the sinusoidal closed form.

    Uses the law-of-sines relation for the Earth-centre angle and the
    standard projection of the satellite velocity onto the line of sight.
    """
    theta = np.asarray(theta, dtype=float)
    psi = theta + np.arcsin(cfg.r_E * np.sin(theta) / (cfg.r_E + cfg.a_sat))
    return -(cfg.f_p * cfg.velocity / cfg.c) * np.sin(psi - theta)


def angle_from_doppler(f_hat, model: DopplerModel):
    """Invert the Doppler law; ``theta = -arcsin(f_hat / alpha)``.

    Estimates that overshoot ``alpha`` by at most :data:`CLAMP_BAND`
    (relative) are clamped to the band edge.

    Raises
    ------
    OutOfRange
        If any ``|f_hat| > alpha * (1 + CLAMP_BAND)``.
    """
    ratio = np.asarray(f_hat, dtype=float) / model.alpha
    if np.any(np.abs(ratio) > 1 + CLAMP_BAND):
        raise OutOfRange(
            f"Doppler estimate {np.max(np.abs(f_hat)):g} Hz exceeds alpha={model.alpha:g} Hz"
        )
    theta = -np.arcsin(np.clip(ratio, -1.0, 1.0))
    return float(theta) if theta.ndim == 0 else theta
