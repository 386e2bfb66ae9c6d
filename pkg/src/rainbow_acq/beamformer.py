"""Frequency-dependent array response and the joint phase-time array (JPTA).

Antenna ``n`` is 1-based in the formulas (phase ``(n-1) * ...``) and 0-based
in storage, so element ``i`` of every vector carries phase ``i * ...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DopplerModel, SystemConfig, alpha, doppler_from_angle

TWO_PI = 2.0 * math.pi
_SMALL_HALF_ARG = 1e-8


@dataclass(frozen=True)
class BeamformerDesign:
    """Progressive delay ``tau`` (s) and progressive phase ``phi`` (rad, in [0, 2pi))."""

    tau: float
    phi: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"progressive delay must be non-negative, got {self.tau}")
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


def steering_vector(f: float, theta: float, N: int, f_c: float) -> np.ndarray:
    """Array response ``a(f, theta)`` of a half-wavelength ULA (spacing set at ``f_c``)."""
    n = np.arange(N)
    return np.exp(-1j * math.pi * (f / f_c) * n * math.sin(theta))


def jpta_weights(f: float, design: BeamformerDesign, N: int) -> np.ndarray:
    """JPTA combining vector ``w(f, tau, phi)``; the combiner output is ``w^H y``.

    ``w^H`` applies phase ``(n-1) * (phi - 2 pi f tau)`` to element ``n``.
    """
    n = np.arange(N)
    step = design.phi - np.mod(TWO_PI * f * design.tau, TWO_PI)
    return np.exp(-1j * n * step)


def phase_argument(f, theta, design: BeamformerDesign, f_c: float, f_offset=0.0):
    """Per-element phase progression of ``w^H a`` at ``f + f_offset``, wrapped to ``(-pi, pi]``.

    The gain is maximal exactly when this argument is a multiple of ``2 pi``.
    Passing a small offset (e.g. a Doppler shift) separately from the carrier
    avoids rounding ``f + f_offset`` at GHz magnitude.
    """
    return jpta_phase(f, theta, design.tau, design.phi, f_c, f_offset)


def jpta_phase(f, theta, tau, phi, f_c: float, f_offset=0.0):
    """Array form of :func:`phase_argument`; all inputs broadcast."""
    f = np.asarray(f, dtype=float)
    f_offset = np.asarray(f_offset, dtype=float)
    theta = np.asarray(theta, dtype=float)
    tau = np.asarray(tau, dtype=float)
    # 2*pi*f*tau is ~1e5 rad at Ka band: reduce the carrier part on its own
    ttd = np.mod(TWO_PI * f * tau, TWO_PI) + TWO_PI * f_offset * tau
    x = phi - ttd - math.pi * ((f + f_offset) / f_c) * np.sin(theta)
    return -np.mod(-x + math.pi, TWO_PI) + math.pi


def array_factor(x, N: int):
    """Complex sum ``sum_{n=0}^{N-1} exp(j n x)``, i.e. ``w^H a`` for phase progression ``x``."""
    x = np.asarray(x, dtype=float)
    half = np.sin(x / 2)
    small = np.abs(half) < _SMALL_HALF_ARG
    ratio = np.sin(N * x / 2) / np.where(small, 1.0, half)
    out = np.exp(0.5j * (N - 1) * x) * np.where(small, N, ratio)
    if np.any(small):
        n = np.arange(N)
        out[small] = np.exp(1j * np.multiply.outer(x[small], n)).sum(axis=-1)
    return out


def dirichlet_gain(x, N: int):
    """``sin^2(N x / 2) / (N sin^2(x / 2))``, the normalised array factor power.

    Falls back to the direct sum ``|sum_n exp(j n x)|^2 / N`` where
    ``|sin(x/2)|`` is too small for the ratio to be stable.
    """
    x = np.asarray(x, dtype=float)
    half = np.sin(x / 2)
    small = np.abs(half) < _SMALL_HALF_ARG
    safe = np.where(small, 1.0, half)
    out = np.sin(N * x / 2) ** 2 / (N * safe**2)
    if np.any(small):
        n = np.arange(N)
        direct = np.abs(np.exp(1j * np.multiply.outer(x[small], n)).sum(axis=-1)) ** 2 / N
        out = np.where(small, 0.0, out)
        out[small] = direct
    return out if out.ndim else float(out)


def bf_gain(f, theta, design: BeamformerDesign, N: int, f_c: float, f_offset=0.0):
    """BF gain ``|w^H a|^2 / N`` at frequency ``f + f_offset``; bounded by ``N``."""
    return dirichlet_gain(phase_argument(f, theta, design, f_c, f_offset), N)


def bf_gain_direct(f: float, theta: float, design: BeamformerDesign, N: int, f_c: float) -> float:
    """Same quantity as :func:`bf_gain` evaluated from the explicit vectors."""
    w = jpta_weights(f, design, N)
    a = steering_vector(f, theta, N, f_c)
    return abs(np.vdot(w, a)) ** 2 / N


def rainbow_design(cfg: SystemConfig) -> BeamformerDesign:
    """Closed-form delay/phase pair that steers frequency ``f_p - alpha sin(theta)`` to ``theta``.

    The delay cancels the ``sin(theta)`` term of the max-gain condition and
    the phase cancels the constant term; only the ``alpha/f_c sin^2`` residue
    remains, which :func:`gain_loss_approx` quantifies.
    """
    a = alpha(cfg)
    tau = cfg.f_p / (2 * cfg.f_c * a)
    phi = math.pi * cfg.f_p**2 / (a * cfg.f_c)
    return BeamformerDesign(tau=tau, phi=phi)


def conventional_design(theta0: float) -> BeamformerDesign:
    """Phase-only (no TTD) beam pointed at ``theta0`` for the carrier ``f_c``."""
    return BeamformerDesign(tau=0.0, phi=math.pi * math.sin(theta0))


def rainbow_gain(theta, cfg: SystemConfig, design: BeamformerDesign | None = None):
    """Gain seen by a satellite at ``theta`` at its own Doppler-shifted pilot frequency."""
    if design is None:
        design = rainbow_design(cfg)
    fd = doppler_from_angle(theta, DopplerModel.from_config(cfg))
    return bf_gain(cfg.f_p, theta, design, cfg.N, cfg.f_c, f_offset=fd)


def gain_loss_exact(theta, cfg: SystemConfig, design: BeamformerDesign | None = None):
    """``|N - G|`` for a satellite at ``theta``, from the exact array factor."""
    return np.abs(cfg.N - rainbow_gain(theta, cfg, design))


def gain_loss_approx(theta, cfg: SystemConfig):
    """Small-argument loss ``pi^2 f_p^2 v^2 r_E^2 N^3 sin^4(theta) / (12 f_c^2 c^2 (r_E+a)^2)``."""
    k = (math.pi * cfg.f_p * cfg.velocity * cfg.r_E) / (cfg.f_c * cfg.c * (cfg.r_E + cfg.a_sat))
    return k**2 / 12.0 * cfg.N**3 * np.sin(theta) ** 4
