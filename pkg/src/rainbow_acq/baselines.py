"""Time-domain beam-sweeping acquisition baselines.

Both sweeps use the phase-only conventional beam of
:func:`rainbow_acq.beamformer.conventional_design`. The satellite gains are
held fixed for the whole sweep while noise is redrawn every slot.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .beamformer import array_factor, jpta_phase
from .estimators import AngleEstimates, Method
from .geometry import DopplerModel, SystemConfig, doppler_from_angle
from .synthesis import Scenario, complex_noise, scenario_noise_var, sinusoid


class Stage(str, enum.Enum):
    SINGLE = "single"
    COARSE = "coarse"
    FINE = "fine"


@dataclass
class SweepPlan:
    n_ts: int
    beam_centers: np.ndarray
    stage: Stage = Stage.SINGLE

    @property
    def step(self) -> float:
        return float(self.beam_centers[1] - self.beam_centers[0]) if self.n_ts > 1 else math.nan


def sweep_beams(n_ts: int, cfg: SystemConfig, stage: Stage = Stage.SINGLE) -> SweepPlan:
    """Centres ``-pi/2 + beta + (m - 1/2) * dtheta`` of ``n_ts`` equal FOV segments."""
    if n_ts < 1:
        raise ValueError("n_ts must be >= 1")
    lo, hi = cfg.fov
    dtheta = (hi - lo) / n_ts
    m = np.arange(1, n_ts + 1)
    return SweepPlan(n_ts, lo + (m - 0.5) * dtheta, stage)


def slot_powers(scenario: Scenario, centers, cfg: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Received energy ``sum |y[l]|^2`` in one slot per beam centre, fresh noise each slot."""
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    var = scenario_noise_var(scenario, cfg)
    if scenario.K == 0:
        clean = np.zeros((centers.size, cfg.L), dtype=complex)
    else:
        # phase-only beams (tau = 0, phi = pi sin(center)); rows are slots, columns satellites
        fd = doppler_from_angle(scenario.angles, DopplerModel.from_config(cfg))
        phi = np.mod(np.pi * np.sin(centers), 2 * np.pi)[:, None]
        x = jpta_phase(cfg.f_p, scenario.angles[None, :], 0.0, phi, cfg.f_c, fd[None, :])
        amps = scenario.gains * scenario.pilots * array_factor(x, cfg.N)
        clean = amps @ sinusoid(scenario.angles, cfg).T
    if var > 0:
        clean = clean + complex_noise(var, clean.shape, rng)
    return np.sum(np.abs(clean) ** 2, axis=1)


def pick_peaks(centers: np.ndarray, powers: np.ndarray, K: int, N: int | None = None) -> np.ndarray:
    """Centres of the K strongest slots, padded with 0 rad if fewer are available.

    With ``N`` given, a slot is skipped when it lies within the first null
    (``|sin a - sin b| < 2/N``) of a stronger slot already picked, so one
    satellite's mainlobe cannot claim several estimates.
    """
    out = np.zeros(K)
    picked: list[float] = []
    for i in np.argsort(-powers, kind="stable"):
        if len(picked) == K:
            break
        s = math.sin(centers[i])
        if N is not None and any(abs(s - math.sin(p)) < 2.0 / N for p in picked):
            continue
        picked.append(float(centers[i]))
    out[: len(picked)] = picked
    return out


def _result(angles: np.ndarray, method: Method, cfg: SystemConfig, slots: int) -> AngleEstimates:
    fd = doppler_from_angle(angles, DopplerModel.from_config(cfg))
    return AngleEstimates(angles, np.asarray(fd, dtype=float), method, n_ops=slots)


def conventional_sweep(
    scenario: Scenario,
    n_ts: int,
    K: int,
    cfg: SystemConfig,
    rng: np.random.Generator,
    suppress: bool = True,
) -> AngleEstimates:
    """Sweep ``n_ts`` beams once and return the centres of the K strongest slots.

    When ``n_ts < K`` the missing estimates are 0 rad. ``suppress`` enables
    mainlobe suppression in :func:`pick_peaks`. ``n_ops`` holds the number of
    slots actually used.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    plan = sweep_beams(n_ts, cfg)
    powers = slot_powers(scenario, plan.beam_centers, cfg, rng)
    est = pick_peaks(plan.beam_centers, powers, K, cfg.N if suppress else None)
    return _result(est, Method.SWEEP, cfg, plan.n_ts)


def hierarchical_split(n_ts: int, K: int) -> tuple[int, int]:
    """Slot allocation ``(coarse slots, fine slots per candidate)``."""
    return n_ts // 2, n_ts // (2 * K)


def hierarchical_sweep(
    scenario: Scenario,
    n_ts: int,
    K: int,
    cfg: SystemConfig,
    rng: np.random.Generator,
    suppress: bool = True,
) -> AngleEstimates:
    """Two-stage coarse-to-fine sweep.

    Stage 1 spends ``n_ts // 2`` slots on a sweep with step ``2 * dtheta``
    and keeps the K strongest centres. Stage 2 gives each candidate
    ``n_ts // (2K)`` slots spread uniformly (endpoints included) over
    ``[c - dtheta, c + dtheta]`` and keeps the strongest fine beam. A
    candidate with no fine slots keeps its coarse estimate; ``n_ts == 1``
    yields all-zero estimates.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if n_ts < 1:
        raise ValueError("n_ts must be >= 1")
    if n_ts == 1:
        return _result(np.zeros(K), Method.HIERARCHICAL, cfg, 0)

    lo, hi = cfg.fov
    dtheta = (hi - lo) / n_ts
    n_coarse, n_fine = hierarchical_split(n_ts, K)
    coarse = sweep_beams(n_coarse, cfg, Stage.COARSE)
    powers = slot_powers(scenario, coarse.beam_centers, cfg, rng)
    candidates = pick_peaks(coarse.beam_centers, powers, K, cfg.N if suppress else None)
    n_candidates = min(K, n_coarse)
    used = n_coarse

    estimates = candidates.copy()
    if n_fine >= 1:
        for k in range(n_candidates):
            c = candidates[k]
            if n_fine == 1:
                fine = np.array([c])
            else:
                fine = np.linspace(c - dtheta, c + dtheta, n_fine)
            p = slot_powers(scenario, fine, cfg, rng)
            estimates[k] = fine[int(np.argmax(p))]
            used += n_fine
    return _result(estimates, Method.HIERARCHICAL, cfg, used)
