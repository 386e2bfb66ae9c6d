"""One-shot Doppler-frequency estimators mapped to satellite angles.

Every estimator takes a single measurement vector ``y`` (length L), the number
of satellites ``K`` and the system configuration, and returns an
:class:`AngleEstimates`. ``n_ops`` is a coarse count of the dominant
arithmetic work and exists so that the relative cost of the methods can be
checked without timing anything.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.optimize import minimize_scalar

from .errors import (
    DegenerateSubspaceWarning,
    NotEnoughPeaks,
    RootFindingFailed,
    SingularProjection,
)
from .geometry import DopplerModel, SystemConfig, angle_from_doppler, doppler_from_angle
from .synthesis import Measurement

DEFAULT_PAD_FACTOR = 4
DEFAULT_GRID_SIZE = 2048
MAX_EXHAUSTIVE_CANDIDATES = 10**8
MAX_GRAM_CONDITION = 1e12
DEGENERATE_GAP = 1e-12


class Method(str, enum.Enum):
    FFT = "fft"
    MLE = "mle"
    ROOT_MUSIC = "music"
    SWEEP = "conventional"
    HIERARCHICAL = "hierarchical"


@dataclass
class AngleEstimates:
    angles_rad: np.ndarray
    dopplers_hz: np.ndarray
    method: Method
    n_ops: int = 0


def _samples(y) -> np.ndarray:
    if isinstance(y, Measurement):
        return y.samples
    return np.asarray(y, dtype=complex)


def _finish(dopplers, method: Method, cfg: SystemConfig, n_ops: int) -> AngleEstimates:
    model = DopplerModel.from_config(cfg)
    dopplers = np.asarray(dopplers, dtype=float)
    angles = np.atleast_1d(angle_from_doppler(dopplers, model))
    return AngleEstimates(angles, dopplers, method, int(n_ops))


# --------------------------------------------------------------------- FFT


def fft_estimate(y, K: int, cfg: SystemConfig, pad_factor: int = DEFAULT_PAD_FACTOR) -> AngleEstimates:
    """Pick the K strongest peaks of the zero-padded spectrum of ``y``.

    Peaks are local maxima of ``|Y[k]|`` (circular), accepted greedily by
    magnitude; an accepted peak suppresses any other candidate within one
    unpadded bin (``pad_factor`` padded bins) of it. No sub-bin
    interpolation is applied.

    Raises
    ------
    NotEnoughPeaks
        If fewer than ``K`` separated local maxima exist.
    """
    y = _samples(y)
    L = y.size
    if K < 1 or pad_factor < 1:
        raise ValueError("K and pad_factor must be >= 1")
    if K > L:
        raise ValueError(f"cannot resolve K={K} tones from {L} samples")
    n_fft = pad_factor * L
    mag = np.abs(np.fft.fft(y, n_fft))
    left = np.roll(mag, 1)
    right = np.roll(mag, -1)
    candidates = np.flatnonzero((mag > left) & (mag >= right))
    candidates = candidates[np.argsort(-mag[candidates], kind="stable")]

    picked: list[int] = []
    for k in candidates:
        dist = [min(abs(k - p), n_fft - abs(k - p)) for p in picked]
        if all(d > pad_factor for d in dist):
            picked.append(int(k))
            if len(picked) == K:
                break
    if len(picked) < K:
        raise NotEnoughPeaks(f"found {len(picked)} separated peaks, need {K}")

    bins = np.array(picked)
    bins = np.where(bins > n_fft // 2, bins - n_fft, bins)
    freqs = bins * cfg.f_s / n_fft
    return _finish(freqs, Method.FFT, cfg, n_fft * max(1, math.ceil(math.log2(n_fft))))


# --------------------------------------------------------------------- MLE


def mle_grid(cfg: SystemConfig, n_grid: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Uniform angular grid covering the field of view, endpoints included."""
    if n_grid < 2:
        raise ValueError("grid needs at least two points")
    lo, hi = cfg.fov
    return np.linspace(lo, hi, n_grid)


def projection_objective(y: np.ndarray, F: np.ndarray) -> float:
    """``y^H F (F^H F)^{-1} F^H y``: energy of ``y`` in the span of the columns of ``F``.

    Raises
    ------
    SingularProjection
        If the Gram matrix condition number exceeds ``MAX_GRAM_CONDITION``.
    """
    F = np.asarray(F).reshape(y.size, -1)
    gram = F.conj().T @ F
    if np.linalg.cond(gram) > MAX_GRAM_CONDITION:
        raise SingularProjection("sinusoid columns are numerically collinear")
    c = F.conj().T @ y
    return float(np.real(np.vdot(c, np.linalg.solve(gram, c))))


def _tones(nu: np.ndarray, L: int) -> np.ndarray:
    return np.exp(2j * math.pi * np.multiply.outer(np.arange(L), nu))


def _pair_gram(dnu: np.ndarray, L: int) -> np.ndarray:
    """``f_i^H f_j`` for normalised frequency offsets ``dnu = nu_j - nu_i``."""
    s = np.sin(math.pi * dnu)
    small = np.abs(s) < 1e-12
    ratio = np.where(small, L, np.sin(math.pi * dnu * L) / np.where(small, 1.0, s))
    return np.exp(1j * math.pi * dnu * (L - 1)) * ratio


def _exhaustive_pairs(c: np.ndarray, nu: np.ndarray, L: int) -> tuple[int, int, int]:
    n = nu.size
    best, best_ij = -np.inf, (0, 1)
    p = np.abs(c) ** 2
    chunk = 256
    for start in range(0, n, chunk):
        i = np.arange(start, min(start + chunk, n))[:, None]
        j = np.arange(n)[None, :]
        r = _pair_gram(nu[j] - nu[i], L)
        ar = np.abs(r)
        det = L**2 - ar**2
        valid = (j > i) & ((L + ar) < MAX_GRAM_CONDITION * (L - ar))
        num = L * (p[i] + p[j]) - 2 * np.real(np.conj(c[i]) * r * c[j])
        obj = np.where(valid, num / np.where(valid, det, 1.0), -np.inf)
        k = int(np.argmax(obj))
        if obj.flat[k] > best:
            best = obj.flat[k]
            best_ij = (int(i[k // n, 0]), k % n)
    return best_ij + (n * (n - 1) // 2,)


def _greedy(y: np.ndarray, K: int, F: np.ndarray) -> tuple[list[int], int]:
    """Sequential projection pursuit followed by one coordinate-refinement sweep."""
    L, n = F.shape
    norms = np.sum(np.abs(F) ** 2, axis=0)

    def best_addition(chosen: list[int]) -> int:
        if chosen:
            S = F[:, chosen]
            Q, _ = np.linalg.qr(S)
            resid = y - Q @ (Q.conj().T @ y)
            G = F - Q @ (Q.conj().T @ F)
        else:
            resid, G = y, F
        energy = np.sum(np.abs(G) ** 2, axis=0)
        ok = energy > norms / MAX_GRAM_CONDITION
        gain = np.where(ok, np.abs(G.conj().T @ resid) ** 2 / np.where(ok, energy, 1.0), -np.inf)
        if chosen:
            gain[chosen] = -np.inf
        return int(np.argmax(gain))

    chosen: list[int] = []
    evals = 0
    for _ in range(K):
        chosen.append(best_addition(chosen))
        evals += n
    for k in range(K):
        others = chosen[:k] + chosen[k + 1:]
        chosen[k] = best_addition(others)
        evals += n
    return chosen, evals


def _refine(y: np.ndarray, nu_of, thetas: np.ndarray, step: float, lo: float, hi: float, rounds: int):
    """Continuous coordinate ascent of the projection objective, one angle at a time."""
    L = y.size
    thetas = thetas.copy()
    evals = 0
    for _ in range(rounds):
        for k in range(thetas.size):
            def neg(t, k=k):
                trial = thetas.copy()
                trial[k] = t
                try:
                    return -projection_objective(y, _tones(nu_of(trial), L))
                except SingularProjection:
                    return np.inf
            a, b = max(lo, thetas[k] - step), min(hi, thetas[k] + step)
            res = minimize_scalar(neg, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
            evals += res.nfev
            if res.fun <= neg(thetas[k]):
                thetas[k] = res.x
    return thetas, evals


def mle_estimate(
    y,
    K: int,
    cfg: SystemConfig,
    grid: np.ndarray | None = None,
    refine: bool = True,
) -> AngleEstimates:
    """Grid-search maximum-likelihood angles for K tones.

    K=1 maximises ``|f(theta)^H y|``; K=2 searches all grid pairs; K>=3 uses
    greedy sequential projection with one coordinate-refinement sweep. With
    ``refine`` the grid optimum is polished by bounded continuous search
    within one grid step of each angle.
    """
    y = _samples(y)
    L = y.size
    if K < 1:
        raise ValueError("K must be >= 1")
    if grid is None:
        grid = mle_grid(cfg)
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    if n < 2:
        raise ValueError("grid needs at least two points")
    model = DopplerModel.from_config(cfg)

    def nu_of(theta):
        return doppler_from_angle(theta, model) / cfg.f_s

    nu = nu_of(grid)
    F = _tones(nu, L)
    c = F.conj().T @ y

    if K == 1:
        idx = [int(np.argmax(np.abs(c)))]
        evals = n
    elif K == 2:
        if n**2 > MAX_EXHAUSTIVE_CANDIDATES:
            raise ValueError(f"exhaustive search over {n}^2 pairs exceeds the candidate budget")
        i, j, evals = _exhaustive_pairs(c, nu, L)
        idx = [i, j]
    else:
        idx, evals = _greedy(y, K, F)
    ops = n * L + evals * (L + K**3)

    thetas = grid[idx]
    if refine:
        step = float(np.max(np.diff(np.sort(grid))))
        lo, hi = cfg.fov
        thetas, more = _refine(y, nu_of, thetas, step, lo, hi, rounds=1 if K == 1 else 2)
        ops += more * (L * K + K**3)
    fd = doppler_from_angle(thetas, model)
    return AngleEstimates(np.asarray(thetas, dtype=float), np.asarray(fd, dtype=float), Method.MLE, ops)


# --------------------------------------------------------------- root-MUSIC


def spatial_smoothed_covariance(y, M: int) -> np.ndarray:
    """Sum of outer products of the ``L - M + 1`` overlapping length-M sub-vectors."""
    y = _samples(y)
    if not 1 <= M <= y.size:
        raise ValueError(f"window M={M} must satisfy 1 <= M <= L={y.size}")
    Y = sliding_window_view(y, M)
    return Y.T @ Y.conj()


def noise_subspace_polynomial(C: np.ndarray) -> np.ndarray:
    """Coefficients (highest power first) of ``z^(M-1) a(z)^H C a(z)``.

    The coefficient of ``z^d`` before the shift is the sum of the d-th
    diagonal of ``C``.
    """
    M = C.shape[0]
    return np.array([np.trace(C, offset=d) for d in range(M - 1, -M, -1)])


def root_music_estimate(y, K: int, cfg: SystemConfig, M: int | None = None) -> AngleEstimates:
    """Root-MUSIC on the spatially smoothed covariance of a single snapshot.

    Raises
    ------
    RootFindingFailed
        If the polynomial roots cannot be computed or fewer than K roots lie
        inside the unit circle.

    Warns
    -----
    DegenerateSubspaceWarning
        If the K-th and (K+1)-th eigenvalues are not separated.
    """
    y = _samples(y)
    L = y.size
    M = cfg.M if M is None else M
    if not 0 < K < M <= L:
        raise ValueError(f"need 0 < K < M <= L, got K={K}, M={M}, L={L}")
    R = spatial_smoothed_covariance(y, M)
    evals, evecs = np.linalg.eigh(R)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    if evals[K - 1] - evals[K] < DEGENERATE_GAP * max(evals[0], np.finfo(float).tiny):
        warnings.warn(
            f"eigenvalues {K} and {K + 1} are not separated; subspaces are ambiguous",
            DegenerateSubspaceWarning,
            stacklevel=2,
        )
    En = evecs[:, K:]
    coeffs = noise_subspace_polynomial(En @ En.conj().T)
    try:
        roots = np.roots(coeffs)
    except np.linalg.LinAlgError as exc:
        raise RootFindingFailed(str(exc)) from exc
    if not np.all(np.isfinite(roots)):
        raise RootFindingFailed("non-finite polynomial roots")
    inside = roots[np.abs(roots) < 1.0]
    if inside.size < K:
        raise RootFindingFailed(f"only {inside.size} roots inside the unit circle, need {K}")
    chosen = inside[np.argsort(1.0 - np.abs(inside), kind="stable")[:K]]
    freqs = cfg.f_s / (2 * math.pi) * np.angle(chosen)
    deg = 2 * (M - 1)
    ops = (L - M + 1) * M**2 + M**3 + deg**3
    return _finish(freqs, Method.ROOT_MUSIC, cfg, ops)


ESTIMATORS = {
    Method.FFT: fft_estimate,
    Method.MLE: mle_estimate,
    Method.ROOT_MUSIC: root_music_estimate,
}


def estimate(method: Method | str, y, K: int, cfg: SystemConfig, **kwargs) -> AngleEstimates:
    """Dispatch to one of the one-shot estimators by name."""
    return ESTIMATORS[Method(method)](y, K, cfg, **kwargs)
