"""Monte Carlo experiments, error scoring, config files and CSV output.

Every trial draws from its own generator seeded by
``SeedSequence([master_seed, trial_index, *stream])``, so results do not
depend on the order (or the process) in which trials run.

RMSE everywhere is ``sqrt(mean(total_error**2))`` over trials, where the
total error of a trial is the sum of the per-satellite absolute angle errors
after optimal matching.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.optimize import linear_sum_assignment

from .baselines import conventional_sweep, hierarchical_sweep
from .beamformer import (
    conventional_design,
    bf_gain,
    gain_loss_approx,
    gain_loss_exact,
    rainbow_design,
    rainbow_gain,
)
from .bounds import rcrb_angle
from .errors import ConfigError, LengthMismatch, RainbowError
from .estimators import AngleEstimates, Method, estimate, mle_grid
from .geometry import DopplerModel, SystemConfig, doppler_from_angle
from .synthesis import Scenario, synthesize

ONE_SHOT_METHODS = (Method.FFT, Method.MLE, Method.ROOT_MUSIC)


class Kind(str, enum.Enum):
    GAIN_PROFILE = "gain-profile"
    SINGLE_SAT_RMSE = "single-sat"
    MULTI_SAT_VS_SLOTS = "multi-sat"


@dataclass
class ExperimentSpec:
    """What to run. Angles are in degrees here because this is user-facing input."""

    kind: Kind = Kind.SINGLE_SAT_RMSE
    trials: int = 1000
    snr_grid_db: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    n_ts_grid: tuple[int, ...] = tuple(2**i for i in range(11))
    angles_deg: tuple[float, ...] = (-45.0,)
    snr_db: float = 15.0
    master_seed: int | None = None
    methods: tuple[Method, ...] = ONE_SHOT_METHODS
    pad_factor: int = 4
    n_grid: int = 2048

    def __post_init__(self):
        self.kind = Kind(self.kind)
        self.methods = tuple(Method(m) for m in self.methods)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.snr_grid_db or not self.n_ts_grid or not self.angles_deg:
            raise ConfigError("experiment grids must be non-empty")
        if any(n < 1 for n in self.n_ts_grid):
            raise ConfigError("slot counts must be >= 1")

    @classmethod
    def multi_sat(cls, **overrides) -> "ExperimentSpec":
        """Defaults for the slot-budget comparison: three well separated satellites."""
        base = dict(
            kind=Kind.MULTI_SAT_VS_SLOTS,
            angles_deg=(-40.0, 5.0, 50.0),
            methods=(Method.ROOT_MUSIC,),
        )
        base.update(overrides)
        return cls(**base)

    def seed(self, cfg: SystemConfig) -> int:
        return cfg.seed if self.master_seed is None else self.master_seed


@dataclass
class AcquisitionResult:
    estimates: AngleEstimates | np.ndarray
    matched_error_rad: np.ndarray
    total_error_rad: float
    assignment: np.ndarray = field(default=None, repr=False)


def match_and_score(truth, est) -> AcquisitionResult:
    """Pair estimates with true angles to minimise the summed absolute error.

    Exhaustive over permutations for K <= 6, Hungarian assignment above.
    ``matched_error_rad[k]`` is the error of the estimate matched to
    ``truth[k]``.
    """
    angles = est.angles_rad if isinstance(est, AngleEstimates) else est
    truth = np.atleast_1d(np.asarray(truth, dtype=float))
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if truth.shape != angles.shape:
        raise LengthMismatch(f"{truth.size} true angles vs {angles.size} estimates")
    K = truth.size
    cost = np.abs(truth[:, None] - angles[None, :])
    if K <= 6:
        best, best_perm = math.inf, tuple(range(K))
        for perm in itertools.permutations(range(K)):
            total = sum(cost[k, perm[k]] for k in range(K))
            if total < best:
                best, best_perm = total, perm
        perm = np.array(best_perm, dtype=int)
    else:
        _, perm = linear_sum_assignment(cost)
    matched = cost[np.arange(K), perm]
    return AcquisitionResult(est, matched, float(matched.sum()), perm)


def rmse(errors) -> float:
    errors = np.asarray(errors, dtype=float)
    return float(np.sqrt(np.mean(errors**2)))


def trial_rng(master_seed: int, trial: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, trial, *stream]))


def _failure_error(cfg: SystemConfig, K: int) -> float:
    lo, hi = cfg.fov
    return K * (hi - lo)


def _map_trials(fn, args: list, workers: int) -> list:
    if workers <= 1 or len(args) < 2:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args, chunksize=max(1, len(args) // (4 * workers))))


# ----------------------------------------------------------- single satellite


def _single_trial(args):
    spec, cfg, trial = args
    design = rainbow_design(cfg)
    truth = np.radians(spec.angles_deg)
    K = truth.size
    grid = mle_grid(cfg, spec.n_grid)
    seed = spec.seed(cfg)
    errs = np.zeros((len(spec.snr_grid_db), len(spec.methods)))
    failed = np.zeros_like(errs, dtype=bool)
    for i, snr in enumerate(spec.snr_grid_db):
        rng = trial_rng(seed, trial)
        scenario = Scenario.random(truth, snr, rng)
        y = synthesize(scenario, design, cfg, rng)
        for j, method in enumerate(spec.methods):
            kwargs = {}
            if method is Method.FFT:
                kwargs["pad_factor"] = spec.pad_factor
            elif method is Method.MLE:
                kwargs["grid"] = grid
            try:
                errs[i, j] = match_and_score(truth, estimate(method, y, K, cfg, **kwargs)).total_error_rad
            except RainbowError:
                errs[i, j] = _failure_error(cfg, K)
                failed[i, j] = True
    return errs, failed


def run_single_sat(spec: ExperimentSpec, cfg: SystemConfig, workers: int = 1) -> list[dict]:
    """RMSE (degrees) of each one-shot estimator versus effective SNR, plus the RCRB.

    Estimator failures count as a full field-of-view error and are tallied in
    the ``failed_<method>`` columns.
    """
    results = _map_trials(_single_trial, [(spec, cfg, t) for t in range(spec.trials)], workers)
    errs = np.stack([r[0] for r in results])
    failed = np.stack([r[1] for r in results])
    theta = math.radians(spec.angles_deg[0])
    rows = []
    for i, snr in enumerate(spec.snr_grid_db):
        row = {"snr_db": snr}
        for j, method in enumerate(spec.methods):
            row[f"rmse_{method.value}_deg"] = math.degrees(rmse(errs[:, i, j]))
        row["rcrb_deg"] = math.degrees(rcrb_angle(snr, theta, cfg)) if math.isfinite(snr) else 0.0
        for j, method in enumerate(spec.methods):
            row[f"failed_{method.value}"] = int(failed[:, i, j].sum())
        rows.append(row)
    return rows


# ------------------------------------------------------- multiple satellites


def _multi_trial(args):
    spec, cfg, trial = args
    design = rainbow_design(cfg)
    truth = np.radians(spec.angles_deg)
    K = truth.size
    seed = spec.seed(cfg)
    scenario = Scenario.random(truth, spec.snr_db, trial_rng(seed, trial))
    grid = mle_grid(cfg, spec.n_grid)
    approaches = [m.value for m in spec.methods] + ["conventional", "hierarchical"]
    errs = np.zeros((len(spec.n_ts_grid), len(approaches)))
    failed = np.zeros_like(errs, dtype=bool)
    for i, n_ts in enumerate(spec.n_ts_grid):
        rng = trial_rng(seed, trial, n_ts)
        y = synthesize(scenario, design, cfg, rng, n_slots=n_ts)
        outcomes = []
        for method in spec.methods:
            kwargs = {"pad_factor": spec.pad_factor} if method is Method.FFT else {}
            if method is Method.MLE:
                kwargs["grid"] = grid
            outcomes.append(lambda m=method, kw=kwargs: estimate(m, y, K, cfg, **kw))
        outcomes.append(lambda: conventional_sweep(scenario, n_ts, K, cfg, rng))
        outcomes.append(lambda: hierarchical_sweep(scenario, n_ts, K, cfg, rng))
        for j, run in enumerate(outcomes):
            try:
                errs[i, j] = match_and_score(truth, run()).total_error_rad
            except RainbowError:
                errs[i, j] = _failure_error(cfg, K)
                failed[i, j] = True
    return errs, failed


def multi_sat_columns(spec: ExperimentSpec) -> list[str]:
    return [f"rainbow_{m.value}" for m in spec.methods] + ["conventional", "hierarchical"]


def run_multi_sat(spec: ExperimentSpec, cfg: SystemConfig, workers: int = 1) -> list[dict]:
    """Total-error RMSE (degrees) of rainbow acquisition and both sweeps versus slot budget.

    The rainbow measurement is averaged over ``n_ts`` slots; the sweeps
    spend the ``n_ts`` slots on beams.
    """
    results = _map_trials(_multi_trial, [(spec, cfg, t) for t in range(spec.trials)], workers)
    errs = np.stack([r[0] for r in results])
    failed = np.stack([r[1] for r in results])
    names = multi_sat_columns(spec)
    rows = []
    for i, n_ts in enumerate(spec.n_ts_grid):
        row = {"n_ts": n_ts}
        for j, name in enumerate(names):
            row[f"rmse_{name}_deg"] = math.degrees(rmse(errs[:, i, j]))
        for j, name in enumerate(names):
            row[f"failed_{name}"] = int(failed[:, i, j].sum())
        rows.append(row)
    return rows


# ---------------------------------------------------------------- gain profile


def run_gain_profile(cfg: SystemConfig, points: int = 1001, pointing: float = 0.0) -> list[dict]:
    """Gain of the rainbow and a fixed conventional beam at each satellite's own Doppler."""
    lo, hi = cfg.fov
    theta = np.linspace(lo, hi, points)
    design = rainbow_design(cfg)
    fd = doppler_from_angle(theta, DopplerModel.from_config(cfg))
    g_rain = rainbow_gain(theta, cfg, design)
    g_conv = bf_gain(cfg.f_p, theta, conventional_design(pointing), cfg.N, cfg.f_c, f_offset=fd)
    loss = gain_loss_exact(theta, cfg, design)
    approx = gain_loss_approx(theta, cfg)
    return [
        {
            "theta_deg": float(np.degrees(t)),
            "gain_rainbow": float(a),
            "gain_conventional": float(b),
            "loss_exact": float(c),
            "loss_approx": float(d),
        }
        for t, a, b, c, d in zip(theta, g_rain, g_conv, loss, approx)
    ]


# ---------------------------------------------------------------- file formats


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def write_csv(rows: list[dict], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(rows))


_SYSTEM_KEYS = {f.name: f for f in fields(SystemConfig) if f.init}
_SPEC_KEYS = {f.name: f for f in fields(ExperimentSpec)}
_INT_KEYS = {"N", "L", "M", "seed", "trials", "master_seed", "pad_factor", "n_grid"}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in ("v_sat", "master_seed") and raw.lower() in ("", "none"):
        return None
    if key == "kind":
        return Kind(raw)
    if key == "methods":
        return tuple(Method(m.strip()) for m in raw.split(",") if m.strip())
    if key in ("snr_grid_db", "angles_deg"):
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if key == "n_ts_grid":
        return tuple(int(v) for v in raw.split(",") if v.strip())
    if key in _INT_KEYS:
        return int(raw)
    return float(raw)


def parse_config(text: str) -> tuple[dict, dict]:
    """Split ``key=value`` lines into SystemConfig and ExperimentSpec keyword dicts.

    Blank lines and ``#`` comments are ignored. Unknown or repeated keys raise
    :class:`ConfigError`.
    """
    system, experiment = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in _SYSTEM_KEYS:
            target = system
        elif key in _SPEC_KEYS:
            target = experiment
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in target:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            target[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return system, experiment


def load_config(path: str | os.PathLike) -> tuple[dict, dict]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
