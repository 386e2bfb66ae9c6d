import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rainbow_acq.beamformer import rainbow_design
from rainbow_acq.errors import (
    DegenerateSubspaceWarning,
    NotEnoughPeaks,
    RootFindingFailed,
    SingularProjection,
)
from rainbow_acq.estimators import (
    Method,
    estimate,
    fft_estimate,
    mle_estimate,
    mle_grid,
    noise_subspace_polynomial,
    projection_objective,
    root_music_estimate,
    spatial_smoothed_covariance,
)
from rainbow_acq.geometry import DopplerModel, SystemConfig, alpha, doppler_from_angle
from rainbow_acq.harness import match_and_score
from rainbow_acq.synthesis import Scenario, sinusoid, synthesize

CFG = SystemConfig()
EDGE = CFG.fov_edge


def clean(angles, cfg=CFG, phases=None):
    angles = np.atleast_1d(angles)
    gains = np.ones(angles.size) if phases is None else np.exp(1j * np.asarray(phases))
    sc = Scenario(angles, gains, np.ones(angles.size))
    return synthesize(sc, rainbow_design(cfg), cfg, np.random.default_rng(0)).samples


def half_bin_angle_bound(theta, h, a):
    fd = -a * math.sin(theta)
    return max(abs(-math.asin(max(-1.0, min(1.0, (fd + s) / a))) - theta) for s in (-h, h))


# ------------------------------------------------------------------- FFT


def test_fft_boresight():
    est = fft_estimate(clean(0.0), 1, CFG)
    assert est.method is Method.FFT
    assert est.angles_rad[0] == 0.0 and est.dopplers_hz[0] == 0.0


@pytest.mark.parametrize("k_bin", [-60, -17, 5, 100])
def test_fft_bin_aligned_tone_exact(k_bin):
    pad = 4
    f = k_bin * CFG.f_s / (pad * CFG.L)
    theta = -math.asin(f / alpha(CFG))
    est = fft_estimate(clean(theta), 1, CFG, pad_factor=pad)
    assert est.dopplers_hz[0] == pytest.approx(f, abs=1e-6)
    assert est.angles_rad[0] == pytest.approx(theta, abs=1e-12)


@pytest.mark.parametrize("pad", [1, 2, 4, 8])
def test_fft_quantization_bound(pad):
    h = CFG.f_s / (2 * pad * CFG.L)
    model = DopplerModel.from_config(CFG)
    for theta in np.random.default_rng(pad).uniform(-EDGE, EDGE, 50):
        est = fft_estimate(clean(theta), 1, CFG, pad_factor=pad)
        assert abs(est.dopplers_hz[0] - doppler_from_angle(theta, model)) <= h * (1 + 1e-9)


def test_fft_two_tones_and_exclusion():
    truth = np.radians([-30.0, 20.0])
    est = fft_estimate(clean(truth), 2, CFG)
    res = match_and_score(truth, est)
    assert np.all(res.matched_error_rad <= [half_bin_angle_bound(t, CFG.f_s / 512, alpha(CFG)) for t in truth])


def test_fft_not_enough_peaks():
    with pytest.raises(NotEnoughPeaks):
        fft_estimate(np.ones(8), 3, CFG.replace(L=8, M=4), pad_factor=1)


# ------------------------------------------------------------------- MLE


def test_mle_on_grid_exact():
    grid = mle_grid(CFG, 512)
    for idx in [3, 100, 255, 400, 511]:
        est = mle_estimate(clean(grid[idx]), 1, CFG, grid=grid, refine=False)
        assert est.angles_rad[0] == grid[idx]


def test_mle_off_grid_half_step():
    grid = mle_grid(CFG, 512)
    step = grid[1] - grid[0]
    for theta in np.random.default_rng(7).uniform(-EDGE, EDGE, 40):
        est = mle_estimate(clean(theta), 1, CFG, grid=grid, refine=False)
        assert abs(est.angles_rad[0] - theta) <= step / 2 + 1e-12
        refined = mle_estimate(clean(theta), 1, CFG, grid=grid)
        assert abs(refined.angles_rad[0] - theta) <= 1e-6


def test_mle_k1_matches_projection_objective():
    grid = mle_grid(CFG, 300)
    y = clean(0.33) + np.random.default_rng(2).standard_normal(CFG.L) * 3
    brute = np.argmax([projection_objective(y, sinusoid(t, CFG)) for t in grid])
    assert mle_estimate(y, 1, CFG, grid=grid, refine=False).angles_rad[0] == grid[brute]


def test_mle_pair_search_matches_brute_force():
    grid = mle_grid(CFG, 40)
    rng = np.random.default_rng(11)
    y = clean(grid[[7, 29]], phases=[0.3, 2.0]) + 8 * (rng.standard_normal(CFG.L) + 1j * rng.standard_normal(CFG.L))
    best, arg = -np.inf, None
    for i, j in itertools.combinations(range(grid.size), 2):
        F = sinusoid(grid[[i, j]], CFG)
        # least-squares fit energy: independent of the closed-form Gram inverse
        coef, *_ = np.linalg.lstsq(F, y, rcond=None)
        val = np.linalg.norm(F @ coef) ** 2
        if val > best:
            best, arg = val, {grid[i], grid[j]}
    est = mle_estimate(y, 2, CFG, grid=grid, refine=False)
    assert set(est.angles_rad) == arg


def test_mle_objective_full_projection_at_truth():
    truth = np.radians([-35.0, 10.0, 48.0])
    y = clean(truth, phases=[0.1, 1.2, 2.3])
    assert projection_objective(y, sinusoid(truth, CFG)) == pytest.approx(np.vdot(y, y).real, rel=1e-10)


def test_projection_singular():
    with pytest.raises(SingularProjection):
        projection_objective(np.ones(CFG.L, complex), sinusoid(np.array([0.2, 0.2]), CFG))


def test_mle_three_satellites_noiseless():
    truth = np.radians([-40.0, 5.0, 50.0])
    est = mle_estimate(clean(truth, phases=[0.0, 1.0, 2.0]), 3, CFG)
    assert match_and_score(truth, est).matched_error_rad.max() <= 1e-4


def test_mle_grid_guard():
    with pytest.raises(ValueError):
        mle_estimate(clean(0.1), 2, CFG, grid=np.linspace(-1, 1, 20_000))


# ------------------------------------------------------------ root-MUSIC


def test_covariance_rank_one_when_window_is_full():
    y = clean(0.2) + 0.1
    R = spatial_smoothed_covariance(y, CFG.L)
    np.testing.assert_allclose(R, np.outer(y, y.conj()), rtol=1e-12)


def test_covariance_rank_two():
    y = clean(np.radians([-20.0, 35.0]), phases=[0.0, 1.0])
    R = spatial_smoothed_covariance(y, 32)
    ev = np.linalg.eigvalsh(R)
    assert np.sum(ev > 1e-8 * ev.max()) == 2


def test_covariance_hermitian():
    y = np.random.default_rng(1).standard_normal(64) + 1j * np.random.default_rng(2).standard_normal(64)
    R = spatial_smoothed_covariance(y, 20)
    assert np.linalg.norm(R - R.conj().T) <= 1e-12 * np.linalg.norm(R)
    assert np.linalg.eigvalsh(R).min() > -1e-10 * np.linalg.norm(R)


def test_polynomial_coefficients_match_direct_evaluation():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    C = A @ A.conj().T
    coeffs = noise_subspace_polynomial(C)
    for z in np.exp(1j * rng.uniform(0, 2 * np.pi, 5)) * rng.uniform(0.5, 1.5, 5):
        expected = sum(z**d * np.trace(C, offset=d) for d in range(-5, 6))
        assert np.polyval(coeffs, z) / z**5 == pytest.approx(expected, rel=1e-10)
    # on the unit circle it is the quadratic form a(z)^H C a(z)
    z = np.exp(0.7j)
    a = z ** np.arange(6)
    assert np.polyval(coeffs, z) / z**5 == pytest.approx(np.conj(a) @ C @ a, rel=1e-10)


def test_root_music_single_tone_root_on_circle():
    theta = math.radians(-33.0)
    y = clean(theta)
    est = root_music_estimate(y, 1, CFG, M=32)
    fd = doppler_from_angle(theta, DopplerModel.from_config(CFG))
    assert abs(2 * math.pi * (est.dopplers_hz[0] - fd) / CFG.f_s) <= 1e-6


def test_root_music_boresight():
    est = root_music_estimate(clean(0.0), 1, CFG)
    assert abs(est.angles_rad[0]) <= 1e-6


def test_root_music_two_satellites():
    truth = np.radians([-20.0, 20.0])
    est = root_music_estimate(clean(truth, phases=[0.4, 1.9]), 2, CFG)
    assert match_and_score(truth, est).matched_error_rad.max() <= 1e-3


def test_root_music_degenerate_warning():
    # one noiseless tone but K=2: the 2nd and 3rd eigenvalues are both zero
    with pytest.warns(DegenerateSubspaceWarning):
        try:
            root_music_estimate(clean(0.4), 2, CFG)
        except RootFindingFailed:
            pass


def test_root_music_no_warning_when_separated():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DegenerateSubspaceWarning)
        root_music_estimate(clean(np.radians([-10.0, 30.0]), phases=[0, 1]), 2, CFG)


def test_root_music_bad_order():
    with pytest.raises(ValueError):
        root_music_estimate(clean(0.1), 32, CFG, M=32)


# --------------------------------------------------------- shared properties


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(-EDGE, EDGE), phase=st.floats(0, 2 * math.pi))
def test_noiseless_resolution_all_methods(theta, phase):
    y = clean(theta, phases=[phase])
    h = CFG.f_s / (2 * 4 * CFG.L)
    assert abs(fft_estimate(y, 1, CFG).angles_rad[0] - theta) <= half_bin_angle_bound(theta, h, alpha(CFG)) + 1e-12
    grid = mle_grid(CFG)
    assert abs(mle_estimate(y, 1, CFG, grid=grid, refine=False).angles_rad[0] - theta) <= (grid[1] - grid[0]) / 2 + 1e-12
    assert abs(root_music_estimate(y, 1, CFG).angles_rad[0] - theta) <= 1e-3


@pytest.mark.parametrize("method", ["fft", "mle", "music"])
def test_permutation_invariance(method):
    truth = np.radians([-40.0, 5.0, 50.0])
    phases = np.array([0.2, 1.4, 2.9])
    scores = []
    for perm in [(0, 1, 2), (2, 0, 1), (1, 2, 0)]:
        y = clean(truth[list(perm)], phases=phases[list(perm)])
        scores.append(match_and_score(truth, estimate(method, y, 3, CFG)).total_error_rad)
    # eigendecomposition of a permuted sum differs at rounding level only
    np.testing.assert_allclose(scores, scores[0], atol=1e-7 if method == "music" else 1e-9)


@pytest.mark.parametrize("method", ["fft", "mle", "music"])
def test_negated_angles_negate_dopplers(method):
    truth = np.radians([-25.0, 38.0])
    a = np.sort(estimate(method, clean(truth, phases=[0.5, 1.5]), 2, CFG).dopplers_hz)
    b = np.sort(estimate(method, clean(-truth, phases=[0.5, 1.5]), 2, CFG).dopplers_hz)
    np.testing.assert_allclose(a, -b[::-1], atol=1e-3 if method != "fft" else 1e-6)


def test_complexity_instrumentation():
    y = clean(np.radians([-20.0, 30.0]), phases=[0, 1])
    fft_ops = [fft_estimate(y, 1, CFG, pad_factor=p).n_ops for p in (1, 4, 16)]
    assert fft_ops == sorted(fft_ops) and len(set(fft_ops)) == 3
    music_ops = [root_music_estimate(y, 1, CFG, M=m).n_ops for m in (8, 16, 32)]
    assert music_ops == sorted(music_ops) and len(set(music_ops)) == 3
    g_small, g_big = mle_grid(CFG, 256), mle_grid(CFG, 1024)
    assert mle_estimate(y, 1, CFG, grid=g_small, refine=False).n_ops < mle_estimate(y, 1, CFG, grid=g_big, refine=False).n_ops
    assert mle_estimate(y, 1, CFG, refine=False).n_ops < mle_estimate(y, 2, CFG, refine=False).n_ops
    # ascending order at the default sizes: FFT < root-MUSIC < MLE
    f = fft_estimate(y, 2, CFG).n_ops
    m = root_music_estimate(y, 2, CFG).n_ops
    e = mle_estimate(y, 2, CFG).n_ops
    assert f < m < e
